// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Pass --cli <path-to-covertsim> to include the end-to-end CLI
// determinism and selfcheck checks (ctest wires this automatically).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "covert/constellation.hpp"
#include "covert/fock.hpp"
#include "covert/limits.hpp"
#include "covert/linksim.hpp"
#include "covert/selfcheck.hpp"

namespace {

using namespace covert;
using Clock = std::chrono::steady_clock;

struct Criterion {
    int id;
    std::string label;
    bool pass = true;
    std::string detail;
    double seconds = 0.0;
};

std::vector<Criterion> g_results;

template <typename F>
void run_criterion(int id, const std::string& label, F&& body) {
    Criterion c{id, label};
    const auto t0 = Clock::now();
    std::ostringstream detail;
    try {
        c.pass = body(detail);
    } catch (const std::exception& e) {
        c.pass = false;
        detail << "exception: " << e.what();
    }
    c.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    c.detail = detail.str();
    g_results.push_back(c);
    std::printf("[%s] criterion %d: %s (%.1f s)%s%s\n", c.pass ? "PASS" : "FAIL", id, label.c_str(),
                c.seconds, c.detail.empty() ? "" : " -- ", c.detail.c_str());
    std::fflush(stdout);
}

std::vector<double> fit_grid(double nT) {
    std::vector<double> g;
    for (double s : {0.20, 0.14, 0.10, 0.07, 0.05}) g.push_back(s * std::sqrt(nT));
    return g;
}

ChannelParams channel_for_nT(double nT) { return ChannelParams{0.5, 2.0 * nT}; }

struct CliCapture {
    std::string stdout_text;
    int exit_code = -1;
};

CliCapture run_cli(const std::string& cli, const std::string& args) {
    CliCapture cap;
    const std::string cmd = cli + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) {
        cap.exit_code = -1;
        return cap;
    }
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, p)) > 0) cap.stdout_text.append(buf, got);
    const int status = pclose(p);
    cap.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return cap;
}

SimConfig scaling_base() {
    SimConfig base;
    base.channel = ChannelParams{0.5, 1.0};
    base.n_modes = 10000;
    base.delta_qre = 0.04;
    base.constellation = Constellation::qpsk(1.0);
    base.nbar_S_per_selected_mode = 0.25;
    base.trials = 200;
    base.master_seed = 20240;
    return base;
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--cli") cli = argv[i + 1];

    // 1. QPSK quartic coefficient matches 1/(2 nT (1+nT)) within 1% for
    //    nT in {0.1, 1, 10}; each fit within 60 s.
    run_criterion(1, "qpsk quartic coefficient vs closed form", [](std::ostringstream& d) {
        bool ok = true;
        for (double nT : {0.1, 1.0, 10.0}) {
            const auto t0 = Clock::now();
            const QuarticFit f = quartic_coefficient_fit(
                WillieSpec{channel_for_nT(nT), Constellation::qpsk(1.0), 1.0, {}}, fit_grid(nT));
            const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
            const double target = 1.0 / (2.0 * nT * (1.0 + nT));
            const double rel = std::abs(f.c4 - target) / target;
            d << "nT=" << nT << ": rel=" << rel << " t=" << secs << "s; ";
            ok = ok && rel <= 0.01 && secs <= 60.0;
        }
        return ok;
    });

    // 2. BPSK quartic coefficient matches its closed form within 1%; the
    //    exact BPSK QRE strictly exceeds QPSK at every swept u.
    run_criterion(2, "bpsk quartic coefficient and strict ordering", [](std::ostringstream& d) {
        bool ok = true;
        for (double nT : {0.1, 1.0, 10.0}) {
            const QuarticFit f = quartic_coefficient_fit(
                WillieSpec{channel_for_nT(nT), Constellation::bpsk(1.0), 1.0, {}}, fit_grid(nT));
            const double target = 1.0 / (2.0 * nT * (1.0 + nT)) + std::log1p(1.0 / nT) / (1.0 + 2.0 * nT);
            const double rel = std::abs(f.c4 - target) / target;
            if (nT == 1.0) d << "nT=1 c4=" << f.c4 << " target 0.481049; ";
            d << "nT=" << nT << " rel=" << rel << "; ";
            ok = ok && rel <= 0.01;
        }
        // strict ordering of the exact QRE at every swept u (nT = 1)
        const ChannelParams p = channel_for_nT(1.0);
        for (double u : fit_grid(1.0)) {
            const double a = u / std::sqrt(1.0 - p.eta);
            const double dq = exact_qre_per_mode(WillieSpec{p, Constellation::qpsk(a), 1.0, {}});
            const double db = exact_qre_per_mode(WillieSpec{p, Constellation::bpsk(a), 1.0, {}});
            ok = ok && db > dq;
        }
        return ok;
    });

    // 3. Converse chain: exact single-mode QPSK QRE dominates the exact
    //    converse bound for swept nbar_S <= 0.1 (tolerance 1e-10); both
    //    ratios to the leading term reach 1 within 1% at nbar_S = 1e-3.
    run_criterion(3, "converse chain ordering and series agreement", [](std::ostringstream& d) {
        const ChannelParams p{0.5, 1.0};
        bool ok = true;
        for (double ns : {1e-3, 3e-3, 0.01, 0.03, 0.1}) {
            const double exact_qpsk =
                exact_qre_per_mode(WillieSpec{p, Constellation::qpsk(std::sqrt(ns)), 1.0, {}});
            const double conv = converse_qre_lower_exact(ns, p, 1);
            if (!(exact_qpsk >= conv - 1e-10)) {
                ok = false;
                d << "ordering fails at nbar_S=" << ns << "; ";
            }
        }
        const double ns = 1e-3;
        const double lead = converse_qre_leading(ns, p, 1);
        const double r1 =
            exact_qre_per_mode(WillieSpec{p, Constellation::qpsk(std::sqrt(ns)), 1.0, {}}) / lead;
        const double r2 = converse_qre_lower_exact(ns, p, 1) / lead;
        d << "qpsk/leading=" << r1 << " converse/leading=" << r2;
        return ok && std::abs(r1 - 1.0) <= 0.01 && std::abs(r2 - 1.0) <= 0.01;
    });

    // 4. Derivative oracle: closed forms vs finite differences; even orders
    //    residual <= 1e-5, odd orders vanish with residual <= 1e-6.
    run_criterion(4, "state-derivative closed forms at u = 0", [](std::ostringstream& d) {
        bool ok = true;
        for (auto kind : {ConstellationKind::qpsk, ConstellationKind::bpsk}) {
            const char* name = kind == ConstellationKind::qpsk ? "qpsk" : "bpsk";
            for (int order = 1; order <= 4; ++order) {
                const double tol = (order % 2 == 1) ? 1e-6 : 1e-5;
                const double resid = derivative_check(kind, order, 1.0);
                if (resid > tol) {
                    ok = false;
                    d << name << " order " << order << " residual " << resid << " > " << tol << "; ";
                }
            }
        }
        if (ok) d << "all residuals within tolerance";
        return ok;
    });

    // 5. Pinsker + detection: 200 randomized pairs; radiometer at the covert
    //    budget (delta = 0.04, n = 1e5, 1e4 trials) respects the floor.
    run_criterion(5, "pinsker, detection bounds and radiometer floor", [](std::ostringstream& d) {
        bool ok = true;
        std::mt19937_64 g(0xACCE97ULL);
        std::normal_distribution<double> nd(0.0, 1.0);
        for (int i = 0; i < 200; ++i) {
            const int dim = 2 + static_cast<int>(g() % 7);
            auto ginibre = [&] {
                Matrix G(dim, dim);
                for (int r = 0; r < dim; ++r)
                    for (int c = 0; c < dim; ++c) G(r, c) = Complex(nd(g), nd(g));
                Matrix rho = G * G.adjoint();
                rho /= rho.trace().real();
                covert::detail::hermitize(rho);
                return DensityMatrix(std::move(rho), 0.0);
            };
            const DensityMatrix rho = ginibre(), sig = ginibre();
            const double tn = 2.0 * trace_distance(rho, sig);
            const double dkl = qre(rho, sig);
            const double pe = detection_error_min(rho, sig);
            if (tn > std::sqrt(2.0 * dkl) + 1e-8 || pe < 0.0 || pe > 0.5) {
                ok = false;
                d << "pair " << i << " violates; ";
            }
        }

        SimConfig cfg;
        cfg.channel = ChannelParams{0.5, 1.0};
        cfg.n_modes = 100000;
        cfg.delta_qre = 0.04;
        cfg.constellation = Constellation::qpsk(1.0);
        cfg.nbar_S_per_selected_mode = covert_budget_nS(cfg.channel, cfg.n_modes, 0.04).nbar_S;
        cfg.trials = 10000;
        cfg.master_seed = 424242;
        const RocSummary roc = willie_radiometer_roc(cfg, 10000);
        const double floor = pinsker_pe_floor(0.04);
        d << "min_pe=" << roc.min_pe << " floor=" << floor << " stderr=" << roc.min_pe_stderr;
        return ok && roc.min_pe >= floor - 4.0 * roc.min_pe_stderr;
    });

    // 6. Budget / tau algebra at 1e-12 relative.
    run_criterion(6, "budget and sparsification algebra", [](std::ostringstream& d) {
        const ChannelParams p{0.5, 1.0};
        const std::uint64_t n = 1000000;
        const double dq = 0.01;
        const CovertBudget b = covert_budget_nS(p, n, dq);
        const double back = converse_qre_leading(b.nbar_S, p, n);
        const double tau1 = sparsification_tau(b.nbar_S, p, dq, n);
        const double ns = 0.01;
        const double tau = sparsification_tau(ns, p, dq, n);
        const double composed = static_cast<double>(n) * sparsified_qre_leading(ns, tau, p);
        d << "|back-dq|/dq=" << std::abs(back - dq) / dq << " |tau-1|=" << std::abs(tau1 - 1.0)
          << " |comp-dq|/dq=" << std::abs(composed - dq) / dq;
        return std::abs(back - dq) / dq <= 1e-12 && std::abs(tau1 - 1.0) <= 1e-12 &&
               std::abs(composed - dq) / dq <= 1e-12;
    });

    // 7. Reliability constants: Holevo slope at zero matches the chi bound to
    //    1e-4 relative on a 5x5 grid; shot-noise lower bound below chi bound.
    run_criterion(7, "holevo slope and reliability ordering", [](std::ostringstream& d) {
        bool ok = true;
        double worst = 0.0;
        for (double eta : {0.1, 0.3, 0.5, 0.7, 0.9})
            for (double nb : {0.1, 0.5, 1.0, 10.0, 100.0}) {
                const ChannelParams p{eta, nb};
                const CRelBounds b = c_rel_bounds(p);
                const double h = 1e-6;
                const double slope = (holevo_chi(h, p) - holevo_chi(0.0, p)) / h;
                worst = std::max(worst, std::abs(slope - b.upper_chi) / b.upper_chi);
                ok = ok && b.lower_shotnoise <= b.upper_chi + 1e-15;
            }
        d << "max rel slope err = " << worst;
        return ok && worst <= 1e-4;
    });

    // 8. SRL scaling: log-log slope of simulated throughput over
    //    n in {1e4, 1e5, 1e6} within 0.5 +/- 0.05; per-row floor respected.
    run_criterion(8, "square-root-law scaling of simulated throughput", [](std::ostringstream& d) {
        const SimConfig base = scaling_base();
        const auto rows = srl_scaling_sweep(base, {10000, 100000, 1000000});
        const double slope = scaling_loglog_slope(rows);
        const double floor = pinsker_pe_floor(base.delta_qre);
        bool floors = true;
        for (const auto& r : rows) {
            d << "n=" << r.n << " m_bits=" << r.m_bits << " pe=" << r.willie_min_pe << "; ";
            floors = floors && r.willie_min_pe >= floor - 4.0 * r.willie_pe_stderr;
        }
        d << "slope=" << slope;
        return std::abs(slope - 0.5) <= 0.05 && floors;
    });

    // 9. Determinism and selfcheck: CLI `simulate` byte-identical across two
    //    runs with the same seed; `selfcheck` passes end-to-end within 5 min.
    run_criterion(9, "seeded determinism and selfcheck", [&](std::ostringstream& d) {
        bool ok = true;
        if (!cli.empty()) {
            const std::string args =
                "simulate --eta 0.5 --nbar-b 1 --n 20000 --delta-qre 0.04 --nbar-s 0.1 "
                "--constellation qpsk --trials 50 --seed 7 --format json";
            const CliCapture a = run_cli(cli, args);
            const CliCapture b = run_cli(cli, args);
            if (a.exit_code != 0 || b.exit_code != 0 || a.stdout_text.empty() ||
                a.stdout_text != b.stdout_text) {
                ok = false;
                d << "simulate runs differ or failed (exit " << a.exit_code << "); ";
            } else {
                d << "simulate byte-identical (" << a.stdout_text.size() << " bytes); ";
            }
            const auto t0 = Clock::now();
            const CliCapture s = run_cli(cli, "selfcheck");
            const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
            d << "selfcheck exit=" << s.exit_code << " in " << secs << "s";
            ok = ok && s.exit_code == 0 && secs <= 300.0;
        } else {
            const SimConfig cfg = scaling_base();
            ok = to_json(run_experiment(cfg)).dump() == to_json(run_experiment(cfg)).dump();
            const auto t0 = Clock::now();
            const auto checks = run_selfcheck();
            const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
            d << "(no --cli) library selfcheck in " << secs << "s";
            ok = ok && all_passed(checks) && secs <= 300.0;
        }
        return ok;
    });

    int failures = 0;
    for (const auto& c : g_results) failures += c.pass ? 0 : 1;
    std::printf("%d/%zu criteria passed\n", static_cast<int>(g_results.size()) - failures,
                g_results.size());
    return failures;
}
