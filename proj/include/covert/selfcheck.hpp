#pragma once

// Invariant suite behind the `selfcheck` command: Klein/Pinsker over
// randomized state pairs, QRE additivity, thermal-log consistency, unitary
// invariance, the closed-form derivative oracle, quartic coefficient fits at
// nT = 1, budget algebra and reliability-constant identities.
//
// Setting the environment variable COVERTSIM_SELFCHECK_FAULT injects a sign
// error into the divergence used by the Klein/Pinsker checks. It exists only
// to demonstrate that the harness detects a broken build.

#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "covert/constellation.hpp"
#include "covert/fock.hpp"
#include "covert/limits.hpp"

namespace covert {

struct CheckResult {
    std::string name;
    bool pass;
    std::string detail;
};

namespace detail {

inline bool selfcheck_fault_injected() { return std::getenv("COVERTSIM_SELFCHECK_FAULT") != nullptr; }

inline DensityMatrix random_ginibre_state(int dim, std::mt19937_64& g) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Matrix G(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) G(r, c) = Complex(nd(g), nd(g));
    Matrix rho = G * G.adjoint();
    rho /= rho.trace().real();
    hermitize(rho);
    return DensityMatrix(std::move(rho), 0.0);
}

inline std::string format_max(const char* label, double value, double bound) {
    std::ostringstream os;
    os << label << " = " << value << " (bound " << bound << ")";
    return os.str();
}

}  // namespace detail

inline std::vector<CheckResult> run_selfcheck(int pinsker_pairs = 200) {
    std::vector<CheckResult> out;
    const double fault_sign = detail::selfcheck_fault_injected() ? -1.0 : 1.0;

    // Klein nonnegativity and Pinsker over randomized low-dim pairs.
    {
        std::mt19937_64 g(0x5eedULL);
        double worst_klein = 0.0, worst_pinsker = -1.0;
        bool pass = true;
        for (int i = 0; i < pinsker_pairs; ++i) {
            const int dim = 2 + static_cast<int>(g() % 7);
            const DensityMatrix rho = detail::random_ginibre_state(dim, g);
            const DensityMatrix sigma = detail::random_ginibre_state(dim, g);
            const double d = fault_sign * qre(rho, sigma);
            const double tn = 2.0 * trace_distance(rho, sigma);
            worst_klein = std::min(worst_klein, d);
            worst_pinsker = std::max(worst_pinsker, tn - std::sqrt(2.0 * d));
            if (d < -1e-10 || tn > std::sqrt(std::max(2.0 * d, 0.0)) + 1e-8) pass = false;
        }
        out.push_back({"klein_nonnegative", worst_klein >= -1e-10,
                       detail::format_max("min qre", worst_klein, -1e-10)});
        out.push_back({"pinsker_trace_norm", pass,
                       detail::format_max("max ||.||_1 - sqrt(2 qre)", worst_pinsker, 1e-8)});
    }

    // qre(rho (x) rho, sigma (x) sigma) = 2 qre(rho, sigma) at dim <= 20.
    {
        const DensityMatrix rho = displaced_thermal_at(Complex(0.2, 0.1), 0.5, 20);
        const DensityMatrix sigma = thermal_state_at(0.8, 20);
        const double single = qre(rho, sigma);
        const double pair = qre(tensor_product(rho, rho), tensor_product(sigma, sigma));
        const double err = std::abs(pair - 2.0 * single);
        out.push_back({"qre_additivity", err <= 1e-8, detail::format_max("|D2 - 2 D1|", err, 1e-8)});
    }

    // Closed-form thermal reference vs the generic eigendecomposition path.
    {
        const DensityMatrix rho = displaced_thermal(Complex(0.2, 0.0), 0.5);
        const DensityMatrix sigma = thermal_state_at(0.5, rho.dim());
        const double err = std::abs(qre_vs_thermal(rho, 0.5) - qre(rho, sigma));
        out.push_back(
            {"qre_vs_thermal_consistency", err <= 1e-8, detail::format_max("|diff|", err, 1e-8)});
    }

    // Entropy and trace distance invariant under a joint displacement.
    {
        const int dim = 48;
        const DensityMatrix rho = thermal_state_at(1.0, dim);
        const DensityMatrix sig = displaced_thermal_at(Complex(0.3, 0.0), 0.7, dim);
        const Matrix d = displacement_operator(Complex(0.4, 0.2), dim).entries;
        Matrix re = d * rho.entries() * d.adjoint();
        detail::hermitize(re);
        Matrix se = d * sig.entries() * d.adjoint();
        detail::hermitize(se);
        double re_def = std::max(0.0, 1.0 - re.trace().real());
        double se_def = std::max(0.0, 1.0 - se.trace().real());
        const DensityMatrix rho_d(std::move(re), re_def);
        const DensityMatrix sig_d(std::move(se), se_def);
        const double s_err = std::abs(von_neumann_entropy(rho_d) - von_neumann_entropy(rho));
        const double t_err = std::abs(trace_distance(rho_d, sig_d) - trace_distance(rho, sig));
        out.push_back({"unitary_invariance", s_err <= 1e-8 && t_err <= 1e-8,
                       detail::format_max("max drift", std::max(s_err, t_err), 1e-8)});
    }

    // Derivative oracle at nT = 1: odd orders vanish, even orders match the
    // closed forms.
    for (auto kind : {ConstellationKind::qpsk, ConstellationKind::bpsk}) {
        const std::string prefix =
            kind == ConstellationKind::qpsk ? "qpsk_derivative_" : "bpsk_derivative_";
        for (int order = 1; order <= 4; ++order) {
            const double tol = (order % 2 == 1) ? 1e-6 : 1e-5;
            const double resid = derivative_check(kind, order, 1.0);
            out.push_back({prefix + std::to_string(order), resid <= tol,
                           detail::format_max("residual", resid, tol)});
        }
    }

    // Quartic coefficients at nT = 1 against the closed-form targets.
    {
        const ChannelParams half{0.5, 2.0};  // eta nbar_B = 1
        std::vector<double> grid;
        for (double s : {0.20, 0.14, 0.10, 0.07, 0.05}) grid.push_back(s);
        const QuarticFit q =
            quartic_coefficient_fit(WillieSpec{half, Constellation::qpsk(1.0), 1.0, {}}, grid);
        const QuarticFit b =
            quartic_coefficient_fit(WillieSpec{half, Constellation::bpsk(1.0), 1.0, {}}, grid);
        const double qt = 0.25, bt = 0.25 + std::log(2.0) / 3.0;
        out.push_back({"qpsk_quartic_nT1", std::abs(q.c4 - qt) <= 0.01 * qt,
                       detail::format_max("|c4 - 0.25|/0.25", std::abs(q.c4 - qt) / qt, 0.01)});
        out.push_back({"bpsk_quartic_nT1", std::abs(b.c4 - bt) <= 0.01 * bt,
                       detail::format_max("rel err", std::abs(b.c4 - bt) / bt, 0.01)});
    }

    // Budget and sparsification algebra at 1e-12 relative.
    {
        const ChannelParams p{0.5, 1.0};
        const std::uint64_t n = 1000000;
        const double dq = 0.01;
        const CovertBudget budget = covert_budget_nS(p, n, dq);
        const double back = converse_qre_leading(budget.nbar_S, p, n);
        const double tau_at_budget = sparsification_tau(budget.nbar_S, p, dq, n);
        const double nS = 0.01;
        const double tau = sparsification_tau(nS, p, dq, n);
        const double composed = static_cast<double>(n) * sparsified_qre_leading(nS, tau, p);
        const double e1 = std::abs(back - dq) / dq;
        const double e2 = std::abs(tau_at_budget - 1.0);
        const double e3 = std::abs(composed - dq) / dq;
        out.push_back({"budget_tau_algebra", e1 <= 1e-12 && e2 <= 1e-12 && e3 <= 1e-12,
                       detail::format_max("max rel err", std::max({e1, e2, e3}), 1e-12)});
    }

    // Holevo slope at the origin matches the chi upper bound; shot-noise lower
    // bound never exceeds it.
    {
        double worst = 0.0;
        bool order_ok = true;
        for (double eta : {0.1, 0.3, 0.5, 0.7, 0.9})
            for (double nb : {0.1, 0.5, 1.0, 10.0, 100.0}) {
                const ChannelParams p{eta, nb};
                const CRelBounds b = c_rel_bounds(p);
                const double h = 1e-6;
                const double slope = (holevo_chi(h, p) - holevo_chi(0.0, p)) / h;
                worst = std::max(worst, std::abs(slope - b.upper_chi) / b.upper_chi);
                order_ok = order_ok && b.lower_shotnoise <= b.upper_chi + 1e-15;
            }
        out.push_back({"holevo_slope_grid", worst <= 1e-4 && order_ok,
                       detail::format_max("max rel slope err", worst, 1e-4)});
    }

    // Detection error stays in [0, 1/2] and decreases with displacement.
    {
        const DensityMatrix base = thermal_state(1.0);
        double prev = 0.5;
        bool ok = true;
        for (double a : {0.1, 0.3, 0.6, 1.0}) {
            const DensityMatrix shifted = displaced_thermal_at(Complex(a, 0.0), 1.0, base.dim());
            const double pe = detection_error_min(base, shifted);
            ok = ok && pe >= 0.0 && pe <= 0.5 && pe < prev;
            prev = pe;
        }
        out.push_back({"detection_error_monotone", ok, "pe decreasing in |alpha|, within [0, 1/2]"});
    }

    return out;
}

inline bool all_passed(const std::vector<CheckResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

}  // namespace covert
