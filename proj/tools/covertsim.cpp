// covertsim: budgets, QRE sweeps, Taylor-coefficient fits, Monte Carlo link
// simulation and an invariant self-check for covert communication over the
// lossy thermal-noise bosonic channel.
//
// Output: stdout carries the requested document (CSV with 6 significant
// digits, JSON at full double precision with a schema_version field); stderr
// carries diagnostics. Exit codes: 0 success, 1 selfcheck failure, 2 usage,
// 3 numerical instability, 4 configuration rejected.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "covert/constellation.hpp"
#include "covert/errors.hpp"
#include "covert/fock.hpp"
#include "covert/limits.hpp"
#include "covert/linksim.hpp"
#include "covert/selfcheck.hpp"

namespace {

constexpr double kLn2 = 0.6931471805599453;

std::string sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.5e", v);
    return buf;
}

void emit(std::string doc, const std::string& output_path) {
    if (!doc.empty() && doc.back() != '\n') doc += '\n';
    if (output_path.empty()) {
        std::cout << doc;
        return;
    }
    std::ofstream f(output_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file: " + output_path);
    f << doc;
}

struct CommonFlags {
    std::string format = "csv";
    std::string output;
};

void add_common(CLI::App* cmd, CommonFlags& c, const std::string& default_format) {
    c.format = default_format;
    cmd->add_option("--format", c.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    cmd->add_option("--output", c.output, "write the document to a file instead of stdout");
}

covert::Constellation preset(const std::string& name) {
    if (name == "qpsk") return covert::Constellation::qpsk(1.0);
    if (name == "bpsk") return covert::Constellation::bpsk(1.0);
    throw CLI::ValidationError("--constellation", "must be qpsk or bpsk");
}

// ---------------------------------------------------------------------------

int cmd_budget(double eta, double nbar_b, double delta_qre, std::uint64_t n, double nbar_s_op,
               const CommonFlags& flags) {
    const covert::ChannelParams p{eta, nbar_b};
    const covert::CovertBudget budget = covert::covert_budget_nS(p, n, delta_qre);
    const covert::CRelBounds rel = covert::c_rel_bounds(p);
    const double ccov = covert::c_cov(p);
    const double delta = std::sqrt(delta_qre);
    const double m_shot_bits = covert::srl_throughput_bits(n, delta, ccov, rel.lower_shotnoise);
    const double m_chi_bits = covert::srl_throughput_bits(n, delta, ccov, rel.upper_chi);

    std::vector<std::pair<std::string, double>> fields = {
        {"c_cov", ccov},
        {"nbar_s_budget", budget.nbar_S},
        {"delta_p", budget.delta_p},
        {"c_rel_lower_paper_nats", rel.lower_paper},
        {"c_rel_lower_shotnoise_nats", rel.lower_shotnoise},
        {"c_rel_upper_chi_nats", rel.upper_chi},
        {"m_shotnoise_nats", m_shot_bits * kLn2},
        {"m_shotnoise_bits", m_shot_bits},
        {"m_chi_nats", m_chi_bits * kLn2},
        {"m_chi_bits", m_chi_bits},
    };
    if (nbar_s_op > 0.0) {
        fields.emplace_back("tau_at_nbar_s", covert::sparsification_tau(nbar_s_op, p, delta_qre, n));
    }

    if (flags.format == "json") {
        nlohmann::json j{{"schema_version", covert::kSchemaVersion}};
        for (const auto& [k, v] : fields) j[k] = v;
        emit(j.dump(2), flags.output);
    } else {
        std::string doc = "field,value\n";
        for (const auto& [k, v] : fields) doc += k + "," + sci(v) + "\n";
        emit(doc, flags.output);
    }
    return 0;
}

int cmd_qre_sweep(const std::string& constellation, double eta, double nbar_b, double u_min,
                  double u_max, int points, double tau, const CommonFlags& flags) {
    const covert::ChannelParams p{eta, nbar_b};
    const covert::Constellation shape = preset(constellation);
    struct Row {
        double u, exact, leading, ratio;
        int dim;
    };
    std::vector<Row> rows;
    const double willie_scale = std::sqrt(1.0 - eta);
    for (int i = 0; i < points; ++i) {
        const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
        const double u = u_max * std::pow(u_min / u_max, f);  // descending, log-spaced
        const double nbar_s = u * u / (1.0 - eta);
        covert::WillieSpec spec{p, shape.scaled(u / willie_scale), tau, covert::TruncationPolicy{}};
        const covert::DensityMatrix mix = covert::willie_mixture(spec);
        const double exact = covert::qre_vs_thermal(mix, p.willie_nT());
        const double leading = tau * tau *
                               (constellation == "qpsk" ? covert::qpsk_qre_leading(nbar_s, p)
                                                        : covert::bpsk_qre_leading(nbar_s, p));
        rows.push_back(Row{u, exact, leading, leading > 0.0 ? exact / leading : 0.0, mix.dim()});
    }
    if (flags.format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows)
            arr.push_back({{"u", r.u},
                           {"qre_exact_nats", r.exact},
                           {"qre_leading_nats", r.leading},
                           {"ratio", r.ratio},
                           {"dim_used", r.dim}});
        nlohmann::json j{{"schema_version", covert::kSchemaVersion}, {"rows", std::move(arr)}};
        emit(j.dump(2), flags.output);
    } else {
        std::string doc = "u,qre_exact_nats,qre_leading_nats,ratio,dim_used\n";
        for (const auto& r : rows)
            doc += sci(r.u) + "," + sci(r.exact) + "," + sci(r.leading) + "," + sci(r.ratio) + "," +
                   std::to_string(r.dim) + "\n";
        emit(doc, flags.output);
    }
    return 0;
}

int cmd_fit_coeff(const std::string& constellation, double nt, double tau,
                  const CommonFlags& flags) {
    // The fit depends on the channel only through nT = eta nbar_B.
    const covert::ChannelParams p{0.5, 2.0 * nt};
    covert::WillieSpec spec{p, preset(constellation), tau, covert::TruncationPolicy{}};
    std::vector<double> grid;
    for (double s : {0.20, 0.14, 0.10, 0.07, 0.05}) grid.push_back(s * std::sqrt(nt));
    const covert::QuarticFit fit = covert::quartic_coefficient_fit(spec, grid);
    const double closed =
        tau * tau *
        (constellation == "qpsk" ? 1.0 / (2.0 * nt * (1.0 + nt))
                                 : 1.0 / (2.0 * nt * (1.0 + nt)) + std::log1p(1.0 / nt) / (1.0 + 2.0 * nt));
    nlohmann::json j{{"schema_version", covert::kSchemaVersion},
                     {"constellation", constellation},
                     {"nt", nt},
                     {"tau", tau},
                     {"c4_nats", fit.c4},
                     {"stderr_nats", fit.stderr_est},
                     {"dim_used", fit.dim_used},
                     {"closed_form_nats", closed},
                     {"rel_error", std::abs(fit.c4 - closed) / closed}};
    if (flags.format == "json") {
        emit(j.dump(2), flags.output);
    } else {
        std::string doc = "field,value\n";
        doc += "c4_nats," + sci(fit.c4) + "\n";
        doc += "stderr_nats," + sci(fit.stderr_est) + "\n";
        doc += "dim_used," + std::to_string(fit.dim_used) + "\n";
        doc += "closed_form_nats," + sci(closed) + "\n";
        emit(doc, flags.output);
    }
    return 0;
}

covert::SimConfig config_from_flags(const std::string& config_path, double eta, double nbar_b,
                                    std::uint64_t n, double delta_qre, double nbar_s,
                                    const std::string& constellation, std::uint32_t trials,
                                    std::uint64_t seed) {
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) throw std::runtime_error("cannot open config file: " + config_path);
        nlohmann::json j;
        f >> j;
        return covert::sim_config_from_json(j);
    }
    covert::SimConfig cfg;
    cfg.channel = covert::ChannelParams{eta, nbar_b};
    cfg.n_modes = n;
    cfg.delta_qre = delta_qre;
    cfg.constellation = preset(constellation);
    cfg.nbar_S_per_selected_mode = nbar_s;
    cfg.trials = trials;
    cfg.master_seed = seed;
    cfg.validate();
    return cfg;
}

int cmd_simulate(const covert::SimConfig& cfg, const CommonFlags& flags) {
    const covert::ExperimentResult res = covert::run_experiment(cfg);
    nlohmann::json j = covert::to_json(res);
    j["config"] = covert::to_json(cfg);
    if (flags.format == "csv") {
        std::string doc =
            "n,tau,e_selected,ser,mi_nats,m_bits,willie_min_pe,willie_pe_stderr\n";
        doc += std::to_string(res.n_modes) + "," + sci(res.tau) + "," + sci(res.expected_selected) +
               "," + sci(res.ser) + "," + sci(res.mi_nats) + "," + sci(res.m_bits) + "," +
               sci(res.willie_min_pe) + "," + sci(res.willie_min_pe_stderr) + "\n";
        emit(doc, flags.output);
    } else {
        emit(j.dump(2), flags.output);
    }
    return 0;
}

int cmd_scaling(const covert::SimConfig& base, const std::vector<std::uint64_t>& n_grid,
                const CommonFlags& flags) {
    const auto rows = covert::srl_scaling_sweep(base, n_grid);
    const double slope = covert::scaling_loglog_slope(rows);
    if (flags.format == "csv") {
        emit(covert::scaling_rows_csv(rows), flags.output);
        std::cerr << "slope_loglog = " << slope << "\n";
    } else {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows)
            arr.push_back({{"n", r.n},
                           {"tau", r.tau},
                           {"e_selected", r.e_selected},
                           {"ser", r.ser},
                           {"mi_nats", r.mi_nats},
                           {"m_bits", r.m_bits},
                           {"willie_min_pe", r.willie_min_pe},
                           {"willie_pe_stderr", r.willie_pe_stderr}});
        nlohmann::json j{{"schema_version", covert::kSchemaVersion},
                         {"rows", std::move(arr)},
                         {"slope_loglog", slope}};
        emit(j.dump(2), flags.output);
    }
    return 0;
}

int cmd_selfcheck(const std::string& format, const std::string& output) {
    const auto results = covert::run_selfcheck();
    if (format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : results)
            arr.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
        nlohmann::json j{{"schema_version", covert::kSchemaVersion},
                         {"checks", std::move(arr)},
                         {"all_passed", covert::all_passed(results)}};
        emit(j.dump(2), output);
    } else if (format == "csv") {
        std::string doc = "name,pass,detail\n";
        for (const auto& r : results)
            doc += r.name + "," + (r.pass ? "1" : "0") + ",\"" + r.detail + "\"\n";
        emit(doc, output);
    } else {
        std::string doc;
        for (const auto& r : results)
            doc += std::string(r.pass ? "[PASS] " : "[FAIL] ") + r.name + "  (" + r.detail + ")\n";
        emit(doc, output);
    }
    if (!covert::all_passed(results)) {
        std::cerr << "selfcheck: failures detected\n";
        return 1;
    }
    return 0;
}

std::vector<std::uint64_t> parse_n_grid(const std::string& csv) {
    std::vector<std::uint64_t> grid;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        const double v = std::stod(tok);  // accepts 1e5-style values
        if (v < 1.0 || v != std::floor(v))
            throw CLI::ValidationError("--n", "grid entries must be positive integers");
        grid.push_back(static_cast<std::uint64_t>(v));
    }
    if (grid.empty()) throw CLI::ValidationError("--n", "grid must be nonempty");
    return grid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"covert-communication limits and link simulator"};
    app.require_subcommand(1);

    // budget
    auto* budget = app.add_subcommand("budget", "covertness budget and throughput constants");
    double b_eta = 0, b_nb = 0, b_dq = 0, b_ns = 0;
    std::uint64_t b_n = 0;
    CommonFlags b_flags;
    budget->add_option("--eta", b_eta, "transmissivity")->required()->check(CLI::Range(1e-12, 1.0));
    budget->add_option("--nbar-b", b_nb, "environment mean photon number")
        ->required()
        ->check(CLI::PositiveNumber);
    budget->add_option("--delta-qre", b_dq, "QRE covertness budget")
        ->required()
        ->check(CLI::NonNegativeNumber);
    budget->add_option("--n", b_n, "number of modes")->required()->check(CLI::PositiveNumber);
    budget->add_option("--nbar-s", b_ns, "operating per-mode photon number (reports tau)")
        ->check(CLI::PositiveNumber);
    add_common(budget, b_flags, "csv");

    // qre-sweep
    auto* sweep = app.add_subcommand("qre-sweep", "exact vs leading-order per-mode QRE");
    std::string s_const = "qpsk";
    double s_eta = 0, s_nb = 0, s_umin = 0, s_umax = 0, s_tau = 1.0;
    int s_points = 0;
    CommonFlags s_flags;
    sweep->add_option("--constellation", s_const)->check(CLI::IsMember({"qpsk", "bpsk"}));
    sweep->add_option("--eta", s_eta)->required()->check(CLI::Range(1e-12, 1.0));
    sweep->add_option("--nbar-b", s_nb)->required()->check(CLI::PositiveNumber);
    sweep->add_option("--u-min", s_umin, "smallest Willie-side displacement")
        ->required()
        ->check(CLI::PositiveNumber);
    sweep->add_option("--u-max", s_umax, "largest Willie-side displacement")
        ->required()
        ->check(CLI::PositiveNumber);
    sweep->add_option("--points", s_points, "grid size (log-spaced)")
        ->required()
        ->check(CLI::PositiveNumber);
    sweep->add_option("--tau", s_tau, "sparsification fraction")->check(CLI::Range(0.0, 1.0));
    add_common(sweep, s_flags, "csv");

    // fit-coeff
    auto* fit = app.add_subcommand("fit-coeff", "quartic QRE Taylor coefficient");
    std::string f_const = "qpsk";
    double f_nt = 0, f_tau = 1.0;
    CommonFlags f_flags;
    fit->add_option("--constellation", f_const)->check(CLI::IsMember({"qpsk", "bpsk"}));
    fit->add_option("--nt", f_nt, "Willie-side thermal mean eta*nbar_B")
        ->required()
        ->check(CLI::PositiveNumber);
    fit->add_option("--tau", f_tau, "sparsification fraction")->check(CLI::Range(0.0, 1.0));
    add_common(fit, f_flags, "json");

    // simulate / scaling share flag structure
    auto add_sim_flags = [](CLI::App* cmd, std::string& config_path, double& eta, double& nb,
                            double& dq, double& ns, std::string& cons, std::uint32_t& trials,
                            std::uint64_t& seed) {
        cmd->add_option("--config", config_path, "SimConfig JSON document (overrides other flags)");
        cmd->add_option("--eta", eta)->check(CLI::Range(1e-12, 1.0));
        cmd->add_option("--nbar-b", nb)->check(CLI::PositiveNumber);
        cmd->add_option("--delta-qre", dq)->check(CLI::PositiveNumber);
        cmd->add_option("--nbar-s", ns, "per selected mode photon number")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--constellation", cons)->check(CLI::IsMember({"qpsk", "bpsk"}));
        cmd->add_option("--trials", trials)->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "master seed (bit-reproducible)");
    };

    auto* sim = app.add_subcommand("simulate", "Monte Carlo link experiment");
    std::string m_config;
    double m_eta = 0.5, m_nb = 1.0, m_dq = 0.01, m_ns = 0.0;
    std::string m_const = "qpsk";
    std::uint32_t m_trials = 100;
    std::uint64_t m_seed = 1, m_n = 0;
    CommonFlags m_flags;
    sim->add_option("--n", m_n, "number of modes")->check(CLI::PositiveNumber);
    add_sim_flags(sim, m_config, m_eta, m_nb, m_dq, m_ns, m_const, m_trials, m_seed);
    add_common(sim, m_flags, "json");

    auto* scal = app.add_subcommand("scaling", "square-root-law scaling sweep");
    std::string c_config, c_ngrid;
    double c_eta = 0.5, c_nb = 1.0, c_dq = 0.04, c_ns = 0.0;
    std::string c_const = "qpsk";
    std::uint32_t c_trials = 100;
    std::uint64_t c_seed = 1;
    CommonFlags c_flags;
    scal->add_option("--n", c_ngrid, "ascending comma-separated mode counts, e.g. 1e4,1e5,1e6")
        ->required();
    add_sim_flags(scal, c_config, c_eta, c_nb, c_dq, c_ns, c_const, c_trials, c_seed);
    add_common(scal, c_flags, "json");

    // selfcheck
    auto* check = app.add_subcommand("selfcheck", "run the invariant suite");
    std::string k_format = "text", k_output;
    check->add_option("--format", k_format)->check(CLI::IsMember({"text", "json", "csv"}));
    check->add_option("--output", k_output);

    try {
        app.parse(argc, argv);

        if (budget->parsed()) return cmd_budget(b_eta, b_nb, b_dq, b_n, b_ns, b_flags);
        if (sweep->parsed()) {
            if (!(s_umin < s_umax))
                throw CLI::ValidationError("--u-min/--u-max", "need u_min < u_max");
            return cmd_qre_sweep(s_const, s_eta, s_nb, s_umin, s_umax, s_points, s_tau, s_flags);
        }
        if (fit->parsed()) return cmd_fit_coeff(f_const, f_nt, f_tau, f_flags);
        if (sim->parsed()) {
            if (m_config.empty() && (m_n == 0 || m_ns <= 0.0))
                throw CLI::ValidationError("simulate", "--n and --nbar-s required without --config");
            const covert::SimConfig cfg = config_from_flags(m_config, m_eta, m_nb, m_n, m_dq, m_ns,
                                                            m_const, m_trials, m_seed);
            return cmd_simulate(cfg, m_flags);
        }
        if (scal->parsed()) {
            const auto grid = parse_n_grid(c_ngrid);
            covert::SimConfig base = config_from_flags(c_config, c_eta, c_nb, grid.front(), c_dq,
                                                       c_ns, c_const, c_trials, c_seed);
            return cmd_scaling(base, grid, c_flags);
        }
        if (check->parsed()) return cmd_selfcheck(k_format, k_output);
        return 2;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const covert::config_rejected& e) {
        std::cerr << "configuration rejected: " << e.what() << "\n";
        return 4;
    } catch (const covert::unstable_fit& e) {
        std::cerr << "numerical instability: " << e.what() << "\n";
        return 3;
    } catch (const covert::truncation_overflow& e) {
        std::cerr << "numerical instability: " << e.what() << "\n";
        return 3;
    } catch (const covert::invalid_bracket& e) {
        std::cerr << "numerical instability: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
