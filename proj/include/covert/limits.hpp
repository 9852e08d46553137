#pragma once

// Closed-form square-root-law constants and budgets for the lossy thermal
// noise bosonic channel: covertness constant, per-mode photon budgets,
// converse bounds, leading-order constellation QRE, sparsification fraction
// and reliability constants. All divergences are in nats; conversion to bits
// happens once, at the reporting boundary.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace covert {

struct ChannelParams {
    double eta;     // transmissivity, strictly inside (0, 1)
    double nbar_B;  // environment mean photon number per mode, > 0

    void validate() const {
        if (!(eta > 0.0) || !(eta < 1.0))
            throw std::invalid_argument("ChannelParams: eta must be in (0, 1)");
        if (!(nbar_B > 0.0))
            throw std::invalid_argument("ChannelParams: nbar_B must be > 0");
    }

    double willie_nT() const { return eta * nbar_B; }  // thermal mean seen by Willie
};

struct CovertBudget {
    double delta_qre;
    std::uint64_t n_modes;
    double nbar_S;   // per-mode mean photon budget
    double delta_p;  // detection-error covertness level, sqrt(delta_qre / 2)
};

struct CRelBounds {
    double lower_paper;      // eta / ((1-eta) nbar_B), no shot-noise term
    double lower_shotnoise;  // eta / ((1-eta) nbar_B + 1), heterodyne incl. vacuum noise
    double upper_chi;        // eta ln(1 + 1/((1-eta) nbar_B)), Holevo first-order term
};

// Entropy of a thermal state with mean photon number x, in nats.
inline double g_nats(double x) {
    if (!(x > 0.0)) return 0.0;
    return (1.0 + x) * std::log1p(x) - x * std::log(x);
}

// Covertness constant: sqrt(2 eta nbar_B (1 + eta nbar_B)) / (1 - eta).
inline double c_cov(const ChannelParams& p) {
    p.validate();
    const double nT = p.willie_nT();
    return std::sqrt(2.0 * nT * (1.0 + nT)) / (1.0 - p.eta);
}

// Per-mode photon budget n̄_S = c_cov sqrt(delta_qre / n).
inline CovertBudget covert_budget_nS(const ChannelParams& p, std::uint64_t n, double delta_qre) {
    p.validate();
    if (n < 1) throw std::invalid_argument("covert_budget_nS: n must be >= 1");
    if (delta_qre < 0.0) throw std::invalid_argument("covert_budget_nS: delta_qre must be >= 0");
    CovertBudget b;
    b.delta_qre = delta_qre;
    b.n_modes = n;
    b.nbar_S = c_cov(p) * std::sqrt(delta_qre / static_cast<double>(n));
    b.delta_p = std::sqrt(delta_qre / 2.0);
    return b;
}

// Exact converse lower bound on the n-mode QRE at mean photon number nbar_S:
// n [ (A+T) ln(1 + A/T) - (1+A+T) ln(1 + A/(1+T)) ] with A = (1-eta) nbar_S,
// T = eta nbar_B.
inline double converse_qre_lower_exact(double nbar_S, const ChannelParams& p, std::uint64_t n) {
    p.validate();
    if (nbar_S < 0.0) throw std::invalid_argument("converse_qre_lower_exact: nbar_S must be >= 0");
    const double A = (1.0 - p.eta) * nbar_S;
    const double T = p.willie_nT();
    const double val = (A + T) * std::log1p(A / T) - (1.0 + A + T) * std::log1p(A / (1.0 + T));
    return static_cast<double>(n) * val;
}

// Leading-order term of the converse: n (1-eta)^2 nbar_S^2 / (2 eta nbar_B (1 + eta nbar_B)).
inline double converse_qre_leading(double nbar_S, const ChannelParams& p, std::uint64_t n) {
    p.validate();
    if (nbar_S < 0.0) throw std::invalid_argument("converse_qre_leading: nbar_S must be >= 0");
    const double T = p.willie_nT();
    const double A = (1.0 - p.eta) * nbar_S;
    return static_cast<double>(n) * A * A / (2.0 * T * (1.0 + T));
}

// Leading-order per-mode QRE of uniform QPSK at per-mode photon number nbar_S;
// coincides with the converse leading term at n = 1 (QPSK is optimal).
inline double qpsk_qre_leading(double nbar_S, const ChannelParams& p) {
    return converse_qre_leading(nbar_S, p, 1);
}

// Leading-order per-mode QRE of uniform BPSK; strictly above QPSK for nbar_S > 0.
inline double bpsk_qre_leading(double nbar_S, const ChannelParams& p) {
    p.validate();
    if (nbar_S < 0.0) throw std::invalid_argument("bpsk_qre_leading: nbar_S must be >= 0");
    const double T = p.willie_nT();
    const double A = (1.0 - p.eta) * nbar_S;
    return A * A * (1.0 / (2.0 * T * (1.0 + T)) + std::log1p(1.0 / T) / (1.0 + 2.0 * T));
}

// QPSK thinned by keeping each mode with probability tau: the quartic
// coefficient scales by tau^2.
inline double sparsified_qre_leading(double nbar_S, double tau, const ChannelParams& p) {
    if (tau < 0.0 || tau > 1.0)
        throw std::invalid_argument("sparsified_qre_leading: tau must be in [0, 1]");
    return tau * tau * qpsk_qre_leading(nbar_S, p);
}

// Mode-selection probability that meets the budget at a fixed per-mode
// nbar_S. Values > 1 are returned as-is: they signal that nbar_S is already
// below the covert budget and no sparsification is needed; callers decide
// whether to clamp or reject.
inline double sparsification_tau(double nbar_S, const ChannelParams& p, double delta_qre,
                                 std::uint64_t n) {
    p.validate();
    if (!(nbar_S > 0.0)) throw std::invalid_argument("sparsification_tau: nbar_S must be > 0");
    if (delta_qre < 0.0) throw std::invalid_argument("sparsification_tau: delta_qre must be >= 0");
    if (n < 1) throw std::invalid_argument("sparsification_tau: n must be >= 1");
    const double T = p.willie_nT();
    return std::sqrt(2.0 * T * (1.0 + T)) / ((1.0 - p.eta) * nbar_S) *
           std::sqrt(delta_qre / static_cast<double>(n));
}

inline CRelBounds c_rel_bounds(const ChannelParams& p) {
    p.validate();
    const double env = (1.0 - p.eta) * p.nbar_B;
    return CRelBounds{p.eta / env, p.eta / (env + 1.0), p.eta * std::log1p(1.0 / env)};
}

// Holevo capacity of the lossy thermal-noise channel at mean input photon
// number nbar_S: g(eta nbar_S + (1-eta) nbar_B) - g((1-eta) nbar_B), nats/mode.
inline double holevo_chi(double nbar_S, const ChannelParams& p) {
    p.validate();
    if (nbar_S < 0.0) throw std::invalid_argument("holevo_chi: nbar_S must be >= 0");
    const double env = (1.0 - p.eta) * p.nbar_B;
    return g_nats(p.eta * nbar_S + env) - g_nats(env);
}

// Square-root-law throughput sqrt(n) delta c_cov c_rel, converted to bits here
// (the single nats->bits conversion point).
inline double srl_throughput_bits(std::uint64_t n, double delta, double c_cov_val, double c_rel_val) {
    if (delta < 0.0 || c_cov_val < 0.0 || c_rel_val < 0.0)
        throw std::invalid_argument("srl_throughput_bits: arguments must be >= 0");
    const double nats = std::sqrt(static_cast<double>(n)) * delta * c_cov_val * c_rel_val;
    return nats / std::log(2.0);
}

// Lower bound on any detector's error probability implied by a total QRE
// budget: 1/2 - sqrt(2 delta)/4, clamped to [0, 1/2].
inline double pinsker_pe_floor(double delta_qre_total) {
    if (delta_qre_total < 0.0)
        throw std::invalid_argument("pinsker_pe_floor: delta_qre_total must be >= 0");
    const double pe = 0.5 - 0.25 * std::sqrt(2.0 * delta_qre_total);
    return pe < 0.0 ? 0.0 : (pe > 0.5 ? 0.5 : pe);
}

}  // namespace covert
