#pragma once

// Willie-side mixture states for discrete coherent-state constellations,
// exact per-mode QRE in truncated Fock space, quartic Taylor-coefficient
// extraction and finite-difference verification of the closed-form state
// derivatives at zero displacement.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "covert/errors.hpp"
#include "covert/fock.hpp"
#include "covert/limits.hpp"

namespace covert {

struct Constellation {
    std::vector<Complex> amplitudes;  // Alice-side complex amplitudes
    std::vector<double> priors;

    // {a, ja, -a, -ja}, uniform priors.
    static Constellation qpsk(double a) {
        return Constellation{{Complex(a, 0.0), Complex(0.0, a), Complex(-a, 0.0), Complex(0.0, -a)},
                             {0.25, 0.25, 0.25, 0.25}};
    }

    // {a, -a}, uniform priors.
    static Constellation bpsk(double a) {
        return Constellation{{Complex(a, 0.0), Complex(-a, 0.0)}, {0.5, 0.5}};
    }

    void validate() const {
        if (amplitudes.empty())
            throw std::invalid_argument("Constellation: amplitude list must be nonempty");
        if (priors.size() != amplitudes.size())
            throw std::invalid_argument("Constellation: priors length must match amplitudes");
        double sum = 0.0;
        for (double p : priors) {
            if (p < 0.0) throw std::invalid_argument("Constellation: priors must be >= 0");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("Constellation: priors must sum to 1");
    }

    std::size_t size() const { return amplitudes.size(); }

    // Alice-side mean photon number sum_l p(l) |a_l|^2.
    double mean_photon_alice() const {
        double acc = 0.0;
        for (std::size_t l = 0; l < amplitudes.size(); ++l) acc += priors[l] * std::norm(amplitudes[l]);
        return acc;
    }

    Constellation scaled(double factor) const {
        Constellation c = *this;
        for (auto& a : c.amplitudes) a *= factor;
        return c;
    }
};

// Everything Willie's per-mode state depends on: channel, Alice's
// constellation, the mode-selection fraction tau and the truncation policy.
// Willie sees displacement sqrt(1-eta) * a_l against thermal noise eta*nbar_B.
struct WillieSpec {
    ChannelParams channel;
    Constellation constellation;
    double tau = 1.0;
    TruncationPolicy policy;

    void validate() const {
        channel.validate();
        constellation.validate();
        policy.validate();
        if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("WillieSpec: tau must be in [0, 1]");
    }

    double nT() const { return channel.willie_nT(); }
};

namespace detail {

inline int mixture_dim(double nT, double max_willie_amp, const TruncationPolicy& policy) {
    int dim = thermal_start_dim(nT, max_willie_amp);
    while (thermal_tail(nT, dim) >= policy.target_trace_deficit ||
           !displacement_guard_ok(max_willie_amp, dim)) {
        dim = grow_dim(dim, policy);
        if (dim > policy.max_dim)
            throw truncation_overflow("willie_mixture: required dim exceeds max_dim");
    }
    return dim;
}

// Mixture over Willie-side displacements u_l with weights p_l at a fixed dim:
// (1-tau) rho_T + tau sum_l p_l D(u_l) rho_T D(u_l)^dag.
inline Matrix mixture_entries(const std::vector<Complex>& willie_amps,
                              const std::vector<double>& priors, double tau, double nT, int dim) {
    Matrix acc = (1.0 - tau) * thermal_entries(nT, dim);
    for (std::size_t l = 0; l < willie_amps.size(); ++l) {
        const Matrix d = displacement_operator(willie_amps[l], dim).entries;
        acc += (tau * priors[l]) * (d * thermal_entries(nT, dim) * d.adjoint());
    }
    hermitize(acc);
    return acc;
}

inline std::vector<Complex> willie_amplitudes(const WillieSpec& spec) {
    const double scale = std::sqrt(1.0 - spec.channel.eta);
    std::vector<Complex> out;
    out.reserve(spec.constellation.size());
    for (const auto& a : spec.constellation.amplitudes) out.push_back(scale * a);
    return out;
}

}  // namespace detail

// Willie's per-mode state under transmission:
// (1-tau) rho_thermal(eta nbar_B) + tau sum_l p(l) rho_thermal(eta nbar_B; sqrt(1-eta) a_l).
inline DensityMatrix willie_mixture(const WillieSpec& spec) {
    spec.validate();
    const auto amps = detail::willie_amplitudes(spec);
    double max_amp = 0.0;
    for (const auto& a : amps) max_amp = std::max(max_amp, std::abs(a));
    const int dim = detail::mixture_dim(spec.nT(), max_amp, spec.policy);
    Matrix m = detail::mixture_entries(amps, spec.constellation.priors, spec.tau, spec.nT(), dim);
    const double deficit = std::max(0.0, 1.0 - m.trace().real());
    return DensityMatrix(std::move(m), deficit);
}

// Exact per-mode QRE against the no-transmission thermal state.
inline double exact_qre_per_mode(const WillieSpec& spec) {
    return qre_vs_thermal(willie_mixture(spec), spec.nT());
}

struct QuarticFit {
    double c4;          // fitted limit of D(u)/u^4
    double stderr_est;  // spread of the last two refinements
    int dim_used;
};

// Fits D(u) = c4 u^4 on the small end of a u grid (u is the Willie-side
// displacement magnitude). Assumes the next correction is O(u^6), so a single
// Richardson step on consecutive grid points removes it. The constellation in
// spec_template fixes the phase directions and priors; its amplitudes are
// rescaled so every point sits at Willie-side magnitude u.
inline QuarticFit quartic_coefficient_fit(const WillieSpec& spec_template,
                                          std::vector<double> u_grid) {
    spec_template.validate();
    if (u_grid.size() < 4)
        throw std::invalid_argument("quartic_coefficient_fit: need at least 4 grid points");
    const double nT = spec_template.nT();
    const double lo = 1e-3 * std::sqrt(nT), hi = 0.3 * std::sqrt(nT);
    for (double u : u_grid)
        if (u < lo * (1.0 - 1e-12) || u > hi * (1.0 + 1e-12))
            throw std::invalid_argument("quartic_coefficient_fit: u grid must lie in [1e-3, 0.3]*sqrt(nT)");
    std::sort(u_grid.begin(), u_grid.end(), std::greater<double>());
    for (std::size_t i = 0; i + 1 < u_grid.size(); ++i)
        if (u_grid[i] == u_grid[i + 1])
            throw std::invalid_argument("quartic_coefficient_fit: duplicate u values");

    // Unit phase directions from the template constellation.
    std::vector<Complex> dirs;
    dirs.reserve(spec_template.constellation.size());
    for (const auto& a : spec_template.constellation.amplitudes) {
        const double m = std::abs(a);
        if (!(m > 0.0))
            throw std::invalid_argument("quartic_coefficient_fit: zero-amplitude constellation point");
        dirs.push_back(a / m);
    }

    const int dim = detail::mixture_dim(nT, u_grid.front(), spec_template.policy);
    std::vector<double> ratio;
    ratio.reserve(u_grid.size());
    for (double u : u_grid) {
        std::vector<Complex> amps;
        amps.reserve(dirs.size());
        for (const auto& d : dirs) amps.push_back(u * d);
        Matrix m = detail::mixture_entries(amps, spec_template.constellation.priors,
                                           spec_template.tau, nT, dim);
        const double deficit = std::max(0.0, 1.0 - m.trace().real());
        DensityMatrix rho(std::move(m), deficit);
        ratio.push_back(qre_vs_thermal(rho, nT) / (u * u * u * u));
    }

    // Richardson step on consecutive pairs: with r(u) = c4 + c6 u^2,
    // c4 = (r2 u1^2 - r1 u2^2) / (u1^2 - u2^2) for u1 > u2.
    std::vector<double> refined;
    for (std::size_t i = 0; i + 1 < u_grid.size(); ++i) {
        const double u1 = u_grid[i], u2 = u_grid[i + 1];
        refined.push_back((ratio[i + 1] * u1 * u1 - ratio[i] * u2 * u2) / (u1 * u1 - u2 * u2));
    }
    const std::size_t k = refined.size();
    const double spread_last = std::abs(refined[k - 1] - refined[k - 2]);
    if (k >= 3) {
        const double spread_prev = std::abs(refined[k - 2] - refined[k - 3]);
        if (spread_last > 4.0 * spread_prev && spread_last > 1e-4 * std::abs(refined[k - 1])) {
            std::ostringstream msg;
            msg << "quartic_coefficient_fit: refinement not settling (spread " << spread_last
                << " after " << spread_prev << "); numerical noise dominates - "
                << "use larger u values or a larger truncation dim";
            throw unstable_fit(msg.str());
        }
    }
    return QuarticFit{refined.back(), spread_last, dim};
}

enum class ConstellationKind { qpsk, bpsk };

inline ConstellationKind constellation_kind_from_string(const std::string& s) {
    if (s == "qpsk") return ConstellationKind::qpsk;
    if (s == "bpsk") return ConstellationKind::bpsk;
    throw std::invalid_argument("unknown constellation kind: " + s);
}

namespace detail {

inline Matrix mixture_at_u(ConstellationKind kind, double u, double nT, int dim) {
    if (kind == ConstellationKind::qpsk) {
        const std::vector<Complex> amps{Complex(u, 0), Complex(0, u), Complex(-u, 0), Complex(0, -u)};
        return mixture_entries(amps, {0.25, 0.25, 0.25, 0.25}, 1.0, nT, dim);
    }
    const std::vector<Complex> amps{Complex(u, 0), Complex(-u, 0)};
    return mixture_entries(amps, {0.5, 0.5}, 1.0, nT, dim);
}

// Closed-form derivative of the mixture state at u = 0 from the displaced
// thermal derivative identity. Orders 1 and 3 vanish for both constellations.
inline Matrix closed_form_derivative(ConstellationKind kind, int order, double nT, int dim) {
    const Matrix a = build_annihilation(dim).entries;
    const Matrix ad = a.adjoint();
    const Matrix rho0 = thermal_entries(nT, dim);
    if (order == 1 || order == 3) return Matrix::Zero(dim, dim);
    const Matrix a_rho_ad = a * rho0 * ad;
    if (order == 2) {
        if (kind == ConstellationKind::qpsk)
            return (2.0 / (nT * nT)) * a_rho_ad - (2.0 / nT) * rho0;
        return (1.0 / (nT * nT)) * (a * a * rho0 + 2.0 * a_rho_ad + rho0 * ad * ad) -
               (2.0 / nT) * rho0;
    }
    const double nT2 = nT * nT, nT3 = nT2 * nT, nT4 = nT3 * nT;
    if (kind == ConstellationKind::qpsk) {
        // Only terms with creation/annihilation counts equal mod 4 survive the
        // four-phase average; the a rho a^dag coefficient is -24/nT^3 (the
        // value the quartic trace evaluation relies on).
        return (12.0 / nT2) * rho0 - (24.0 / nT3) * a_rho_ad +
               (1.0 / nT4) * (a * a * a * a * rho0 + 6.0 * (a * a * rho0 * ad * ad) +
                              rho0 * ad * ad * ad * ad);
    }
    const Matrix a2 = a * a * rho0 + 2.0 * a_rho_ad + rho0 * ad * ad;
    const Matrix a4 = a * a * a * a * rho0 + 4.0 * (a * a * a * rho0 * ad) +
                      6.0 * (a * a * rho0 * ad * ad) + 4.0 * (a * rho0 * ad * ad * ad) +
                      rho0 * ad * ad * ad * ad;
    return (12.0 / nT2) * rho0 - (12.0 / nT3) * a2 + (1.0 / nT4) * a4;
}

inline Matrix stencil_derivative(ConstellationKind kind, int order, double nT, int dim, double h) {
    struct Stencil {
        std::vector<double> coeff;  // centered, offsets -(m-1)/2 .. (m-1)/2
        double power;
    };
    Stencil st;
    switch (order) {
        case 1: st = {{1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12}, 1}; break;
        case 2: st = {{-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12}, 2}; break;
        case 3: st = {{-0.5, 1.0, 0.0, -1.0, 0.5}, 3}; break;
        case 4: st = {{-1.0 / 6, 2.0, -13.0 / 2, 28.0 / 3, -13.0 / 2, 2.0, -1.0 / 6}, 4}; break;
        default: throw std::invalid_argument("derivative order must be in 1..4");
    }
    const int half = static_cast<int>(st.coeff.size() / 2);
    Matrix acc = Matrix::Zero(dim, dim);
    for (int i = -half; i <= half; ++i) {
        if (st.coeff[i + half] == 0.0) continue;
        acc += st.coeff[i + half] * mixture_at_u(kind, i * h, nT, dim);
    }
    return acc / std::pow(h, st.power);
}

}  // namespace detail

// Entrywise max residual between the central finite-difference derivative of
// the mixture state at u = 0 and its closed form. The step is re-run at h/2
// and the better of the two residuals is returned, so a run where shrinking h
// makes things worse still reports its best achieved value.
inline double derivative_check(ConstellationKind kind, int order, double nT,
                               const TruncationPolicy& policy = {}) {
    if (order < 1 || order > 4)
        throw std::invalid_argument("derivative_check: order must be in 1..4");
    if (!(nT > 0.0)) throw std::invalid_argument("derivative_check: nT must be > 0");
    policy.validate();
    const double h0 = (order <= 3 ? 1e-2 : 5e-2) * std::sqrt(nT);
    const int half_width = order == 4 ? 3 : 2;
    const int dim = detail::mixture_dim(nT, half_width * h0, policy);
    const Matrix closed = detail::closed_form_derivative(kind, order, nT, dim);
    double best = std::numeric_limits<double>::infinity();
    for (double h : {h0, 0.5 * h0}) {
        const Matrix fd = detail::stencil_derivative(kind, order, nT, dim, h);
        best = std::min(best, (fd - closed).cwiseAbs().maxCoeff());
    }
    return best;
}

// Bisects the per-point amplitude |a| of the template constellation until the
// exact per-mode QRE equals delta_qre / n.
inline double amplitude_for_budget(const WillieSpec& spec_template, double delta_qre,
                                   std::uint64_t n) {
    spec_template.validate();
    if (!(delta_qre > 0.0)) throw std::invalid_argument("amplitude_for_budget: delta_qre must be > 0");
    if (n < 1) throw std::invalid_argument("amplitude_for_budget: n must be >= 1");
    const double target = delta_qre / static_cast<double>(n);
    const double nT = spec_template.nT();

    // Leading-order guess for the bracket top, then grow until it covers.
    const double tau = spec_template.tau;
    const double lead = std::sqrt(2.0 * nT * (1.0 + nT) * target) /
                        ((1.0 - spec_template.channel.eta) * std::max(tau, 1e-12));
    double a_hi = 3.0 * std::sqrt(lead);

    std::vector<Complex> dirs;
    for (const auto& a : spec_template.constellation.amplitudes) {
        const double m = std::abs(a);
        if (!(m > 0.0))
            throw std::invalid_argument("amplitude_for_budget: zero-amplitude constellation point");
        dirs.push_back(a / m);
    }
    const double willie_scale = std::sqrt(1.0 - spec_template.channel.eta);
    const auto qre_at = [&](double amp, int dim) {
        std::vector<Complex> amps;
        for (const auto& d : dirs) amps.push_back(willie_scale * amp * d);
        Matrix m = detail::mixture_entries(amps, spec_template.constellation.priors,
                                           spec_template.tau, nT, dim);
        const double deficit = std::max(0.0, 1.0 - m.trace().real());
        DensityMatrix rho(std::move(m), deficit);
        return qre_vs_thermal(rho, nT);
    };

    int dim = detail::mixture_dim(nT, willie_scale * a_hi, spec_template.policy);
    double f_hi = qre_at(a_hi, dim);
    int grow = 0;
    while (f_hi < target) {
        a_hi *= 2.0;
        if (++grow > 40) {
            std::ostringstream msg;
            msg << "amplitude_for_budget: cannot bracket target " << target << "; f(" << a_hi
                << ") = " << f_hi;
            throw invalid_bracket(msg.str());
        }
        dim = detail::mixture_dim(nT, willie_scale * a_hi, spec_template.policy);
        f_hi = qre_at(a_hi, dim);
    }

    double lo = 0.0, hi = a_hi;
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double f = qre_at(mid, dim);
        if (std::abs(f - target) <= 1e-12 + 1e-10 * target) return mid;
        (f < target ? lo : hi) = mid;
    }
    return mid;
}

}  // namespace covert
