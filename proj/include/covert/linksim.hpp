#pragma once

// Seeded Monte Carlo simulation of the covert link: secret-key symbol
// scrambling, sparsified transmission over randomly selected modes, Bob's
// heterodyne receiver with nearest-neighbor decoding, and Willie's
// total-photon-count radiometer. Per-mode photon statistics are sampled from
// the Glauber representation (Gaussian intensity, then Poisson); aggregate
// counts over many thermal modes use the equivalent Gamma-Poisson form so a
// trial costs O(|selected|) instead of O(n).

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "covert/constellation.hpp"
#include "covert/errors.hpp"
#include "covert/limits.hpp"

namespace covert {

// ---------------------------------------------------------------------------
// Random stream derivation

enum class StreamRole : std::uint64_t {
    alice_key = 1,
    mode_select = 2,
    channel_noise = 3,
    willie_noise = 4,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic substream: same (seed, trial, role) always yields the same
// engine state; differing any component changes it.
inline std::mt19937_64 derive_stream(std::uint64_t master_seed, std::uint64_t trial_index,
                                     StreamRole role) {
    std::uint64_t s = splitmix64(master_seed);
    s = splitmix64(s ^ (0xa0761d6478bd642fULL + trial_index));
    s = splitmix64(s ^ (0xe7037ed1a0b428dbULL * static_cast<std::uint64_t>(role)));
    return std::mt19937_64(s);
}

// ---------------------------------------------------------------------------
// Protocol primitives

inline std::vector<int> gen_secret_sequence(std::size_t n, int L, std::mt19937_64& g) {
    if (L < 2) throw std::invalid_argument("gen_secret_sequence: L must be >= 2");
    std::uniform_int_distribution<int> d(0, L - 1);
    std::vector<int> out(n);
    for (auto& v : out) v = d(g);
    return out;
}

inline std::vector<int> encode(const std::vector<int>& codeword, const std::vector<int>& secret,
                               int L) {
    if (codeword.size() != secret.size())
        throw std::invalid_argument("encode: codeword and secret lengths differ");
    std::vector<int> out(codeword.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (codeword[i] + secret[i]) % L;
    return out;
}

inline std::vector<int> decode_with_secret(const std::vector<int>& received,
                                           const std::vector<int>& secret, int L) {
    if (received.size() != secret.size())
        throw std::invalid_argument("decode_with_secret: lengths differ");
    std::vector<int> out(received.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = ((received[i] - secret[i]) % L + L) % L;
    return out;
}

// Each index is kept independently with probability tau. Sampled with
// geometric gaps so the cost is O(tau * n).
inline std::vector<std::uint64_t> select_modes(std::uint64_t n, double tau, std::mt19937_64& g) {
    if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("select_modes: tau must be in [0, 1]");
    std::vector<std::uint64_t> out;
    if (tau == 0.0 || n == 0) return out;
    if (tau == 1.0) {
        out.resize(n);
        for (std::uint64_t i = 0; i < n; ++i) out[i] = i;
        return out;
    }
    std::geometric_distribution<std::uint64_t> gap(tau);
    std::uint64_t idx = gap(g);
    while (idx < n) {
        out.push_back(idx);
        idx += 1 + gap(g);
    }
    return out;
}

// Heterodyne outcome sqrt(eta) * amplitude + z with z circularly symmetric
// complex Gaussian, E|z|^2 = (1-eta) nbar_B + 1. The +1 is the vacuum (shot)
// contribution of heterodyne detection.
inline Complex bob_heterodyne_sample(Complex amplitude, const ChannelParams& ch,
                                     std::mt19937_64& g) {
    ch.validate();
    const double var_total = (1.0 - ch.eta) * ch.nbar_B + 1.0;
    std::normal_distribution<double> quad(0.0, std::sqrt(0.5 * var_total));
    const double re = quad(g), im = quad(g);
    return std::sqrt(ch.eta) * amplitude + Complex(re, im);
}

// Nearest-neighbor index. Exact ties are broken by nudging the sample with a
// fixed pseudo-random perturbation derived from its bit pattern, then taking
// the lowest index among any remaining minima.
inline int bob_ml_decode(Complex sample, const std::vector<Complex>& constellation_scaled) {
    if (constellation_scaled.empty())
        throw std::invalid_argument("bob_ml_decode: empty constellation");
    const auto nearest = [&](Complex s) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        int ties = 0;
        for (int i = 0; i < static_cast<int>(constellation_scaled.size()); ++i) {
            const double d = std::norm(s - constellation_scaled[i]);
            if (d < best_d) {
                best_d = d;
                best = i;
                ties = 1;
            } else if (d == best_d) {
                ++ties;
            }
        }
        return std::pair<int, int>(best, ties);
    };
    auto [idx, ties] = nearest(sample);
    if (ties <= 1) return idx;
    const std::uint64_t h = splitmix64(std::bit_cast<std::uint64_t>(sample.real()) ^
                                       splitmix64(std::bit_cast<std::uint64_t>(sample.imag())));
    const double phi = 2.0 * M_PI * (static_cast<double>(h >> 11) * 0x1.0p-53);
    const double eps = 1e-9 * (1.0 + std::abs(sample));
    return nearest(sample + eps * Complex(std::cos(phi), std::sin(phi))).first;
}

namespace detail {

inline long long poisson_count(double mean, std::mt19937_64& g) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<long long> d(mean);
    return d(g);
}

// Total intensity sum_{i=1..k} |u + w_i|^2 for k modes at common displacement
// magnitude u, w_i circularly symmetric with E|w|^2 = nT. Distributed as
// (nT/2) * noncentral-chi^2(2k, 2k u^2 / nT).
inline double displaced_intensity_total(std::uint64_t k, double u_abs, double nT,
                                        std::mt19937_64& g) {
    if (k == 0) return 0.0;
    if (nT <= 0.0) return static_cast<double>(k) * u_abs * u_abs;
    const double lambda = 2.0 * static_cast<double>(k) * u_abs * u_abs / nT;
    std::normal_distribution<double> z(0.0, 1.0);
    const double zc = z(g) + std::sqrt(lambda);
    double chi = zc * zc;
    const double dof_rest = 2.0 * static_cast<double>(k) - 1.0;
    if (dof_rest > 0.0) {
        std::gamma_distribution<double> rest(0.5 * dof_rest, 2.0);
        chi += rest(g);
    }
    return 0.5 * nT * chi;
}

// Total intensity of k independent thermal modes: Gamma(k, nT).
inline double thermal_intensity_total(std::uint64_t k, double nT, std::mt19937_64& g) {
    if (k == 0 || nT <= 0.0) return 0.0;
    std::gamma_distribution<double> d(static_cast<double>(k), nT);
    return d(g);
}

}  // namespace detail

// Photon count of one displaced thermal mode, sampled through the Glauber
// representation: beta ~ CN(amplitude, nT), then count ~ Poisson(|beta|^2).
inline long long willie_photon_sample(Complex amplitude_willie_side, double nT,
                                      std::mt19937_64& g) {
    if (nT < 0.0) throw std::invalid_argument("willie_photon_sample: nT must be >= 0");
    double intensity;
    if (nT == 0.0) {
        intensity = std::norm(amplitude_willie_side);
    } else {
        std::normal_distribution<double> quad(0.0, std::sqrt(0.5 * nT));
        const Complex beta = amplitude_willie_side + Complex(quad(g), quad(g));
        intensity = std::norm(beta);
    }
    return detail::poisson_count(intensity, g);
}

// ---------------------------------------------------------------------------
// Experiment configuration and results

struct SimConfig {
    ChannelParams channel;
    std::uint64_t n_modes = 0;
    double delta_qre = 0.0;
    Constellation constellation;  // shape; rescaled to nbar_S_per_selected_mode
    double nbar_S_per_selected_mode = 0.0;
    std::uint32_t trials = 0;
    std::uint64_t master_seed = 0;

    double tau() const {
        return sparsification_tau(nbar_S_per_selected_mode, channel, delta_qre, n_modes);
    }

    // Throws config_rejected when the derived tau exceeds 1.
    void validate() const {
        channel.validate();
        constellation.validate();
        if (n_modes < 1) throw std::invalid_argument("SimConfig: n_modes must be >= 1");
        if (!(delta_qre > 0.0)) throw std::invalid_argument("SimConfig: delta_qre must be > 0");
        if (!(nbar_S_per_selected_mode > 0.0))
            throw std::invalid_argument("SimConfig: nbar_S_per_selected_mode must be > 0");
        if (trials < 1) throw std::invalid_argument("SimConfig: trials must be >= 1");
        if (!(constellation.mean_photon_alice() > 0.0))
            throw std::invalid_argument("SimConfig: constellation must carry nonzero energy");
        const double t = tau();
        if (t > 1.0 + 1e-12)
            throw config_rejected("SimConfig: derived tau = " + std::to_string(t) +
                                  " > 1; nbar_S below the covert budget needs no sparsification");
    }

    // Constellation rescaled so its Alice-side mean photon number equals
    // nbar_S_per_selected_mode.
    Constellation scaled_constellation() const {
        const double mp = constellation.mean_photon_alice();
        return constellation.scaled(std::sqrt(nbar_S_per_selected_mode / mp));
    }
};

struct TrialResult {
    std::uint64_t selected_mode_count = 0;
    std::uint64_t bob_symbol_errors = 0;
    double bob_mi_estimate = 0.0;  // nats per selected mode, this trial only
    long long willie_total_count_h0 = 0;
    long long willie_total_count_h1 = 0;
};

struct RocPoint {
    long long threshold;
    double p_fa;
    double p_md;
    double p_e;
};

struct RocSummary {
    std::vector<RocPoint> points;
    long long best_threshold = 0;
    double min_pe = 0.5;
    double min_pe_stderr = 0.0;
};

namespace detail {

// Decide-H1 when count >= threshold; sweeps all informative thresholds.
inline RocSummary roc_from_counts(std::vector<long long> h0, std::vector<long long> h1) {
    RocSummary out;
    if (h0.empty() || h1.empty()) return out;
    std::sort(h0.begin(), h0.end());
    std::sort(h1.begin(), h1.end());
    std::vector<long long> thresholds;
    thresholds.reserve(h0.size() + h1.size() + 1);
    thresholds.push_back(std::min(h0.front(), h1.front()));
    for (long long v : h0) thresholds.push_back(v + 1);
    for (long long v : h1) thresholds.push_back(v + 1);
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    const double n0 = static_cast<double>(h0.size());
    const double n1 = static_cast<double>(h1.size());
    out.min_pe = 1.0;
    for (long long thr : thresholds) {
        const auto below0 = std::lower_bound(h0.begin(), h0.end(), thr) - h0.begin();
        const auto below1 = std::lower_bound(h1.begin(), h1.end(), thr) - h1.begin();
        const double p_fa = (n0 - static_cast<double>(below0)) / n0;
        const double p_md = static_cast<double>(below1) / n1;
        const double p_e = 0.5 * (p_fa + p_md);
        out.points.push_back(RocPoint{thr, p_fa, p_md, p_e});
        if (p_e < out.min_pe) {
            out.min_pe = p_e;
            out.best_threshold = thr;
            out.min_pe_stderr =
                0.5 * std::sqrt(p_fa * (1.0 - p_fa) / n0 + p_md * (1.0 - p_md) / n1);
        }
    }
    return out;
}

// Willie's H1 total over one trial given how many selected modes carry each
// constellation point; remaining modes are thermal.
inline long long willie_h1_total(const std::vector<std::uint64_t>& counts_per_point,
                                 const std::vector<Complex>& willie_amps, std::uint64_t n_modes,
                                 double nT, std::mt19937_64& g) {
    double intensity = 0.0;
    std::uint64_t displaced = 0;
    for (std::size_t l = 0; l < counts_per_point.size(); ++l) {
        const double u = std::abs(willie_amps[l]);
        if (counts_per_point[l] == 0) continue;
        if (u > 0.0) {
            intensity += displaced_intensity_total(counts_per_point[l], u, nT, g);
            displaced += counts_per_point[l];
        }
    }
    const std::uint64_t thermal_modes = n_modes - displaced;
    intensity += thermal_intensity_total(thermal_modes, nT, g);
    return poisson_count(intensity, g);
}

inline std::vector<std::uint64_t> multinomial_counts(std::uint64_t m,
                                                     const std::vector<double>& priors,
                                                     std::mt19937_64& g) {
    std::vector<std::uint64_t> counts(priors.size(), 0);
    std::uint64_t remaining = m;
    double prior_left = 1.0;
    for (std::size_t l = 0; l + 1 < priors.size() && remaining > 0; ++l) {
        const double p = std::clamp(priors[l] / prior_left, 0.0, 1.0);
        std::binomial_distribution<std::uint64_t> d(remaining, p);
        counts[l] = d(g);
        remaining -= counts[l];
        prior_left -= priors[l];
    }
    if (!priors.empty()) counts.back() += remaining;
    return counts;
}

inline double plug_in_mi_nats(const std::vector<std::vector<std::uint64_t>>& joint,
                              bool miller_madow) {
    const std::size_t L = joint.size();
    double total = 0.0;
    std::vector<double> row(L, 0.0), col(L, 0.0);
    for (std::size_t x = 0; x < L; ++x)
        for (std::size_t y = 0; y < L; ++y) {
            row[x] += static_cast<double>(joint[x][y]);
            col[y] += static_cast<double>(joint[x][y]);
            total += static_cast<double>(joint[x][y]);
        }
    if (total <= 0.0) return 0.0;
    double mi = 0.0;
    for (std::size_t x = 0; x < L; ++x)
        for (std::size_t y = 0; y < L; ++y) {
            const double c = static_cast<double>(joint[x][y]);
            if (c > 0.0) mi += (c / total) * std::log(c * total / (row[x] * col[y]));
        }
    if (miller_madow) {
        int kx = 0, ky = 0;
        for (std::size_t i = 0; i < L; ++i) {
            kx += row[i] > 0.0;
            ky += col[i] > 0.0;
        }
        mi -= static_cast<double>((kx - 1) * (ky - 1)) / (2.0 * total);
    }
    return std::max(mi, 0.0);
}

}  // namespace detail

// Radiometer ROC: total photon count over all n modes under H0 (thermal
// everywhere) and H1 (transmission per config), swept over integer
// thresholds. Uses the exact aggregate distributions (Gamma-Poisson for the
// thermal background, noncentral-chi-square intensity for displaced modes).
inline RocSummary willie_radiometer_roc(const SimConfig& config, std::uint32_t trials) {
    config.validate();
    if (trials < 1) throw std::invalid_argument("willie_radiometer_roc: trials must be >= 1");
    // validate() tolerates tau = 1 + few ulp at the exact budget
    const double tau = std::min(config.tau(), 1.0);
    const double nT = config.channel.willie_nT();
    const Constellation scaled = config.scaled_constellation();
    WillieSpec spec{config.channel, scaled, tau, TruncationPolicy{}};
    const auto willie_amps = detail::willie_amplitudes(spec);

    std::vector<long long> h0(trials), h1(trials);
    for (std::uint32_t t = 0; t < trials; ++t) {
        auto g_sel = derive_stream(config.master_seed, t, StreamRole::mode_select);
        auto g_key = derive_stream(config.master_seed, t, StreamRole::alice_key);
        auto g_w = derive_stream(config.master_seed, t, StreamRole::willie_noise);

        std::uint64_t m = 0;
        if (tau >= 1.0) {
            m = config.n_modes;
        } else if (tau > 0.0) {
            std::binomial_distribution<std::uint64_t> sel(config.n_modes, tau);
            m = sel(g_sel);
        }
        const auto counts = detail::multinomial_counts(m, scaled.priors, g_key);
        h0[t] = detail::poisson_count(
            detail::thermal_intensity_total(config.n_modes, nT, g_w), g_w);
        h1[t] = detail::willie_h1_total(counts, willie_amps, config.n_modes, nT, g_w);
    }
    return detail::roc_from_counts(std::move(h0), std::move(h1));
}

struct ExperimentResult {
    std::uint64_t n_modes = 0;
    double tau = 0.0;
    double expected_selected = 0.0;  // tau * n
    double mean_selected = 0.0;      // empirical
    std::uint32_t trials = 0;
    double ser = 0.0;  // pooled symbol error rate over all selected modes
    double ser_stderr = 0.0;
    double mi_nats = 0.0;  // pooled plug-in MI per selected mode, Miller-Madow corrected
    double m_bits = 0.0;   // expected_selected * mi_nats / ln 2
    double willie_min_pe = 0.5;
    double willie_min_pe_stderr = 0.0;
    long long willie_best_threshold = 0;
    std::vector<TrialResult> per_trial;
};

// Full link simulation: per trial select modes, scramble a uniform message
// with the shared secret, transmit on the selected modes, decode at Bob, and
// record Willie's total counts under both hypotheses.
inline ExperimentResult run_experiment(const SimConfig& config) {
    config.validate();
    const double tau = std::min(config.tau(), 1.0);
    const double nT = config.channel.willie_nT();
    const Constellation scaled = config.scaled_constellation();
    const int L = static_cast<int>(scaled.size());
    WillieSpec spec{config.channel, scaled, tau, TruncationPolicy{}};
    const auto willie_amps = detail::willie_amplitudes(spec);
    std::vector<Complex> bob_points;
    for (const auto& a : scaled.amplitudes) bob_points.push_back(std::sqrt(config.channel.eta) * a);

    ExperimentResult res;
    res.n_modes = config.n_modes;
    res.tau = tau;
    res.expected_selected = tau * static_cast<double>(config.n_modes);
    res.trials = config.trials;
    res.per_trial.reserve(config.trials);

    std::vector<std::vector<std::uint64_t>> joint(L, std::vector<std::uint64_t>(L, 0));
    std::uint64_t total_selected = 0, total_errors = 0;
    std::vector<long long> h0(config.trials), h1(config.trials);

    for (std::uint32_t t = 0; t < config.trials; ++t) {
        auto g_sel = derive_stream(config.master_seed, t, StreamRole::mode_select);
        auto g_key = derive_stream(config.master_seed, t, StreamRole::alice_key);
        auto g_ch = derive_stream(config.master_seed, t, StreamRole::channel_noise);
        auto g_w = derive_stream(config.master_seed, t, StreamRole::willie_noise);

        const auto selected = select_modes(config.n_modes, tau, g_sel);
        const std::uint64_t m = selected.size();
        const auto secret = gen_secret_sequence(m, L, g_key);
        const auto message = gen_secret_sequence(m, L, g_key);
        const auto sent = encode(message, secret, L);

        TrialResult tr;
        tr.selected_mode_count = m;
        std::vector<std::vector<std::uint64_t>> joint_trial(L, std::vector<std::uint64_t>(L, 0));
        std::vector<std::uint64_t> counts_per_point(L, 0);
        for (std::uint64_t i = 0; i < m; ++i) {
            const int a = sent[i];
            ++counts_per_point[a];
            const Complex y = bob_heterodyne_sample(scaled.amplitudes[a], config.channel, g_ch);
            const int a_hat = bob_ml_decode(y, bob_points);
            ++joint_trial[a][a_hat];
            ++joint[a][a_hat];
            if (a_hat != a) ++tr.bob_symbol_errors;
        }
        tr.bob_mi_estimate = detail::plug_in_mi_nats(joint_trial, false);
        tr.willie_total_count_h0 = detail::poisson_count(
            detail::thermal_intensity_total(config.n_modes, nT, g_w), g_w);
        tr.willie_total_count_h1 =
            detail::willie_h1_total(counts_per_point, willie_amps, config.n_modes, nT, g_w);

        h0[t] = tr.willie_total_count_h0;
        h1[t] = tr.willie_total_count_h1;
        total_selected += m;
        total_errors += tr.bob_symbol_errors;
        res.per_trial.push_back(tr);
    }

    res.mean_selected = static_cast<double>(total_selected) / config.trials;
    if (total_selected > 0) {
        res.ser = static_cast<double>(total_errors) / static_cast<double>(total_selected);
        res.ser_stderr =
            std::sqrt(std::max(res.ser * (1.0 - res.ser), 0.0) / static_cast<double>(total_selected));
    }
    res.mi_nats = detail::plug_in_mi_nats(joint, true);
    res.m_bits = res.expected_selected * res.mi_nats / std::log(2.0);

    RocSummary roc = detail::roc_from_counts(std::move(h0), std::move(h1));
    res.willie_min_pe = roc.min_pe;
    res.willie_min_pe_stderr = roc.min_pe_stderr;
    res.willie_best_threshold = roc.best_threshold;
    return res;
}

struct ScalingRow {
    std::uint64_t n;
    double tau;
    double e_selected;
    double ser;
    double mi_nats;
    double m_bits;
    double willie_min_pe;
    double willie_pe_stderr;
};

// One run_experiment per n, with tau recomputed from the sparsification rule
// at the base config's fixed per-selected-mode photon number.
inline std::vector<ScalingRow> srl_scaling_sweep(const SimConfig& base,
                                                 const std::vector<std::uint64_t>& n_grid) {
    if (n_grid.empty()) throw std::invalid_argument("srl_scaling_sweep: empty n grid");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1])
            throw std::invalid_argument("srl_scaling_sweep: n grid must be ascending");
    std::vector<ScalingRow> rows;
    for (std::uint64_t n : n_grid) {
        SimConfig cfg = base;
        cfg.n_modes = n;
        const ExperimentResult r = run_experiment(cfg);
        rows.push_back(ScalingRow{n, r.tau, r.expected_selected, r.ser, r.mi_nats, r.m_bits,
                                  r.willie_min_pe, r.willie_min_pe_stderr});
    }
    return rows;
}

// Least-squares slope of log(m_bits) against log(n).
inline double scaling_loglog_slope(const std::vector<ScalingRow>& rows) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (const auto& r : rows) {
        if (!(r.m_bits > 0.0)) continue;
        const double x = std::log(static_cast<double>(r.n)), y = std::log(r.m_bits);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++k;
    }
    if (k < 2) throw std::invalid_argument("scaling_loglog_slope: need >= 2 positive rows");
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// JSON / CSV interfaces

inline constexpr int kSchemaVersion = 1;

inline nlohmann::json to_json(const Constellation& c) {
    nlohmann::json amps = nlohmann::json::array();
    for (const auto& a : c.amplitudes) amps.push_back({a.real(), a.imag()});
    return nlohmann::json{{"amplitudes", std::move(amps)}, {"priors", c.priors}};
}

inline Constellation constellation_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "qpsk") return Constellation::qpsk(1.0);
        if (s == "bpsk") return Constellation::bpsk(1.0);
        throw std::invalid_argument("constellation_from_json: unknown preset " + s);
    }
    Constellation c;
    for (const auto& a : j.at("amplitudes"))
        c.amplitudes.push_back(Complex(a.at(0).get<double>(), a.at(1).get<double>()));
    c.priors = j.at("priors").get<std::vector<double>>();
    c.validate();
    return c;
}

inline nlohmann::json to_json(const SimConfig& c) {
    return nlohmann::json{{"schema_version", kSchemaVersion},
                          {"eta", c.channel.eta},
                          {"nbar_b", c.channel.nbar_B},
                          {"n_modes", c.n_modes},
                          {"delta_qre", c.delta_qre},
                          {"constellation", to_json(c.constellation)},
                          {"nbar_s_per_selected_mode", c.nbar_S_per_selected_mode},
                          {"trials", c.trials},
                          {"master_seed", c.master_seed}};
}

inline SimConfig sim_config_from_json(const nlohmann::json& j) {
    SimConfig c;
    c.channel = ChannelParams{j.at("eta").get<double>(), j.at("nbar_b").get<double>()};
    c.n_modes = j.at("n_modes").get<std::uint64_t>();
    c.delta_qre = j.at("delta_qre").get<double>();
    c.constellation = constellation_from_json(j.at("constellation"));
    c.nbar_S_per_selected_mode = j.at("nbar_s_per_selected_mode").get<double>();
    c.trials = j.at("trials").get<std::uint32_t>();
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
    c.validate();
    return c;
}

inline nlohmann::json to_json(const ExperimentResult& r) {
    return nlohmann::json{{"schema_version", kSchemaVersion},
                          {"n_modes", r.n_modes},
                          {"tau", r.tau},
                          {"expected_selected", r.expected_selected},
                          {"mean_selected", r.mean_selected},
                          {"trials", r.trials},
                          {"ser", r.ser},
                          {"ser_stderr", r.ser_stderr},
                          {"mi_nats", r.mi_nats},
                          {"m_bits", r.m_bits},
                          {"willie_min_pe", r.willie_min_pe},
                          {"willie_min_pe_stderr", r.willie_min_pe_stderr},
                          {"willie_best_threshold", r.willie_best_threshold}};
}

// Documented column order: n, tau, e_selected, ser, mi_nats, m_bits,
// willie_min_pe, willie_pe_stderr.
inline std::string scaling_rows_csv(const std::vector<ScalingRow>& rows) {
    std::string out = "n,tau,e_selected,ser,mi_nats,m_bits,willie_min_pe,willie_pe_stderr\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf,
                      "%llu,%.5e,%.5e,%.5e,%.5e,%.5e,%.5e,%.5e\n",
                      static_cast<unsigned long long>(r.n), r.tau, r.e_selected, r.ser, r.mi_nats,
                      r.m_bits, r.willie_min_pe, r.willie_pe_stderr);
        out += buf;
    }
    return out;
}

}  // namespace covert
