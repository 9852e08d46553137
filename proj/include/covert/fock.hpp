#pragma once

// Truncated Fock-basis numerics for single-mode bosonic states: constructors
// for thermal and displaced thermal states, entropies, divergences and
// distances. Everything works on finite dim x dim matrices; constructors pick
// the dimension automatically so that the discarded tail mass stays below a
// configurable deficit.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <nlohmann/json.hpp>

#include "covert/errors.hpp"

namespace covert {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

// Eigenvalues at or below this are treated as numerically zero (0 ln 0 := 0).
inline constexpr double kEigenFloor = 1e-14;
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kPositivityTol = 1e-10;
// rho mass on a sigma null eigenvector above this makes QRE report +infinity.
inline constexpr double kSupportMassTol = 1e-9;

struct TruncationPolicy {
    double target_trace_deficit = 1e-10;
    int max_dim = 4096;
    double growth_factor = 1.5;

    void validate() const {
        if (!(target_trace_deficit > 0.0) || target_trace_deficit > 1e-6)
            throw std::invalid_argument("TruncationPolicy: target_trace_deficit must be in (0, 1e-6]");
        if (max_dim < 2)
            throw std::invalid_argument("TruncationPolicy: max_dim must be >= 2");
        if (!(growth_factor > 1.0))
            throw std::invalid_argument("TruncationPolicy: growth_factor must be > 1");
    }
};

struct ModeOperator {
    Matrix entries;

    int dim() const { return static_cast<int>(entries.rows()); }
};

// Trace-one positive Hermitian matrix on a truncated Fock space. Construction
// validates Hermiticity, positivity and trace; the trace deficit accumulated
// by truncation is recorded, not renormalized away.
class DensityMatrix {
  public:
    DensityMatrix(Matrix entries, double trace_deficit)
        : entries_(std::move(entries)), trace_deficit_(trace_deficit) {
        validate();
    }

    int dim() const { return static_cast<int>(entries_.rows()); }
    const Matrix& entries() const { return entries_; }
    double trace_deficit() const { return trace_deficit_; }

  private:
    void validate() const {
        if (entries_.rows() != entries_.cols() || entries_.rows() < 1)
            throw std::invalid_argument("DensityMatrix: square matrix required");
        if (trace_deficit_ < 0.0)
            throw std::invalid_argument("DensityMatrix: negative trace deficit");
        const double herm = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
        if (herm > kHermitianTol)
            throw std::invalid_argument("DensityMatrix: not Hermitian, max |M - M^dag| = " + std::to_string(herm));
        const double tr = entries_.trace().real();
        if (tr < 1.0 - trace_deficit_ - 1e-12 || tr > 1.0 + 1e-12)
            throw std::invalid_argument("DensityMatrix: trace " + std::to_string(tr) +
                                        " outside [1 - deficit, 1]");
        Eigen::SelfAdjointEigenSolver<Matrix> es(entries_, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -kPositivityTol)
            throw std::invalid_argument("DensityMatrix: smallest eigenvalue " +
                                        std::to_string(es.eigenvalues().minCoeff()) + " below tolerance");
    }

    Matrix entries_;
    double trace_deficit_;
};

// Annihilation operator: entry sqrt(k) at (k-1, k), 0-indexed Fock labels.
inline ModeOperator build_annihilation(int dim) {
    if (dim < 2) throw std::invalid_argument("build_annihilation: dim must be >= 2");
    Matrix a = Matrix::Zero(dim, dim);
    for (int k = 1; k < dim; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return ModeOperator{std::move(a)};
}

namespace detail {

// Geometric Fock weight t_k = nbar^k / (1+nbar)^(k+1), computed in log space
// so large nbar and large k do not overflow.
inline double thermal_weight(double nbar, int k) {
    if (nbar <= 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(k * (std::log(nbar) - std::log1p(nbar))) / (1.0 + nbar);
}

// Tail mass sum_{k >= dim} t_k = (nbar/(1+nbar))^dim.
inline double thermal_tail(double nbar, int dim) {
    if (nbar <= 0.0) return 0.0;
    return std::exp(dim * (std::log(nbar) - std::log1p(nbar)));
}

inline int thermal_start_dim(double nbar, double alpha_abs) {
    const double guess = 8.0 * (nbar + alpha_abs * alpha_abs + 1.0);
    return std::max(32, static_cast<int>(std::ceil(guess)));
}

inline int grow_dim(int dim, const TruncationPolicy& policy) {
    return static_cast<int>(std::ceil(dim * policy.growth_factor));
}

inline bool displacement_guard_ok(double alpha_abs, int dim) {
    return alpha_abs * alpha_abs + 6.0 * alpha_abs + 10.0 <= static_cast<double>(dim);
}

inline Matrix thermal_entries(double nbar, int dim) {
    Matrix rho = Matrix::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) rho(k, k) = thermal_weight(nbar, k);
    return rho;
}

inline void hermitize(Matrix& m) { m = 0.5 * (m + m.adjoint()).eval(); }

}  // namespace detail

// Thermal state at a caller-chosen dimension (diagonal, exact weights).
inline DensityMatrix thermal_state_at(double nbar, int dim) {
    if (nbar < 0.0) throw std::invalid_argument("thermal_state_at: nbar must be >= 0");
    if (dim < 1) throw std::invalid_argument("thermal_state_at: dim must be >= 1");
    return DensityMatrix(detail::thermal_entries(nbar, dim), detail::thermal_tail(nbar, dim));
}

// Thermal state with the dimension auto-chosen so the tail mass stays below
// the policy's target deficit.
inline DensityMatrix thermal_state(double nbar, const TruncationPolicy& policy = {}) {
    if (nbar < 0.0) throw std::invalid_argument("thermal_state: nbar must be >= 0");
    policy.validate();
    int dim = detail::thermal_start_dim(nbar, 0.0);
    while (true) {
        if (dim > policy.max_dim)
            throw truncation_overflow("thermal_state: nbar=" + std::to_string(nbar) +
                                      " needs dim > max_dim=" + std::to_string(policy.max_dim));
        if (detail::thermal_tail(nbar, dim) < policy.target_trace_deficit)
            return thermal_state_at(nbar, dim);
        dim = detail::grow_dim(dim, policy);
    }
}

// D(alpha) = exp(alpha a^dag - conj(alpha) a), unitary up to truncation
// leakage concentrated in the top of the basis.
inline ModeOperator displacement_operator(Complex alpha, int dim) {
    if (dim < 2) throw std::invalid_argument("displacement_operator: dim must be >= 2");
    const double aa = std::abs(alpha);
    if (!detail::displacement_guard_ok(aa, dim))
        throw std::invalid_argument("displacement_operator: dim " + std::to_string(dim) +
                                    " too small for |alpha| = " + std::to_string(aa));
    const Matrix a = build_annihilation(dim).entries;
    const Matrix gen = alpha * a.adjoint() - std::conj(alpha) * a;
    return ModeOperator{gen.exp()};
}

inline double mean_photon(const DensityMatrix& rho) {
    double acc = 0.0;
    for (int k = 1; k < rho.dim(); ++k) acc += k * rho.entries()(k, k).real();
    return std::max(acc, 0.0);
}

// D(alpha) rho_th D(alpha)^dag at a caller-chosen dimension.
inline DensityMatrix displaced_thermal_at(Complex alpha, double nbar, int dim) {
    if (nbar < 0.0) throw std::invalid_argument("displaced_thermal_at: nbar must be >= 0");
    const Matrix d = displacement_operator(alpha, dim).entries;
    Matrix rho = d * detail::thermal_entries(nbar, dim) * d.adjoint();
    detail::hermitize(rho);
    const double deficit = std::max(0.0, 1.0 - rho.trace().real());
    return DensityMatrix(std::move(rho), deficit);
}

// Displaced thermal state with the dimension grown until both the trace
// deficit and the mean-photon identity |alpha|^2 + nbar hold.
inline DensityMatrix displaced_thermal(Complex alpha, double nbar, const TruncationPolicy& policy = {}) {
    if (nbar < 0.0) throw std::invalid_argument("displaced_thermal: nbar must be >= 0");
    policy.validate();
    const double aa = std::abs(alpha);
    const double expected_mp = aa * aa + nbar;
    int dim = detail::thermal_start_dim(nbar, aa);
    while (true) {
        if (dim > policy.max_dim)
            throw truncation_overflow("displaced_thermal: |alpha|=" + std::to_string(aa) +
                                      ", nbar=" + std::to_string(nbar) + " needs dim > max_dim");
        if (detail::displacement_guard_ok(aa, dim)) {
            DensityMatrix rho = displaced_thermal_at(alpha, nbar, dim);
            const bool deficit_ok = rho.trace_deficit() < policy.target_trace_deficit;
            const bool photon_ok =
                std::abs(mean_photon(rho) - expected_mp) <= 1e-8 * std::max(1.0, expected_mp);
            if (deficit_ok && photon_ok) return rho;
        }
        dim = detail::grow_dim(dim, policy);
    }
}

// -sum lambda ln lambda in nats; eigenvalues at or below kEigenFloor contribute 0.
inline double von_neumann_entropy(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.entries(), Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (int i = 0; i < rho.dim(); ++i) {
        const double v = es.eigenvalues()(i);
        if (v > kEigenFloor) s -= v * std::log(v);
    }
    return s;
}

// D(rho || sigma) = tr[rho ln rho] - tr[rho ln sigma] in nats. Returns
// +infinity when rho has non-negligible mass where sigma is numerically
// rank-deficient.
inline double qre(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim())
        throw std::invalid_argument("qre: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> es_rho(rho.entries(), Eigen::EigenvaluesOnly);
    double tr_rho_ln_rho = 0.0;
    for (int i = 0; i < rho.dim(); ++i) {
        const double v = es_rho.eigenvalues()(i);
        if (v > kEigenFloor) tr_rho_ln_rho += v * std::log(v);
    }

    Eigen::SelfAdjointEigenSolver<Matrix> es_sig(sigma.entries());
    double tr_rho_ln_sigma = 0.0;
    for (int i = 0; i < sigma.dim(); ++i) {
        const double mu = es_sig.eigenvalues()(i);
        const double mass =
            std::max(0.0, (es_sig.eigenvectors().col(i).adjoint() * rho.entries() *
                           es_sig.eigenvectors().col(i))(0, 0).real());
        if (mu > kEigenFloor) {
            tr_rho_ln_sigma += mass * std::log(mu);
        } else if (mass > kSupportMassTol) {
            return std::numeric_limits<double>::infinity();
        } else if (mu > 0.0) {
            tr_rho_ln_sigma += mass * std::log(mu);  // deep truncation tail, mass ~ 0
        }
    }
    return tr_rho_ln_rho - tr_rho_ln_sigma;
}

// D(rho || thermal(nT)) using the diagonal closed form of the thermal log:
// -S(rho) + ln(1+nT) - <N>_rho ln(nT/(1+nT)). Avoids the ill-conditioned
// logarithm of the truncated thermal tail.
inline double qre_vs_thermal(const DensityMatrix& rho, double nT) {
    if (!(nT > 0.0)) throw std::invalid_argument("qre_vs_thermal: nT must be > 0");
    return -von_neumann_entropy(rho) + std::log1p(nT) -
           mean_photon(rho) * (std::log(nT) - std::log1p(nT));
}

// (1/2) sum |eigenvalues of rho - sigma|.
inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim())
        throw std::invalid_argument("trace_distance: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.entries() - sigma.entries(), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// Minimum error probability of the optimal binary test between equally
// likely rho0 and rho1: 1/2 - ||rho0 - rho1||_1 / 4.
inline double detection_error_min(const DensityMatrix& rho0, const DensityMatrix& rho1) {
    const double pe = 0.5 - 0.5 * trace_distance(rho0, rho1);
    return std::clamp(pe, 0.0, 0.5);
}

inline DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
    Matrix prod = Eigen::kroneckerProduct(a.entries(), b.entries());
    const double deficit = 1.0 - (1.0 - a.trace_deficit()) * (1.0 - b.trace_deficit());
    return DensityMatrix(std::move(prod), std::max(deficit, 0.0));
}

namespace detail {

// Gauss-Legendre nodes/weights on [0, 1], computed by Newton iteration.
inline void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * pp * pp);
    }
}

inline Matrix hermitian_log(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("hermitian_log: matrix is not positive definite");
    Eigen::VectorXd logs = es.eigenvalues().array().log();
    return es.eigenvectors() * logs.asDiagonal() * es.eigenvectors().adjoint();
}

// integrand(s) = [sA + (1-s)I]^-1 B [sA + (1-s)I]^-1 on a panel [lo, hi].
inline Matrix log_derivative_panel(const Matrix& a, const Matrix& b, double lo, double hi,
                                   const std::vector<double>& nodes,
                                   const std::vector<double>& weights) {
    const int dim = static_cast<int>(a.rows());
    Matrix acc = Matrix::Zero(dim, dim);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double s = lo + (hi - lo) * nodes[i];
        const Matrix m = s * a + (1.0 - s) * Matrix::Identity(dim, dim);
        Eigen::PartialPivLU<Matrix> lu(m);
        const Matrix left = lu.solve(b);
        acc += ((hi - lo) * weights[i]) * lu.solve(left.adjoint()).adjoint();
    }
    return acc;
}

// integral_0^1 ds [sA + (1-s)I]^-1 B [sA + (1-s)I]^-1 by adaptive composite
// Gauss-Legendre. Small eigenvalues of A put a boundary layer at s = 1, so
// panels are bisected until each one stabilizes.
inline Matrix log_derivative_integral(const Matrix& a, const Matrix& b, int base_points,
                                      double tol) {
    std::vector<double> lo_nodes, lo_w, hi_nodes, hi_w;
    gauss_legendre_01(base_points, lo_nodes, lo_w);
    gauss_legendre_01(2 * base_points, hi_nodes, hi_w);
    const int dim = static_cast<int>(a.rows());
    Matrix acc = Matrix::Zero(dim, dim);

    struct Panel {
        double lo, hi;
        int depth;
    };
    std::vector<Panel> stack{{0.0, 1.0, 0}};
    while (!stack.empty()) {
        const Panel p = stack.back();
        stack.pop_back();
        const Matrix coarse = log_derivative_panel(a, b, p.lo, p.hi, lo_nodes, lo_w);
        const Matrix fine = log_derivative_panel(a, b, p.lo, p.hi, hi_nodes, hi_w);
        const double err = (fine - coarse).cwiseAbs().maxCoeff();
        if (err < tol * std::max(1.0, (p.hi - p.lo)) || p.depth >= 52) {
            acc += fine;
        } else {
            const double mid = 0.5 * (p.lo + p.hi);
            stack.push_back({p.lo, mid, p.depth + 1});
            stack.push_back({mid, p.hi, p.depth + 1});
        }
    }
    return acc;
}

}  // namespace detail

// Self-test of the integral representation of d/dt log A(t): compares a
// central-difference matrix-log derivative against the quadrature of the
// integral applied to the central-difference dA/dt. Both sides use the same
// fourth-order five-point stencil so their truncation errors match. Returns
// the entrywise max residual.
inline double matrix_log_derivative_check(const std::function<Matrix(double)>& family, double t0,
                                          double step) {
    if (!(step > 0.0)) throw std::invalid_argument("matrix_log_derivative_check: step must be > 0");
    const Matrix a0 = family(t0);
    if ((a0 - a0.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol)
        throw std::invalid_argument("matrix_log_derivative_check: family must be Hermitian");
    const auto central5 = [&](const std::function<Matrix(double)>& f) -> Matrix {
        return (-f(t0 + 2.0 * step) + 8.0 * f(t0 + step) - 8.0 * f(t0 - step) +
                f(t0 - 2.0 * step)) /
               (12.0 * step);
    };
    const Matrix da = central5(family);
    const Matrix fd = central5([&](double t) { return detail::hermitian_log(family(t)); });

    // 64-point base rule; each panel is refined until it stabilizes.
    const Matrix quad = detail::log_derivative_integral(a0, da, 64, 1e-12);
    return (fd - quad).cwiseAbs().maxCoeff();
}

// Debug dump: dimension plus row-major [re, im] pairs.
inline nlohmann::json to_debug_json(const DensityMatrix& rho) {
    nlohmann::json entries = nlohmann::json::array();
    for (int r = 0; r < rho.dim(); ++r)
        for (int c = 0; c < rho.dim(); ++c)
            entries.push_back({rho.entries()(r, c).real(), rho.entries()(r, c).imag()});
    return nlohmann::json{{"dim", rho.dim()},
                          {"trace_deficit", rho.trace_deficit()},
                          {"entries", std::move(entries)}};
}

}  // namespace covert
