#pragma once

//! Number-state projectors, QND projectors on ensemble pairs, the photonic
//! POVM and a dense three-ensemble oracle.
//!
//! Delta is always k2 - k1. The x basis is |k>^(x) = W|k> with
//! W = exp(-i S^y pi/4), so W = R^T for the real matrix R of spin_core.

#include "spintel/spin_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace spintel {

enum class Basis { Z, X };

struct QndOutcome {
    int delta = 0;
    Basis basis = Basis::Z;
};

struct Projection {
    EnsembleState branch;
    double probability;
};

//! Pi_k |state> in the z or x number basis; the branch is left unnormalized.
inline Projection project_number(const EnsembleState& state, Basis basis, int k) {
    const int n = state.n_atoms();
    if (k < 0 || k > n) throw std::domain_error("project_number: k out of range");
    Vec out = Vec::Zero(n + 1);
    if (basis == Basis::Z) {
        out[k] = state[k];
    } else {
        const Vec xk = r_matrix_real(n).row(k).transpose().cast<cplx>();
        out = xk * xk.dot(state.amplitudes());
    }
    const double p = out.squaredNorm();
    return {EnsembleState(n, std::move(out)), p};
}

//! Amplitudes M(k1, k2) of a two-ensemble symmetric state.
class PairState {
public:
    PairState(int n_atoms, Mat amplitudes) : n_(n_atoms), m_(std::move(amplitudes)) {
        if (n_ < 1) throw std::domain_error("PairState: N must be positive");
        if (m_.rows() != n_ + 1 || m_.cols() != n_ + 1) throw std::domain_error("PairState: shape must be (N+1)x(N+1)");
    }

    static PairState product(const EnsembleState& a, const EnsembleState& b) {
        if (a.n_atoms() != b.n_atoms()) throw std::domain_error("PairState: ensemble sizes differ");
        return {a.n_atoms(), a.amplitudes() * b.amplitudes().transpose()};
    }

    int n_atoms() const { return n_; }
    const Mat& amplitudes() const { return m_; }
    double norm2() const { return m_.squaredNorm(); }

    PairState normalized() const {
        const double nn = m_.norm();
        if (nn == 0.0) throw ContractViolation("PairState: cannot normalize zero state");
        return {n_, m_ / nn};
    }

    //! (A (x) B)|psi> corresponds to A M B^T.
    PairState apply(const Mat& a, const Mat& b) const { return {n_, a * m_ * b.transpose()}; }

private:
    int n_;
    Mat m_;
};

namespace detail {

inline Mat keep_diagonal_band(const Mat& m, int delta) {
    const Eigen::Index n = m.rows() - 1;
    Mat out = Mat::Zero(m.rows(), m.cols());
    for (Eigen::Index k = std::max<Eigen::Index>(0, -delta); k <= std::min<Eigen::Index>(n, n - delta); ++k)
        out(k, k + delta) = m(k, k + delta);
    return out;
}

}  // namespace detail

struct PairProjection {
    PairState branch;
    double probability;
};

//! P_Delta on a pair; the x variant projects in the frame W (x) W.
inline PairProjection qnd_project_pair(const PairState& state, QndOutcome outcome) {
    const int n = state.n_atoms();
    if (std::abs(outcome.delta) > n) throw std::domain_error("qnd_project_pair: |Delta| > N");
    Mat out;
    if (outcome.basis == Basis::Z) {
        out = detail::keep_diagonal_band(state.amplitudes(), outcome.delta);
    } else {
        const Mat r = r_matrix_real(n).cast<cplx>();
        const Mat in_frame = r * state.amplitudes() * r.transpose();
        out = r.transpose() * detail::keep_diagonal_band(in_frame, outcome.delta) * r;
    }
    const double p = out.squaredNorm();
    return {PairState(n, std::move(out)), p};
}

//! Brute-force amplitudes over |k1, k2, k3>; correctness oracle only.
class DenseTriState {
public:
    static constexpr int max_atoms = 8;

    DenseTriState(int n_atoms, Vec amplitudes) : n_(n_atoms), a_(std::move(amplitudes)) {
        if (n_ < 1) throw std::domain_error("DenseTriState: N must be positive");
        if (n_ > max_atoms) throw std::domain_error("DenseTriState: oracle limited to N <= 8");
        const Eigen::Index d = n_ + 1;
        if (a_.size() != d * d * d) throw std::domain_error("DenseTriState: length must be (N+1)^3");
    }

    //! |psi0>_1 (x) |pair>_23.
    static DenseTriState compose(const EnsembleState& psi0, const PairState& pair) {
        const int n = psi0.n_atoms();
        if (pair.n_atoms() != n) throw std::domain_error("DenseTriState: ensemble sizes differ");
        if (n > max_atoms) throw std::domain_error("DenseTriState: oracle limited to N <= 8");
        const int d = n + 1;
        Vec a(d * d * d);
        for (int k1 = 0; k1 < d; ++k1)
            for (int k2 = 0; k2 < d; ++k2)
                for (int k3 = 0; k3 < d; ++k3) a[(k1 * d + k2) * d + k3] = psi0[k1] * pair.amplitudes()(k2, k3);
        return {n, std::move(a)};
    }

    int n_atoms() const { return n_; }
    const Vec& amplitudes() const { return a_; }
    double norm2() const { return a_.squaredNorm(); }
    cplx at(int k1, int k2, int k3) const {
        const int d = n_ + 1;
        return a_[(k1 * d + k2) * d + k3];
    }

    //! Applies a single-ensemble operator to ensemble `which` (1, 2 or 3).
    DenseTriState apply_local(int which, const Mat& op) const {
        const int d = n_ + 1;
        Vec out = Vec::Zero(a_.size());
        for (int k1 = 0; k1 < d; ++k1)
            for (int k2 = 0; k2 < d; ++k2)
                for (int k3 = 0; k3 < d; ++k3) {
                    const cplx v = a_[(k1 * d + k2) * d + k3];
                    if (v == 0.0) continue;
                    for (int j = 0; j < d; ++j) {
                        int t1 = k1, t2 = k2, t3 = k3;
                        int src = 0;
                        if (which == 1) { t1 = j; src = k1; }
                        else if (which == 2) { t2 = j; src = k2; }
                        else { t3 = j; src = k3; }
                        out[(t1 * d + t2) * d + t3] += op(j, src) * v;
                    }
                }
        return {n_, std::move(out)};
    }

    //! rho_3(k3, k3') = sum over k1, k2 of a(k1,k2,k3) conj(a(k1,k2,k3')).
    Mat reduced_density_3() const {
        const int d = n_ + 1;
        Mat rho = Mat::Zero(d, d);
        for (int k1 = 0; k1 < d; ++k1)
            for (int k2 = 0; k2 < d; ++k2) {
                const Vec v = a_.segment((k1 * d + k2) * d, d);
                rho += v * v.adjoint();
            }
        return rho;
    }

private:
    int n_;
    Vec a_;
};

struct DenseProjection {
    DenseTriState branch;
    double probability;
};

//! QND projector on ensembles 1 and 2 of the dense state.
inline DenseProjection qnd_project_dense(const DenseTriState& state, QndOutcome outcome) {
    const int n = state.n_atoms();
    if (std::abs(outcome.delta) > n) throw std::domain_error("qnd_project_dense: |Delta| > N");
    const int d = n + 1;
    const Mat w = y_rotation(n, std::numbers::pi / 2.0).entries;
    DenseTriState s = state;
    if (outcome.basis == Basis::X) s = s.apply_local(1, w.adjoint()).apply_local(2, w.adjoint());
    Vec a = s.amplitudes();
    for (int k1 = 0; k1 < d; ++k1)
        for (int k2 = 0; k2 < d; ++k2)
            if (k2 - k1 != outcome.delta) a.segment((k1 * d + k2) * d, d).setZero();
    DenseTriState out(n, std::move(a));
    if (outcome.basis == Basis::X) out = out.apply_local(1, w).apply_local(2, w);
    const double p = out.norm2();
    return {std::move(out), p};
}

//! Number projector on a single ensemble of the dense state.
inline DenseProjection project_number_dense(const DenseTriState& state, int which, Basis basis, int k) {
    const int n = state.n_atoms();
    if (k < 0 || k > n) throw std::domain_error("project_number_dense: k out of range");
    Mat proj = Mat::Zero(n + 1, n + 1);
    if (basis == Basis::Z) {
        proj(k, k) = 1.0;
    } else {
        const Vec col = y_rotation(n, std::numbers::pi / 2.0).entries.col(k);
        proj = col * col.adjoint();
    }
    DenseTriState out = state.apply_local(which, proj);
    const double p = out.norm2();
    return {std::move(out), p};
}

// ---------------------------------------------------------------------------
// Photonic POVM

//! ln C_{nc,nd}(chi) with its sign; C = 0 is reported as log = -inf.
struct SignedLog {
    double log_abs;
    double sign;
};

inline SignedLog povm_log_modulation(int n_c, int n_d, double alpha, double chi) {
    if (n_c < 0 || n_d < 0) throw std::domain_error("povm: photon counts must be nonnegative");
    if (alpha < 0.0) throw std::domain_error("povm: alpha must be nonnegative");
    const double c = std::cos(chi);
    const double s = std::sin(chi);
    constexpr double ninf = -std::numeric_limits<double>::infinity();
    const int n = n_c + n_d;
    if ((n_c > 0 && c == 0.0) || (n_d > 0 && std::abs(s) == 0.0) || (n > 0 && alpha == 0.0)) return {ninf, 0.0};
    double l = -0.5 * alpha * alpha - 0.5 * (std::lgamma(n_c + 1.0) + std::lgamma(n_d + 1.0));
    if (n > 0) l += n * std::log(alpha);
    if (n_c > 0) l += n_c * std::log(std::abs(c));
    if (n_d > 0) l += n_d * std::log(std::abs(s));
    double sign = 1.0;
    if (c < 0.0 && n_c % 2 == 1) sign = -sign;
    if (s < 0.0 && n_d % 2 == 1) sign = -sign;
    return {l, sign};
}

inline double povm_modulation(int n_c, int n_d, double alpha, double chi) {
    const SignedLog sl = povm_log_modulation(n_c, n_d, alpha, chi);
    return sl.sign == 0.0 ? 0.0 : sl.sign * std::exp(sl.log_abs);
}

struct PovmKernel {
    int n_c = 0;
    int n_d = 0;
    double tau = 0.0;
    double alpha = 0.0;

    static double chi(int n_atoms, int k1, int k2, double tau) { return (k1 - k2 + n_atoms) * tau; }
};

//! Diagonal weight of M_{nc,nd} on |k1, k2>.
inline double povm_weight(const PovmKernel& kernel, int n_atoms, int k1, int k2) {
    if (k1 < 0 || k1 > n_atoms || k2 < 0 || k2 > n_atoms) throw std::domain_error("povm_weight: index out of range");
    return povm_modulation(kernel.n_c, kernel.n_d, kernel.alpha, PovmKernel::chi(n_atoms, k1, k2, kernel.tau));
}

inline int povm_truncation(double alpha) { return static_cast<int>(std::ceil(alpha * alpha + 8.0 * alpha)); }

//! Sum over n_c + n_d <= K of C^2 at a fixed chi. Terms below e^-60 of the
//! largest are skipped; they cannot move the sum at the tested precision.
inline double povm_completeness_sum(double alpha, double chi, int k_max) {
    const double c2 = std::cos(chi) * std::cos(chi);
    const double s2 = std::sin(chi) * std::sin(chi);
    const double a2 = alpha * alpha;
    constexpr double cutoff = 60.0;
    double total = 0.0;
    for (int n = 0; n <= k_max; ++n) {
        const double log_poisson = (n == 0 ? 0.0 : n * std::log(a2)) - a2 - std::lgamma(n + 1.0);
        if (log_poisson < -cutoff) continue;
        if (s2 == 0.0 || c2 == 0.0) {
            // Only the split with all photons in the bright port survives.
            const int nc = s2 == 0.0 ? n : 0;
            total += std::exp(2.0 * povm_log_modulation(nc, n - nc, alpha, chi).log_abs);
            continue;
        }
        const int mode = std::clamp(static_cast<int>(std::floor((n + 1) * c2)), 0, n);
        const double log_peak = 2.0 * povm_log_modulation(mode, n - mode, alpha, chi).log_abs;
        const double ratio_up = c2 / s2;
        double inner = 1.0;
        double t = 1.0;
        for (int nc = mode; nc < n; ++nc) {
            t *= ratio_up * (n - nc) / (nc + 1.0);
            inner += t;
            if (t < std::exp(-cutoff)) break;
        }
        t = 1.0;
        for (int nc = mode; nc > 0; --nc) {
            t *= (nc / ratio_up) / (n - nc + 1.0);
            inner += t;
            if (t < std::exp(-cutoff)) break;
        }
        total += std::exp(log_peak) * inner;
    }
    return total;
}

//! max over joint indices of |sum C^2 - 1| under truncation K = alpha^2 + 8 alpha.
inline double povm_completeness_deviation(int n_atoms, double tau, double alpha) {
    const int k_max = povm_truncation(alpha);
    double worst = 0.0;
    for (int delta = -n_atoms; delta <= n_atoms; ++delta)
        worst = std::max(worst, std::abs(povm_completeness_sum(alpha, (n_atoms - delta) * tau, k_max) - 1.0));
    return worst;
}

//! Delta read off the photon counts, assuming chi in [0, pi/2] (tau <= pi/(4N)).
inline int delta_from_counts(int n_atoms, double tau, int n_c, int n_d) {
    const int n = n_c + n_d;
    if (n == 0) throw std::domain_error("delta_from_counts: no photons detected");
    const double chi = std::asin(std::sqrt(static_cast<double>(n_d) / n));
    const int delta = n_atoms - static_cast<int>(std::lround(chi / tau));
    return std::clamp(delta, -n_atoms, n_atoms);
}

struct PovmLimitEntry {
    int n_c;
    int n_d;
    int delta;
    double fidelity;
};

struct PovmLimitReport {
    int n_atoms;
    double alpha;
    double tau;
    std::vector<PovmLimitEntry> entries;
    double min_fidelity;
    double completeness_deviation;
};

//! Compares normalized POVM-collapsed states with P_Delta^z-collapsed states
//! on the pair |pi/2,0> (x) |pi/2,0>, for photon counts within two standard
//! deviations of the peak of every Delta sector with weight above 1e-6.
inline PovmLimitReport povm_projector_limit_check(int n_atoms, double alpha, double tau = 0.0) {
    if (n_atoms < 1) throw std::domain_error("povm_projector_limit_check: N must be positive");
    if (tau == 0.0) tau = std::numbers::pi / (4.0 * n_atoms);
    const EnsembleState c = make_spin_coherent(n_atoms, BlochAngles::make(std::numbers::pi / 2.0, 0.0));
    const PairState pair = PairState::product(c, c);
    const Mat& m = pair.amplitudes();

    PovmLimitReport rep{n_atoms, alpha, tau, {}, 1.0, povm_completeness_deviation(n_atoms, tau, alpha)};
    const double a2 = alpha * alpha;
    for (int delta = -n_atoms; delta <= n_atoms; ++delta) {
        const PairProjection proj = qnd_project_pair(pair, {delta, Basis::Z});
        if (proj.probability < 1e-6) continue;
        const double chi = (n_atoms - delta) * tau;
        const double s2 = std::sin(chi) * std::sin(chi);
        for (int i = -2; i <= 2; ++i) {
            const int n = std::max(1, static_cast<int>(std::lround(a2 + i * alpha)));
            const double sd = std::sqrt(n * s2 * (1.0 - s2));
            for (int j = -2; j <= 2; ++j) {
                const int nd = std::clamp(static_cast<int>(std::lround(n * s2 + j * sd)), 0, n);
                const PovmKernel ker{n - nd, nd, tau, alpha};
                // Weights are rescaled by their largest value on the support; in the
                // sharp limit the raw products underflow.
                Eigen::MatrixXd logs(n_atoms + 1, n_atoms + 1);
                Eigen::MatrixXd signs(n_atoms + 1, n_atoms + 1);
                double top = -std::numeric_limits<double>::infinity();
                for (int k1 = 0; k1 <= n_atoms; ++k1)
                    for (int k2 = 0; k2 <= n_atoms; ++k2) {
                        const SignedLog sl =
                            povm_log_modulation(ker.n_c, ker.n_d, alpha, PovmKernel::chi(n_atoms, k1, k2, tau));
                        logs(k1, k2) = sl.log_abs;
                        signs(k1, k2) = sl.sign;
                        if (sl.sign != 0.0 && std::abs(m(k1, k2)) > 0.0) top = std::max(top, sl.log_abs);
                    }
                Mat collapsed = Mat::Zero(n_atoms + 1, n_atoms + 1);
                if (std::isfinite(top))
                    for (int k1 = 0; k1 <= n_atoms; ++k1)
                        for (int k2 = 0; k2 <= n_atoms; ++k2)
                            if (signs(k1, k2) != 0.0)
                                collapsed(k1, k2) = m(k1, k2) * signs(k1, k2) * std::exp(logs(k1, k2) - top);
                const int inferred = delta_from_counts(n_atoms, tau, ker.n_c, ker.n_d);
                const Mat target = qnd_project_pair(pair, {inferred, Basis::Z}).branch.amplitudes();
                const double na = collapsed.norm();
                const double nb = target.norm();
                const double fid = (na > 0.0 && nb > 0.0)
                                       ? std::norm(collapsed.conjugate().cwiseProduct(target).sum()) / (na * na * nb * nb)
                                       : 0.0;
                rep.entries.push_back({ker.n_c, ker.n_d, delta, fid});
                rep.min_fidelity = std::min(rep.min_fidelity, fid);
            }
        }
    }
    return rep;
}

}  // namespace spintel
