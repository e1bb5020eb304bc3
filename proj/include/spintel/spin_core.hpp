#pragma once

//! Dicke-basis representation of one ensemble of N qubits.
//!
//! Index k counts the a-mode occupation, so S^z|k> = (2k - N)|k>.
//! For N = 1 the ordering (k=0, k=1) is (down, up).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spintel {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

//! Raised when a numeric precondition (normalization, probability mass) fails.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct SpinVector {
    double sx = 0.0;
    double sy = 0.0;
    double sz = 0.0;

    double norm() const { return std::sqrt(sx * sx + sy * sy + sz * sz); }

    friend SpinVector operator+(SpinVector a, SpinVector b) { return {a.sx + b.sx, a.sy + b.sy, a.sz + b.sz}; }
    friend SpinVector operator-(SpinVector a, SpinVector b) { return {a.sx - b.sx, a.sy - b.sy, a.sz - b.sz}; }
    friend SpinVector operator*(double s, SpinVector a) { return {s * a.sx, s * a.sy, s * a.sz}; }
    SpinVector& operator+=(SpinVector o) { return *this = *this + o; }
};

inline double wrap_phi(double phi) {
    double w = std::remainder(phi, 2.0 * std::numbers::pi);
    if (w <= -std::numbers::pi) w += 2.0 * std::numbers::pi;
    return w;
}

struct BlochAngles {
    double theta = 0.0;
    double phi = 0.0;

    //! Validates finiteness, clamps theta to [0, pi] and wraps phi into (-pi, pi].
    static BlochAngles make(double theta, double phi) {
        if (!std::isfinite(theta) || !std::isfinite(phi))
            throw std::domain_error("BlochAngles: non-finite angle");
        return {std::clamp(theta, 0.0, std::numbers::pi), wrap_phi(phi)};
    }

    std::array<double, 3> unit_vector() const {
        return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
    }
};

enum class Axis { X, Y, Z };

inline double log_binomial(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

class EnsembleState {
public:
    EnsembleState(int n_atoms, Vec amplitudes) : n_(n_atoms), amp_(std::move(amplitudes)) {
        if (n_ < 1) throw std::domain_error("EnsembleState: N must be positive");
        if (amp_.size() != n_ + 1) throw std::domain_error("EnsembleState: length must be N+1");
    }

    int n_atoms() const { return n_; }
    const Vec& amplitudes() const { return amp_; }
    cplx operator[](int k) const { return amp_[k]; }
    double norm2() const { return amp_.squaredNorm(); }

    EnsembleState normalized() const {
        const double n = amp_.norm();
        if (n == 0.0) throw ContractViolation("EnsembleState: cannot normalize zero vector");
        return {n_, amp_ / n};
    }

private:
    int n_;
    Vec amp_;
};

inline EnsembleState make_dicke(int n_atoms, int k) {
    if (n_atoms < 1) throw std::domain_error("make_dicke: N must be positive");
    if (k < 0 || k > n_atoms) throw std::domain_error("make_dicke: k out of range");
    Vec v = Vec::Zero(n_atoms + 1);
    v[k] = 1.0;
    return {n_atoms, std::move(v)};
}

inline EnsembleState make_spin_coherent(int n_atoms, BlochAngles a) {
    if (n_atoms < 1) throw std::domain_error("make_spin_coherent: N must be positive");
    const double c = std::cos(a.theta / 2.0);
    const double s = std::sin(a.theta / 2.0);
    const double lc = std::log(std::abs(c));
    const double ls = std::log(std::abs(s));
    Vec v(n_atoms + 1);
    for (int k = 0; k <= n_atoms; ++k) {
        const int m = n_atoms - k;
        if ((k > 0 && c == 0.0) || (m > 0 && s == 0.0)) {
            v[k] = 0.0;
            continue;
        }
        double logmag = 0.5 * log_binomial(n_atoms, k);
        if (k > 0) logmag += k * lc;
        if (m > 0) logmag += m * ls;
        double sign = 1.0;
        if (c < 0.0 && k % 2 == 1) sign = -sign;
        if (s < 0.0 && m % 2 == 1) sign = -sign;
        const double phase = 0.5 * a.phi * (m - k);
        v[k] = sign * std::exp(logmag) * std::polar(1.0, phase);
    }
    return {n_atoms, std::move(v)};
}

//! <k+1|S^x|k> = sqrt((k+1)(N-k)).
inline double ladder_element(int n_atoms, int k) {
    return std::sqrt(static_cast<double>(k + 1) * static_cast<double>(n_atoms - k));
}

inline Mat spin_operator(int n_atoms, Axis axis) {
    Mat m = Mat::Zero(n_atoms + 1, n_atoms + 1);
    if (axis == Axis::Z) {
        for (int k = 0; k <= n_atoms; ++k) m(k, k) = 2.0 * k - n_atoms;
        return m;
    }
    for (int k = 0; k < n_atoms; ++k) {
        const double e = ladder_element(n_atoms, k);
        if (axis == Axis::X) {
            m(k + 1, k) = e;
            m(k, k + 1) = e;
        } else {
            m(k + 1, k) = cplx(0.0, -e);
            m(k, k + 1) = cplx(0.0, e);
        }
    }
    return m;
}

//! Unnormalized moments <v|S|v> using the tridiagonal structure.
inline SpinVector spin_moments(const Vec& v) {
    const int n = static_cast<int>(v.size()) - 1;
    SpinVector s;
    cplx off = 0.0;
    for (int k = 0; k <= n; ++k) {
        s.sz += std::norm(v[k]) * (2.0 * k - n);
        if (k < n) off += std::conj(v[k + 1]) * v[k] * ladder_element(n, k);
    }
    s.sx = 2.0 * off.real();
    s.sy = 2.0 * off.imag();
    return s;
}

inline SpinVector spin_expectation(const EnsembleState& state) {
    if (std::abs(state.norm2() - 1.0) > 1e-9)
        throw ContractViolation("spin_expectation: state is not normalized");
    return spin_moments(state.amplitudes());
}

//! exp(-i (axis . S) angle / 2) from the eigendecomposition of the Hermitian generator.
inline Mat rotation_operator(int n_atoms, std::array<double, 3> axis, double angle) {
    const double len = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
    if (std::abs(len - 1.0) > 1e-12) throw std::domain_error("rotation_operator: axis must be a unit vector");
    const Mat g = axis[0] * spin_operator(n_atoms, Axis::X) + axis[1] * spin_operator(n_atoms, Axis::Y) +
                  axis[2] * spin_operator(n_atoms, Axis::Z);
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    Vec phases(n_atoms + 1);
    for (int i = 0; i <= n_atoms; ++i) {
        // The spectrum of n.S is exactly {-N, -N+2, ..., N}.
        const double lam = 2.0 * std::round((es.eigenvalues()[i] + n_atoms) / 2.0) - n_atoms;
        phases[i] = std::polar(1.0, -0.5 * lam * angle);
    }
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline EnsembleState apply_rotation(const EnsembleState& state, std::array<double, 3> axis, double angle) {
    const int n = state.n_atoms();
    return {n, rotation_operator(n, axis, angle) * state.amplitudes()};
}

struct RotationMatrix {
    int n_atoms = 0;
    Mat entries;

    double unitarity_defect() const {
        const Mat d = entries.adjoint() * entries - Mat::Identity(n_atoms + 1, n_atoms + 1);
        return d.cwiseAbs().maxCoeff();
    }
};

//! <k'|exp(-i S^y theta/2)|k>, real for every theta.
inline RotationMatrix y_rotation(int n_atoms, double theta) {
    if (n_atoms < 1) throw std::domain_error("y_rotation: N must be positive");
    Mat d = rotation_operator(n_atoms, {0.0, 1.0, 0.0}, theta);
    return {n_atoms, d.real().cast<cplx>()};
}

//! R_{k',k} = <k'|^(x)|k>, with |k'>^(x) = exp(-i S^y pi/4)|k'>; real orthogonal.
inline Eigen::MatrixXd r_matrix_real(int n_atoms) {
    const Eigen::MatrixXd d = y_rotation(n_atoms, std::numbers::pi / 2.0).entries.real();
    Eigen::MatrixXd r = d.transpose();
    // Impose the reflection symmetry R_{N-k',k} = (-1)^k R_{k',k} exactly.
    Eigen::MatrixXd sym(n_atoms + 1, n_atoms + 1);
    for (int kp = 0; kp <= n_atoms; ++kp)
        for (int k = 0; k <= n_atoms; ++k) {
            const double flip = (k % 2 == 0) ? 1.0 : -1.0;
            sym(kp, k) = 0.5 * (r(kp, k) + flip * r(n_atoms - kp, k));
        }
    return sym;
}

inline RotationMatrix r_matrix(int n_atoms) { return {n_atoms, r_matrix_real(n_atoms).cast<cplx>()}; }

//! Q(theta, phi) = |<theta,phi|state>|^2 on the state as given (no normalization).
inline std::vector<double> q_function(const EnsembleState& state, std::span<const BlochAngles> grid) {
    std::vector<double> out;
    out.reserve(grid.size());
    for (const auto& a : grid) {
        const EnsembleState c = make_spin_coherent(state.n_atoms(), a);
        out.push_back(std::norm(c.amplitudes().dot(state.amplitudes())));
    }
    return out;
}

//! Phase-fixed copy: largest-magnitude amplitude made real-positive.
inline Vec fix_global_phase(const Vec& v) {
    Eigen::Index i = 0;
    v.cwiseAbs().maxCoeff(&i);
    if (std::abs(v[i]) == 0.0) return v;
    return v * (std::abs(v[i]) / v[i]);
}

//! |<a|b>| / (|a| |b|).
inline double overlap_fidelity(const Vec& a, const Vec& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::abs(a.dot(b)) / (na * nb);
}

}  // namespace spintel
