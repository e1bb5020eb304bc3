#pragma once

// Closed-form approximations to the pi/2 rotation matrix and the
// approximate four-copy post-measurement state.

#include "spintel/spin_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spintel {

struct ApproxParams {
    int n_atoms;
    int k_prime;

    ApproxParams(int n, int kp) : n_atoms(n), k_prime(kp) {
        if (n < 1 || kp < 0 || kp > n) throw std::domain_error("ApproxParams: index out of range");
    }
};

inline int mode_number(int n_atoms, int k) { return std::min(k, n_atoms - k); }

inline double phi_angle(int n_atoms, int k_prime) {
    if (k_prime < 0 || k_prime > n_atoms) throw std::domain_error("phi_angle: index out of range");
    return std::acos(std::clamp(2.0 * k_prime / n_atoms - 1.0, -1.0, 1.0));
}

// k' + 1/2 - k'^2/N; symmetric under k' -> N - k'.
inline double oscillator_energy(int n_atoms, int k_prime) {
    return k_prime + 0.5 - static_cast<double>(k_prime) * k_prime / n_atoms;
}

inline double ho_energy(int n) { return n + 0.5; }

// Normalized Hermite function Phi_n(x) by upward recurrence.
inline double hermite_function(int n, double x) {
    double prev = 0.0;
    double cur = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    for (int j = 0; j < n; ++j) {
        const double next = x * std::sqrt(2.0 / (j + 1)) * cur - std::sqrt(static_cast<double>(j) / (j + 1)) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

// Harmonic-oscillator form of R_{k',k}. Row normalization uses the Jacobian
// (2/N)^{1/4} of x = (2k - N)/sqrt(2N).
inline double r_approx_ho(int n_atoms, int k_prime, int k) {
    const ApproxParams p(n_atoms, k_prime);
    if (k < 0 || k > n_atoms) throw std::domain_error("r_approx_ho: k out of range");
    // floor((N - k')/N + 1/2): nearest integer to 1 - k'/N, halves rounded up.
    const int r = (2 * (n_atoms - k_prime) + n_atoms) / (2 * n_atoms);
    const double sign = ((k * r) % 2 == 0) ? 1.0 : -1.0;
    const double x = (2.0 * k - n_atoms) / std::sqrt(2.0 * n_atoms);
    return sign * std::pow(2.0 / n_atoms, 0.25) * hermite_function(mode_number(n_atoms, p.k_prime), x);
}

inline bool wkb_allowed(int n_atoms, int k_prime, int k) {
    const double s = 2.0 * k - n_atoms;
    return s * s < 2.0 * (n_atoms + 2.0 * k_prime * n_atoms - 2.0 * k_prime * k_prime);
}

// Amplitude function of the WKB form as written, without normalization; 0 outside the allowed region.
inline double wkb_amplitude(int n_atoms, int k_prime, int k) {
    if (!wkb_allowed(n_atoms, k_prime, k)) return 0.0;
    const double s = 2.0 * k - n_atoms;
    const double q = (2.0 * (n_atoms + 2.0 * k_prime * n_atoms - 2.0 * k_prime * k_prime) - s * s) / n_atoms;
    return std::pow(q, -0.25);
}

inline double r_approx_wkb(int n_atoms, int k_prime, int k) {
    const ApproxParams p(n_atoms, k_prime);
    if (k < 0 || k > n_atoms) throw std::domain_error("r_approx_wkb: k out of range");
    const double a = wkb_amplitude(n_atoms, p.k_prime, k);
    if (a == 0.0) return 0.0;
    const double norm = 2.0 / (std::sqrt(std::numbers::pi) * std::pow(n_atoms, 0.25));
    const double arg = mode_number(n_atoms, k_prime) * std::numbers::pi / 2.0 +
                       phi_angle(n_atoms, k_prime) * (2.0 * k - n_atoms) / 2.0;
    return norm * a * std::cos(arg);
}

// T_Delta: |k> -> |k+Delta>, dropping indices that leave [0, N].
inline Vec shift(const Vec& v, int delta) {
    const int n = static_cast<int>(v.size()) - 1;
    Vec out = Vec::Zero(n + 1);
    for (int k = std::max(0, -delta); k <= std::min(n, n - delta); ++k) out[k + delta] = v[k];
    return out;
}

// Four z-rotated, Delta-shifted copies of psi0 keeping only the phase factors of R.
inline EnsembleState four_circle_state(const EnsembleState& psi0, int k1, int k2, int delta) {
    const int n = psi0.n_atoms();
    if (std::abs(delta) > n || k1 < 0 || k1 > n || k2 < 0 || k2 > n)
        throw std::domain_error("four_circle_state: index out of range");
    const double p1 = phi_angle(n, k1);
    const double p2 = phi_angle(n, k2);
    const double s1 = mode_number(n, k1) % 2 == 0 ? 1.0 : -1.0;
    const double s2 = mode_number(n, k2) % 2 == 0 ? 1.0 : -1.0;
    Vec out = Vec::Zero(n + 1);
    for (int k = std::max(0, -delta); k <= std::min(n, n - delta); ++k) {
        const double sp = 2.0 * (k + delta) - n;
        const cplx f = std::polar(1.0, -p1 * delta + (p1 + p2) * sp / 2.0) +
                       s1 * std::polar(1.0, p1 * delta - (p1 - p2) * sp / 2.0) +
                       s2 * std::polar(1.0, -p1 * delta + (p1 - p2) * sp / 2.0) +
                       s1 * s2 * std::polar(1.0, p1 * delta - (p1 + p2) * sp / 2.0);
        out[k + delta] = 0.5 * f * psi0[k];
    }
    return {n, std::move(out)};
}

}  // namespace spintel
