#pragma once

// Maximally entangled pair state and its adaptive QND preparation.

#include "spintel/measurement.hpp"
#include "spintel/random.hpp"
#include "spintel/spin_core.hpp"

#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

namespace spintel {

inline PairState max_entangled(int n_atoms) {
    if (n_atoms < 1) throw std::domain_error("max_entangled: N must be positive");
    return {n_atoms, Mat::Identity(n_atoms + 1, n_atoms + 1) / std::sqrt(n_atoms + 1.0)};
}

inline double fidelity_with_max_entangled(const PairState& s) {
    const double nn = s.norm2();
    if (nn == 0.0) return 0.0;
    return std::norm(s.amplitudes().trace()) / ((s.n_atoms() + 1.0) * nn);
}

inline std::vector<double> qnd_probabilities(const PairState& s) {
    const int n = s.n_atoms();
    std::vector<double> p(2 * n + 1, 0.0);
    const Mat& m = s.amplitudes();
    for (int k1 = 0; k1 <= n; ++k1)
        for (int k2 = 0; k2 <= n; ++k2) p[k2 - k1 + n] += std::norm(m(k1, k2));
    return p;
}

struct PrepStep {
    int round;
    Basis basis;
    int delta;
    double unitary_angle;  // y-rotation angle applied to the first ensemble
    double fidelity;
};

struct PrepTrace {
    std::vector<PrepStep> steps;
    double final_fidelity = 0.0;
};

struct PrepConfig {
    int max_rounds = 20;
    int sequence_cap = 25;
    std::optional<PairState> initial;
};

struct PrepResult {
    PairState state;
    PrepTrace trace;
    bool converged;
};

namespace detail {

// One adaptive sequence in the z frame: measure, rotate by -pi Delta / N about y, repeat.
// Returns true when it ended on Delta = 0.
inline bool adaptive_sequence(Mat& m, int n, int cap, Rng& rng, int round, Basis basis, const Mat& to_lab,
                              PrepTrace& trace) {
    for (int step = 0; step < cap; ++step) {
        const PairState cur(n, m);
        const std::vector<double> probs = qnd_probabilities(cur);
        const int delta = static_cast<int>(rng.pick(probs)) - n;
        m = detail::keep_diagonal_band(m, delta);
        m /= m.norm();
        double angle = 0.0;
        if (delta != 0) {
            angle = -std::numbers::pi * delta / n;
            m = y_rotation(n, angle).entries * m;
        }
        const PairState lab(n, to_lab * m * to_lab.transpose());
        trace.steps.push_back({round, basis, delta, angle, fidelity_with_max_entangled(lab)});
        if (delta == 0) return true;
    }
    return false;
}

}  // namespace detail

//! Alternates z- and x-basis adaptive sequences for max_rounds rounds.
inline PrepResult prep_adaptive(int n_atoms, std::uint64_t seed, const PrepConfig& cfg = {}) {
    if (cfg.max_rounds < 1) throw std::domain_error("prep_adaptive: max_rounds must be >= 1");
    if (cfg.sequence_cap < 1) throw std::domain_error("prep_adaptive: sequence_cap must be >= 1");
    PairState start = cfg.initial.value_or(PairState::product(
        make_spin_coherent(n_atoms, BlochAngles::make(std::numbers::pi / 2.0, 0.0)),
        make_spin_coherent(n_atoms, BlochAngles::make(std::numbers::pi / 2.0, 0.0))));
    if (start.n_atoms() != n_atoms) throw std::domain_error("prep_adaptive: initial state has wrong N");
    Mat m = start.normalized().amplitudes();

    const Mat r = r_matrix_real(n_atoms).cast<cplx>();  // W^dagger = R, W = R^T
    const Mat rt = r.transpose();
    const Mat id = Mat::Identity(n_atoms + 1, n_atoms + 1);
    Rng rng(seed);
    PrepTrace trace;
    bool last_z = false;
    bool last_x = false;
    for (int round = 0; round < cfg.max_rounds; ++round) {
        last_z = detail::adaptive_sequence(m, n_atoms, cfg.sequence_cap, rng, round, Basis::Z, id, trace);
        m = r * m * r.transpose();
        last_x = detail::adaptive_sequence(m, n_atoms, cfg.sequence_cap, rng, round, Basis::X, rt, trace);
        m = rt * m * r;
    }
    PairState out(n_atoms, m);
    trace.final_fidelity = fidelity_with_max_entangled(out);
    return {std::move(out), std::move(trace), last_z && last_x};
}

}  // namespace spintel
