#pragma once

//! Protocols I and II: branch states on ensemble 3, outcome probabilities,
//! corrections and Bloch angles of the teleported spin.
//!
//! Ensemble 1 holds psi0, ensembles 2 and 3 share the maximally entangled
//! state. Protocol I: z-QND on (1,2) with outcome Delta, then x-basis number
//! measurements k1, k2. Protocol II: z-QND (Delta1) then x-QND (Delta2).

#include "spintel/random.hpp"
#include "spintel/spin_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace spintel {

enum class Protocol { I, II };

inline const char* to_string(Protocol p) { return p == Protocol::I ? "I" : "II"; }

struct InitialConfig {
    EnsembleState psi0;

    explicit InitialConfig(EnsembleState s) : psi0(std::move(s)) {
        if (std::abs(psi0.norm2() - 1.0) > 1e-9) throw ContractViolation("InitialConfig: psi0 must be normalized");
    }

    static InitialConfig coherent(int n_atoms, BlochAngles a) { return InitialConfig(make_spin_coherent(n_atoms, a)); }
    int n_atoms() const { return psi0.n_atoms(); }
};

//! Coherent state followed by the one-axis twist exp(i (S^z)^2 / (2N)).
inline EnsembleState make_twisted_coherent(int n_atoms, BlochAngles a) {
    Vec v = make_spin_coherent(n_atoms, a).amplitudes();
    for (int k = 0; k <= n_atoms; ++k) {
        const double sz = 2.0 * k - n_atoms;
        v[k] *= std::polar(1.0, sz * sz / (2.0 * n_atoms));
    }
    return {n_atoms, std::move(v)};
}

//! Heaviside step with H(0) = 1.
inline int heaviside(double x) { return x >= 0.0 ? 1 : 0; }

//! Positive root of c(Delta): (-N - 1 + sqrt(3N^2 + 6N + 1)) / 2.
inline double delta_plus(int n_atoms) {
    const double n = n_atoms;
    return 0.5 * (-n - 1.0 + std::sqrt(3.0 * n * n + 6.0 * n + 1.0));
}

inline double delta_minus(int n_atoms) {
    const double n = n_atoms;
    return 0.5 * (-n - 1.0 - std::sqrt(3.0 * n * n + 6.0 * n + 1.0));
}

//! Correction applied to the raw ensemble-3 spin: sign on x,y and an additive z shift.
struct Correction {
    double sign = 1.0;
    double z_shift = 0.0;

    SpinVector apply(SpinVector raw) const { return {sign * raw.sx, sign * raw.sy, raw.sz + z_shift}; }
};

//! Deliberate correction faults, used only to check that validation catches them.
enum class Fault { None, SignFlip };

struct OutcomeRecord {
    Protocol protocol = Protocol::I;
    int n_atoms = 0;
    std::array<int, 3> indices{};  // (Delta, k1, k2) or (Delta1, Delta2, unused)
    double probability = 0.0;
    SpinVector raw_spin;
    SpinVector tel_spin;
    BlochAngles tel_angles;
    BlochAngles uncorrected_angles;
    bool phi_defined = false;
};

struct BranchedState {
    int n_atoms = 0;
    std::vector<int> labels;  // k' for Protocol II; a single 0 for Protocol I
    std::vector<Vec> branches;

    double probability() const {
        double p = 0.0;
        for (const auto& b : branches) p += b.squaredNorm();
        return p;
    }

    Mat density() const {
        Mat rho = Mat::Zero(n_atoms + 1, n_atoms + 1);
        for (const auto& b : branches) rho += b * b.adjoint();
        return rho;
    }

    SpinVector moments() const {
        SpinVector s;
        for (const auto& b : branches) s += spin_moments(b);
        return s;
    }
};

inline Correction protocol1_correction(int n_atoms, int delta, int k1, int k2) {
    const int flips = heaviside(2.0 * k1 - n_atoms) + heaviside(2.0 * k2 - n_atoms);
    return {flips % 2 == 0 ? 1.0 : -1.0, -2.0 * delta};
}

inline Correction protocol2_correction(int n_atoms, int delta1, int delta2) {
    const int flips = heaviside(std::abs(delta2) - delta_plus(n_atoms));
    return {flips % 2 == 0 ? 1.0 : -1.0, -2.0 * delta1};
}

namespace detail {

inline bool phi_is_defined(SpinVector raw, int n_atoms) {
    const double tol = 1e-12 * n_atoms;
    return std::abs(raw.sx) > tol || std::abs(raw.sy) > tol;
}

inline OutcomeRecord finish_record(Protocol protocol, int n_atoms, std::array<int, 3> idx, const BranchedState& b,
                                   Correction corr, Fault fault) {
    OutcomeRecord rec;
    rec.protocol = protocol;
    rec.n_atoms = n_atoms;
    rec.indices = idx;
    rec.probability = b.probability();
    if (rec.probability > 0.0) rec.raw_spin = (1.0 / rec.probability) * b.moments();
    if (fault == Fault::SignFlip) corr.sign = -corr.sign;
    rec.tel_spin = corr.apply(rec.raw_spin);
    rec.phi_defined = rec.probability > 0.0 && phi_is_defined(rec.raw_spin, n_atoms);
    const double n = n_atoms;
    rec.tel_angles.theta = std::acos(std::clamp(rec.tel_spin.sz / n, -1.0, 1.0));
    rec.uncorrected_angles.theta = std::acos(std::clamp(rec.raw_spin.sz / n, -1.0, 1.0));
    if (rec.phi_defined) {
        rec.tel_angles.phi = wrap_phi(std::atan2(rec.tel_spin.sy, rec.tel_spin.sx));
        rec.uncorrected_angles.phi = wrap_phi(std::atan2(rec.raw_spin.sy, rec.raw_spin.sx));
    }
    return rec;
}

}  // namespace detail

struct Branch {
    BranchedState state;
    OutcomeRecord record;
};

//! Holds psi0 and the rotation matrix R so that many branches can share them.
class Teleporter {
public:
    explicit Teleporter(InitialConfig cfg, Fault fault = Fault::None)
        : cfg_(std::move(cfg)), r_(r_matrix_real(cfg_.n_atoms())), fault_(fault) {}

    int n_atoms() const { return cfg_.n_atoms(); }
    const InitialConfig& config() const { return cfg_; }

    Branch protocol1_branch(int delta, int k1, int k2) const {
        const int n = n_atoms();
        if (std::abs(delta) > n || k1 < 0 || k1 > n || k2 < 0 || k2 > n)
            throw std::domain_error("protocol1_branch: index out of range");
        const double scale = 1.0 / std::sqrt(n + 1.0);
        Vec v = Vec::Zero(n + 1);
        for (int k = std::max(0, -delta); k <= std::min(n, n - delta); ++k)
            v[k + delta] = cfg_.psi0[k] * (r_(k1, k) * r_(k2, k + delta) * scale);
        BranchedState b{n, {0}, {std::move(v)}};
        OutcomeRecord rec = detail::finish_record(Protocol::I, n, {delta, k1, k2}, b,
                                                  protocol1_correction(n, delta, k1, k2), fault_);
        return {std::move(b), rec};
    }

    Branch protocol2_branch(int delta1, int delta2) const {
        const int n = n_atoms();
        if (std::abs(delta1) > n || std::abs(delta2) > n) throw std::domain_error("protocol2_branch: index out of range");
        const double scale = 1.0 / std::sqrt(n + 1.0);
        BranchedState b{n, {}, {}};
        for (int kp = std::max(0, -delta2); kp <= std::min(n, n - delta2); ++kp) {
            Vec v = Vec::Zero(n + 1);
            for (int k = std::max(0, -delta1); k <= std::min(n, n - delta1); ++k)
                v[k + delta1] = cfg_.psi0[k] * (r_(kp, k) * r_(kp + delta2, k + delta1) * scale);
            b.labels.push_back(kp);
            b.branches.push_back(std::move(v));
        }
        OutcomeRecord rec = detail::finish_record(Protocol::II, n, {delta1, delta2, 0}, b,
                                                  protocol2_correction(n, delta1, delta2), fault_);
        return {std::move(b), rec};
    }

    //! All (Delta, k1, k2), Delta outermost, then k1, then k2.
    std::vector<OutcomeRecord> protocol1_enumerate() const {
        const int n = n_atoms();
        std::vector<OutcomeRecord> out;
        out.reserve(static_cast<std::size_t>(2 * n + 1) * (n + 1) * (n + 1));
        for (int d = -n; d <= n; ++d)
            for (int k1 = 0; k1 <= n; ++k1)
                for (int k2 = 0; k2 <= n; ++k2) out.push_back(protocol1_branch(d, k1, k2).record);
        return out;
    }

    //! All (Delta1, Delta2), Delta1 outermost.
    std::vector<OutcomeRecord> protocol2_enumerate() const {
        const int n = n_atoms();
        std::vector<OutcomeRecord> out;
        out.reserve(static_cast<std::size_t>(2 * n + 1) * (2 * n + 1));
        for (int d1 = -n; d1 <= n; ++d1)
            for (int d2 = -n; d2 <= n; ++d2) out.push_back(protocol2_branch(d1, d2).record);
        return out;
    }

    std::vector<OutcomeRecord> enumerate(Protocol p) const {
        return p == Protocol::I ? protocol1_enumerate() : protocol2_enumerate();
    }

    //! Marginal of the first QND outcome; identical for both protocols.
    std::vector<double> delta_marginal() const {
        const int n = n_atoms();
        std::vector<double> p(2 * n + 1, 0.0);
        for (int d = -n; d <= n; ++d) {
            for (int k = std::max(0, -d); k <= std::min(n, n - d); ++k) p[d + n] += std::norm(cfg_.psi0[k]);
            p[d + n] /= n + 1.0;
        }
        return p;
    }

private:
    InitialConfig cfg_;
    Eigen::MatrixXd r_;
    Fault fault_;
};

inline Branch protocol1_branch(const InitialConfig& cfg, int delta, int k1, int k2) {
    return Teleporter(cfg).protocol1_branch(delta, k1, k2);
}
inline Branch protocol2_branch(const InitialConfig& cfg, int delta1, int delta2) {
    return Teleporter(cfg).protocol2_branch(delta1, delta2);
}
inline std::vector<OutcomeRecord> protocol1_enumerate(const InitialConfig& cfg) {
    return Teleporter(cfg).protocol1_enumerate();
}
inline std::vector<OutcomeRecord> protocol2_enumerate(const InitialConfig& cfg) {
    return Teleporter(cfg).protocol2_enumerate();
}
inline std::vector<OutcomeRecord> enumerate(const InitialConfig& cfg, Protocol p) { return Teleporter(cfg).enumerate(p); }

enum class SamplingScheme { Joint, Sequential };

//! Born-rule draws of outcome records. Joint draws one index of the full
//! enumeration; Sequential draws the first QND outcome from its marginal and
//! then the remaining indices from the conditional distribution.
class OutcomeSampler {
public:
    OutcomeSampler(const InitialConfig& cfg, Protocol protocol, std::uint64_t seed,
                   SamplingScheme scheme = SamplingScheme::Joint)
        : tp_(cfg), protocol_(protocol), scheme_(scheme), rng_(seed) {
        if (scheme_ == SamplingScheme::Joint) {
            table_ = tp_.enumerate(protocol_);
            for (const auto& r : table_) weights_.push_back(r.probability);
        } else {
            marginal_ = tp_.delta_marginal();
        }
    }

    OutcomeRecord draw() {
        if (scheme_ == SamplingScheme::Joint) return table_[rng_.pick(weights_)];
        const int n = tp_.n_atoms();
        const int d = static_cast<int>(rng_.pick(marginal_)) - n;
        std::vector<OutcomeRecord> cond;
        if (protocol_ == Protocol::I) {
            for (int k1 = 0; k1 <= n; ++k1)
                for (int k2 = 0; k2 <= n; ++k2) cond.push_back(tp_.protocol1_branch(d, k1, k2).record);
        } else {
            for (int d2 = -n; d2 <= n; ++d2) cond.push_back(tp_.protocol2_branch(d, d2).record);
        }
        std::vector<double> w;
        for (const auto& r : cond) w.push_back(r.probability);
        return cond[rng_.pick(w)];
    }

private:
    Teleporter tp_;
    Protocol protocol_;
    SamplingScheme scheme_;
    Rng rng_;
    std::vector<OutcomeRecord> table_;
    std::vector<double> weights_;
    std::vector<double> marginal_;
};

inline OutcomeRecord sample_run(const InitialConfig& cfg, Protocol protocol, std::uint64_t seed) {
    return OutcomeSampler(cfg, protocol, seed).draw();
}

}  // namespace spintel
