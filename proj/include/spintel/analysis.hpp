#pragma once

// Statistics over outcome sets, the classical estimation bound, the c(Delta)
// attenuation coefficient and x-dephasing of the teleported spin.

#include "spintel/quadrature.hpp"
#include "spintel/spin_core.hpp"
#include "spintel/teleport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace spintel {

struct TeleportStats {
    SpinVector avg_spin;
    BlochAngles avg_angles;
    double eps_tel = 0.0;
    double dtheta = 0.0;
    double dphi = 0.0;
    double total_probability = 0.0;
};

inline double tel_error(BlochAngles ref, BlochAngles avg) {
    const auto a = ref.unit_vector();
    const auto b = avg.unit_vector();
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return 0.5 * std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline BlochAngles angles_of(SpinVector s, int n_atoms) {
    return {std::acos(std::clamp(s.sz / n_atoms, -1.0, 1.0)), wrap_phi(std::atan2(s.sy, s.sx))};
}

inline double qse_bound(int n_atoms) {
    if (n_atoms < 0) throw std::domain_error("qse_bound: N must be nonnegative");
    return 1.0 / std::sqrt(n_atoms + 2.0);
}

//! Weighted statistics; weights must sum to one within 1e-9.
inline TeleportStats aggregate_weighted(std::span<const OutcomeRecord> recs, std::span<const double> w,
                                        BlochAngles ref) {
    if (recs.empty()) throw std::domain_error("aggregate: empty outcome list");
    if (recs.size() != w.size()) throw std::domain_error("aggregate: weight count mismatch");
    const int n = recs.front().n_atoms;
    TeleportStats st;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        st.total_probability += w[i];
        st.avg_spin += w[i] * recs[i].tel_spin;
    }
    if (std::abs(st.total_probability - 1.0) > 1e-9)
        throw ContractViolation("aggregate: probabilities do not sum to one");
    st.avg_angles = angles_of(st.avg_spin, n);
    st.eps_tel = tel_error(ref, st.avg_angles);

    const double ct = std::cos(ref.theta), sth = std::sin(ref.theta);
    const double cp = std::cos(ref.phi), sp = std::sin(ref.phi);
    auto s_theta = [&](SpinVector s) { return (ct * cp * s.sx + ct * sp * s.sy - sth * s.sz) / n; };
    auto s_phi = [&](SpinVector s) { return (-sp * s.sx + cp * s.sy) / n; };

    double mt = 0.0, mp = 0.0, wp = 0.0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        mt += w[i] * s_theta(recs[i].tel_spin);
        if (recs[i].phi_defined) {
            mp += w[i] * s_phi(recs[i].tel_spin);
            wp += w[i];
        }
    }
    if (wp > 0.0) mp /= wp;
    double vt = 0.0, vp = 0.0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const double a = s_theta(recs[i].tel_spin) - mt;
        vt += w[i] * a * a;
        if (recs[i].phi_defined) {
            const double b = s_phi(recs[i].tel_spin) - mp;
            vp += w[i] * b * b;
        }
    }
    st.dtheta = std::sqrt(std::max(0.0, vt));
    st.dphi = wp > 0.0 ? std::sqrt(std::max(0.0, vp / wp)) : 0.0;
    return st;
}

inline TeleportStats aggregate(std::span<const OutcomeRecord> recs, BlochAngles ref) {
    std::vector<double> w;
    w.reserve(recs.size());
    for (const auto& r : recs) w.push_back(r.probability);
    return aggregate_weighted(recs, w, ref);
}

//! Sum form: sum over k' of (2k' - N)(2k' + 2 Delta - N) / N^2.
inline double c_coefficient(int n_atoms, int delta) {
    if (std::abs(delta) > n_atoms) throw std::domain_error("c_coefficient: |Delta| > N");
    long long acc = 0;
    for (int kp = std::max(0, -delta); kp <= std::min(n_atoms, n_atoms - delta); ++kp)
        acc += static_cast<long long>(2 * kp - n_atoms) * (2 * kp + 2 * delta - n_atoms);
    return static_cast<double>(acc) / (static_cast<double>(n_atoms) * n_atoms);
}

//! Root form (2/3)(|D| - D+)(|D| - D-)(|D| - N - 1), divided by N^2 so that it
//! coincides with the sum form.
inline double c_coefficient_factored(int n_atoms, int delta) {
    const double a = std::abs(delta);
    const double n = n_atoms;
    return (2.0 / 3.0) * (a - delta_plus(n_atoms)) * (a - delta_minus(n_atoms)) * (a - n - 1.0) / (n * n);
}

// ---------------------------------------------------------------------------
// Dephasing

struct DephasingChannel {
    double gamma_t = 0.0;
    int quadrature_order = 64;

    void validate() const {
        if (!(gamma_t >= 0.0)) throw std::domain_error("DephasingChannel: gamma_t must be >= 0");
        if (quadrature_order < 8) throw std::domain_error("DephasingChannel: quadrature order must be >= 8");
    }
    double yz_damping() const { return std::exp(-2.0 * gamma_t); }
};

//! (S^x, e^{-2 gamma t} S^y, e^{-2 gamma t} S^z) of the teleported spin.
inline SpinVector dephase_closed_form(const OutcomeRecord& rec, const DephasingChannel& ch) {
    ch.validate();
    const double d = ch.yz_damping();
    return {rec.tel_spin.sx, d * rec.tel_spin.sy, d * rec.tel_spin.sz};
}

struct DephasedOutcome {
    double probability = 0.0;
    SpinVector tel_spin;
};

//! Gauss-Hermite evaluation of the stochastic x-rotation on psi0 (angle
//! xi ~ N(0, gamma t)) with the remaining Gaussian integrals taken exactly,
//! which leaves a factor e^{-3 gamma t / 2} on the teleported y and z.
class DephasingOracle {
public:
    DephasingOracle(const InitialConfig& cfg, Protocol protocol, const DephasingChannel& ch)
        : protocol_(protocol), ch_(ch) {
        ch_.validate();
        const QuadratureRule gh = gauss_hermite(ch_.quadrature_order);
        const double scale = std::sqrt(2.0 * ch_.gamma_t);
        for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
            const double xi = scale * gh.nodes[i];
            weights_.push_back(gh.weights[i] / std::sqrt(std::numbers::pi));
            EnsembleState rotated = apply_rotation(cfg.psi0, {1.0, 0.0, 0.0}, xi).normalized();
            nodes_.emplace_back(InitialConfig(std::move(rotated)));
        }
    }

    DephasedOutcome outcome(std::array<int, 3> idx) const {
        DephasedOutcome out;
        SpinVector acc;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const OutcomeRecord r = protocol_ == Protocol::I
                                        ? nodes_[i].protocol1_branch(idx[0], idx[1], idx[2]).record
                                        : nodes_[i].protocol2_branch(idx[0], idx[1]).record;
            out.probability += weights_[i] * r.probability;
            acc += (weights_[i] * r.probability) * r.tel_spin;
        }
        if (out.probability > 0.0) out.tel_spin = damp((1.0 / out.probability) * acc);
        return out;
    }

    //! Outcome-averaged dephased teleported spin.
    SpinVector average() const {
        SpinVector acc;
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            for (const auto& r : nodes_[i].enumerate(protocol_)) acc += (weights_[i] * r.probability) * r.tel_spin;
        return damp(acc);
    }

private:
    SpinVector damp(SpinVector s) const {
        const double f = std::exp(-1.5 * ch_.gamma_t);
        return {s.sx, f * s.sy, f * s.sz};
    }

    Protocol protocol_;
    DephasingChannel ch_;
    std::vector<double> weights_;
    std::vector<Teleporter> nodes_;
};

inline DephasedOutcome dephase_quadrature_oracle(const InitialConfig& cfg, Protocol protocol, std::array<int, 3> idx,
                                                 const DephasingChannel& ch) {
    return DephasingOracle(cfg, protocol, ch).outcome(idx);
}

inline SpinVector dephased_average_closed(std::span<const OutcomeRecord> recs, const DephasingChannel& ch) {
    SpinVector acc;
    for (const auto& r : recs) acc += r.probability * dephase_closed_form(r, ch);
    return acc;
}

enum class DephasingMethod { ClosedForm, Quadrature };

struct ScanRow {
    Protocol protocol;
    int n_atoms;
    double theta0;
    double phi0;
    double gamma_t;
    double eps;
};

//! Cell-centred polar grid (i + 1/2) pi / m; exact poles are avoided because
//! acos(S^z/N) is ill-conditioned there.
inline std::vector<double> theta_grid(int m) {
    std::vector<double> g;
    for (int i = 0; i < m; ++i) g.push_back((i + 0.5) * std::numbers::pi / m);
    return g;
}

inline std::vector<ScanRow> dephased_error_scan(Protocol protocol, std::span<const int> ns, std::span<const double> thetas,
                                                std::span<const double> phis, std::span<const double> gammas,
                                                DephasingMethod method = DephasingMethod::ClosedForm,
                                                int quadrature_order = 64) {
    if (ns.empty() || thetas.empty() || phis.empty() || gammas.empty())
        throw std::domain_error("dephased_error_scan: empty grid");
    std::vector<ScanRow> rows;
    for (int n : ns)
        for (double th : thetas)
            for (double ph : phis) {
                const BlochAngles ref = BlochAngles::make(th, ph);
                const InitialConfig cfg = InitialConfig::coherent(n, ref);
                std::vector<OutcomeRecord> recs;
                if (method == DephasingMethod::ClosedForm) recs = enumerate(cfg, protocol);
                for (double g : gammas) {
                    const DephasingChannel ch{g, quadrature_order};
                    const SpinVector avg = method == DephasingMethod::ClosedForm
                                               ? dephased_average_closed(recs, ch)
                                               : DephasingOracle(cfg, protocol, ch).average();
                    rows.push_back({protocol, n, th, ph, g, tel_error(ref, angles_of(avg, n))});
                }
            }
    return rows;
}

}  // namespace spintel

namespace spintel {

//! Record with the closed-form dephased teleported spin and refreshed angles.
inline OutcomeRecord dephase_record(OutcomeRecord rec, const DephasingChannel& ch) {
    rec.tel_spin = dephase_closed_form(rec, ch);
    const BlochAngles a = angles_of(rec.tel_spin, rec.n_atoms);
    rec.tel_angles.theta = a.theta;
    if (rec.phi_defined) rec.tel_angles.phi = a.phi;
    return rec;
}

//! Q(theta_i, phi_j) on a tensor grid; rows follow thetas.
inline Eigen::MatrixXd q_grid(const EnsembleState& state, std::span<const double> thetas, std::span<const double> phis) {
    const int n = state.n_atoms();
    Eigen::MatrixXd q(static_cast<Eigen::Index>(thetas.size()), static_cast<Eigen::Index>(phis.size()));
    Mat phase(n + 1, static_cast<Eigen::Index>(phis.size()));
    for (std::size_t j = 0; j < phis.size(); ++j)
        for (int k = 0; k <= n; ++k) phase(k, static_cast<Eigen::Index>(j)) = std::polar(1.0, -0.5 * phis[j] * (n - 2 * k));
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        // |<theta,phi|v>|: magnitudes from the phi = 0 coherent state, phases per column.
        const Vec mag = make_spin_coherent(n, {thetas[i], 0.0}).amplitudes();
        const Vec w = mag.conjugate().cwiseProduct(state.amplitudes());
        const Eigen::RowVectorXcd row = w.transpose() * phase;
        q.row(static_cast<Eigen::Index>(i)) = row.cwiseAbs2();
    }
    return q;
}

struct QPeak {
    double theta;
    double phi;
    double q;
};

//! Local maxima of Q on a (n_theta x n_phi) grid, periodic in phi, keeping
//! peaks above rel_threshold times the global maximum.
inline std::vector<QPeak> q_local_maxima(const EnsembleState& state, int n_theta, int n_phi, double rel_threshold) {
    std::vector<double> th, ph;
    for (int i = 0; i < n_theta; ++i) th.push_back(std::numbers::pi * i / (n_theta - 1));
    for (int j = 0; j < n_phi; ++j) ph.push_back(-std::numbers::pi + 2.0 * std::numbers::pi * (j + 1) / n_phi);
    const Eigen::MatrixXd q = q_grid(state, th, ph);
    const double top = q.maxCoeff();
    std::vector<QPeak> peaks;
    for (int i = 1; i + 1 < n_theta; ++i)
        for (int j = 0; j < n_phi; ++j) {
            const double v = q(i, j);
            if (v < rel_threshold * top) continue;
            bool is_max = true;
            for (int di = -1; di <= 1 && is_max; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const double u = q(i + di, (j + dj + n_phi) % n_phi);
                    if (u > v || (u == v && (di < 0 || (di == 0 && dj < 0)))) {
                        is_max = false;
                        break;
                    }
                }
            if (is_max) peaks.push_back({th[i], ph[j], v});
        }
    return peaks;
}

}  // namespace spintel
