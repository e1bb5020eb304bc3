#pragma once

// Property suite behind `spintel validate`, plus independent reference
// formulas shared with the test binaries.

#include "spintel/analysis.hpp"
#include "spintel/entangle_prep.hpp"
#include "spintel/measurement.hpp"
#include "spintel/spin_core.hpp"
#include "spintel/teleport.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace spintel {

namespace oracle {

//! Wigner small-d alternating sum, d^j_{m'm}(beta) with j = N/2, m = k - N/2.
//! Cancellation makes it unusable past N ~ 30; reference only.
inline double wigner_d_sum(int n_atoms, int kp, int k, double beta) {
    const int jp_mp = kp, jm_mp = n_atoms - kp;  // j + m', j - m'
    const int jp_m = k, jm_m = n_atoms - k;      // j + m,  j - m
    const int dm = kp - k;                       // m' - m
    const double pre = 0.5 * (std::lgamma(jp_mp + 1.0) + std::lgamma(jm_mp + 1.0) + std::lgamma(jp_m + 1.0) +
                              std::lgamma(jm_m + 1.0));
    const double c = std::cos(beta / 2.0), s = std::sin(beta / 2.0);
    double sum = 0.0;
    for (int t = std::max(0, -dm); t <= std::min(jp_m, jm_mp); ++t) {
        const double den = std::lgamma(jp_m - t + 1.0) + std::lgamma(t + 1.0) + std::lgamma(dm + t + 1.0) +
                           std::lgamma(jm_mp - t + 1.0);
        const double sign = ((dm + t) % 2 == 0) ? 1.0 : -1.0;
        sum += sign * std::exp(pre - den) * std::pow(c, n_atoms - dm - 2 * t) * std::pow(s, dm + 2 * t);
    }
    return sum;
}

//! R_{k',k} from the alternating sum.
inline Eigen::MatrixXd r_matrix_sum(int n_atoms) {
    Eigen::MatrixXd r(n_atoms + 1, n_atoms + 1);
    for (int kp = 0; kp <= n_atoms; ++kp)
        for (int k = 0; k <= n_atoms; ++k) r(kp, k) = wigner_d_sum(n_atoms, k, kp, std::numbers::pi / 2.0);
    return r;
}

}  // namespace oracle

struct CheckResult {
    std::string name;
    bool passed;
    std::string detail;
};

namespace detail {

inline std::string fmt_value(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

inline CheckResult bound_check(std::string name, double value, double bound) {
    const bool ok = std::isfinite(value) && value <= bound;
    return {std::move(name), ok, "value " + fmt_value(value) + " bound " + fmt_value(bound)};
}

}  // namespace detail

//! Runs the invariant suite; `fault` perturbs the teleport corrections.
inline std::vector<CheckResult> run_validation(Fault fault = Fault::None) {
    std::vector<CheckResult> out;
    const double pi = std::numbers::pi;

    {
        const int n = 6;
        const Mat x = spin_operator(n, Axis::X), y = spin_operator(n, Axis::Y), z = spin_operator(n, Axis::Z);
        const double comm = (x * y - y * x - cplx(0.0, 2.0) * z).cwiseAbs().maxCoeff();
        const double cas = (x * x + y * y + z * z - double(n * (n + 2)) * Mat::Identity(n + 1, n + 1)).cwiseAbs().maxCoeff();
        out.push_back(detail::bound_check("spin algebra commutator", comm, 1e-10));
        out.push_back(detail::bound_check("spin algebra Casimir", cas, 1e-10));
    }
    {
        double worst = 0.0;
        for (int n = 1; n <= 12; ++n)
            worst = std::max(worst, (r_matrix_real(n) - oracle::r_matrix_sum(n)).cwiseAbs().maxCoeff());
        out.push_back(detail::bound_check("rotation matrix vs alternating sum", worst, 1e-10));
        out.push_back(detail::bound_check("rotation matrix unitarity N=40", r_matrix(40).unitarity_defect(), 1e-12));
    }
    for (Protocol p : {Protocol::I, Protocol::II}) {
        double comp = 0.0, eps = 0.0, dphi = 0.0;
        for (int n : {4, 7}) {
            for (auto [th, ph] : {std::pair{pi / 2, pi / 4}, std::pair{pi / 4, -pi / 2}, std::pair{2.0, 2.5}}) {
                const BlochAngles ref = BlochAngles::make(th, ph);
                const auto recs = Teleporter(InitialConfig::coherent(n, ref), fault).enumerate(p);
                double tot = 0.0;
                for (const auto& r : recs) tot += r.probability;
                comp = std::max(comp, std::abs(tot - 1.0));
                const TeleportStats st = aggregate(recs, ref);
                eps = std::max(eps, st.eps_tel);
                dphi = std::max(dphi, st.dphi);
            }
        }
        const std::string tag = std::string("protocol ") + to_string(p);
        out.push_back(detail::bound_check(tag + " completeness", comp, 1e-12));
        out.push_back(detail::bound_check(tag + " zero average error", eps, 1e-10));
        out.push_back(detail::bound_check(tag + " zero azimuthal spread", dphi, 1e-10));
    }
    {
        double worst = 0.0;
        const int n = 5;
        for (int k0 = 0; k0 <= n; ++k0)
            for (Protocol p : {Protocol::I, Protocol::II})
                for (const auto& r : Teleporter(InitialConfig(make_dicke(n, k0)), fault).enumerate(p))
                    if (r.probability > 0.0) worst = std::max(worst, std::abs(r.tel_spin.sz - (2.0 * k0 - n)));
        out.push_back(detail::bound_check("Dicke input S^z exactness", worst, 1e-12));
    }
    {
        const int n = 3;
        const InitialConfig cfg = InitialConfig::coherent(n, BlochAngles::make(1.1, 0.4));
        const Teleporter tp(cfg, fault);
        const DenseTriState dense = DenseTriState::compose(cfg.psi0, max_entangled(n));
        double worst = 0.0;
        for (int d1 = -n; d1 <= n; ++d1) {
            const auto z = qnd_project_dense(dense, {d1, Basis::Z});
            for (int d2 = -n; d2 <= n; ++d2) {
                const auto x = qnd_project_dense(z.branch, {d2, Basis::X});
                const Branch b = tp.protocol2_branch(d1, d2);
                worst = std::max(worst, std::abs(x.probability - b.record.probability));
                worst = std::max(worst, (x.branch.reduced_density_3() - b.state.density()).cwiseAbs().maxCoeff());
            }
        }
        out.push_back(detail::bound_check("protocol II vs dense pipeline", worst, 1e-12));
    }
    {
        const PairState phi = max_entangled(6);
        const double dz = 1.0 - qnd_project_pair(phi, {0, Basis::Z}).probability;
        const double dx = 1.0 - qnd_project_pair(phi, {0, Basis::X}).probability;
        out.push_back(detail::bound_check("entangled state fixed point", std::max(std::abs(dz), std::abs(dx)), 1e-12));
    }
    {
        bool ok = true;
        for (int n = 1; n <= 50; ++n)
            for (int d = -n; d <= n; ++d) {
                const double a = c_coefficient(n, d), b = c_coefficient_factored(n, d);
                const int sa = a > 0 ? 1 : (a < 0 ? -1 : 0);
                const int sb = std::abs(b) < 1e-9 ? 0 : (b > 0 ? 1 : -1);
                ok = ok && sa == sb;
            }
        out.push_back({"c(Delta) sign agreement", ok, ok ? "all N <= 50" : "sign mismatch"});
    }
    out.push_back(detail::bound_check("POVM completeness alpha=3",
                                      povm_completeness_deviation(4, pi / 16.0, 3.0), 1e-6));
    return out;
}

}  // namespace spintel
