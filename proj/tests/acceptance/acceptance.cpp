// Acceptance suite: one PASS/FAIL line per criterion. With a criterion name as
// the only argument just that criterion runs; exit status is nonzero on failure.

#include "spintel/spintel.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace spintel;

namespace {

constexpr double pi = std::numbers::pi;

// Pinned tolerances.
constexpr double kZeroError = 1e-10;
constexpr double kZeroSpread = 1e-10;
constexpr double kBoundMargin = 1e6;
constexpr double kExact = 1e-12;
constexpr double kGridSeconds = 300.0;
constexpr double kPhiIndependence = 1e-9;
constexpr double kDthetaLow = 0.05;
constexpr double kDthetaHigh = 0.3;
constexpr double kLobeAzimuth = 0.05;
constexpr double kWkbSign = 0.95;
constexpr int kHoPeak = 1;
constexpr double kPovmFidelity = 0.99;
constexpr double kPovmCompleteness = 1e-6;
constexpr double kPrepMedian = 0.99;
constexpr double kDephasingSpread = 0.01;
constexpr double kDephasingOracle = 0.02;
constexpr double kEquatorDephased = 1e-6;

struct Verdict {
    bool pass;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::vector<double> linspace(double a, double b, int m) {
    std::vector<double> v;
    for (int i = 0; i < m; ++i) v.push_back(a + (b - a) * i / (m - 1));
    return v;
}

struct GridPoint {
    Protocol protocol;
    int n;
    BlochAngles ref;
    TeleportStats stats;
};

struct GridRun {
    std::vector<GridPoint> points;
    double seconds;
};

GridRun zero_error_grid() {
    const auto t0 = std::chrono::steady_clock::now();
    GridRun run;
    for (Protocol p : {Protocol::I, Protocol::II})
        for (int n : {4, 6, 8, 10, 12})
            for (double th : linspace(0.3, pi - 0.3, 5))
                for (int j = 0; j < 8; ++j) {
                    const BlochAngles ref = BlochAngles::make(th, -pi + 2 * pi * (j + 0.5) / 8);
                    run.points.push_back({p, n, ref, aggregate(enumerate(InitialConfig::coherent(n, ref), p), ref)});
                }
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

Verdict zero_average_error() {
    const GridRun g = zero_error_grid();
    double worst = 0.0;
    for (const auto& pt : g.points) worst = std::max(worst, pt.stats.eps_tel);
    return {worst <= kZeroError && g.seconds < kGridSeconds,
            "max eps_tel " + fmt(worst) + " over " + std::to_string(g.points.size()) + " scenarios in " +
                fmt(g.seconds) + " s"};
}

Verdict zero_azimuthal_spread() {
    const GridRun g = zero_error_grid();
    double worst = 0.0;
    for (const auto& pt : g.points) worst = std::max(worst, pt.stats.dphi);
    return {worst <= kZeroSpread, "max dphi " + fmt(worst)};
}

Verdict classical_bound_margin() {
    const GridRun g = zero_error_grid();
    double min_margin = std::numeric_limits<double>::infinity();
    for (const auto& pt : g.points)
        if (pt.stats.eps_tel > 0.0) min_margin = std::min(min_margin, qse_bound(pt.n) / pt.stats.eps_tel);
    return {min_margin >= kBoundMargin, "min eps_QSE/eps_tel " + fmt(min_margin)};
}

Verdict dense_oracle_equivalence() {
    double worst = 0.0;
    int outcomes = 0;
    for (int n = 1; n <= 5; ++n)
        for (const BlochAngles a : {BlochAngles::make(0.8, -2.2), BlochAngles::make(2.3, 1.1)}) {
            const InitialConfig cfg = InitialConfig::coherent(n, a);
            const Teleporter tp(cfg);
            const DenseTriState dense = DenseTriState::compose(cfg.psi0, max_entangled(n));
            for (int d = -n; d <= n; ++d) {
                const auto z = qnd_project_dense(dense, {d, Basis::Z});
                for (int k1 = 0; k1 <= n; ++k1) {
                    const auto x1 = project_number_dense(z.branch, 1, Basis::X, k1);
                    for (int k2 = 0; k2 <= n; ++k2) {
                        const auto x2 = project_number_dense(x1.branch, 2, Basis::X, k2);
                        const Branch b = tp.protocol1_branch(d, k1, k2);
                        worst = std::max(worst, std::abs(x2.probability - b.record.probability));
                        worst = std::max(worst,
                                         (x2.branch.reduced_density_3() - b.state.density()).cwiseAbs().maxCoeff());
                        ++outcomes;
                    }
                }
                for (int d2 = -n; d2 <= n; ++d2) {
                    const auto x = qnd_project_dense(z.branch, {d2, Basis::X});
                    const Branch b = tp.protocol2_branch(d, d2);
                    worst = std::max(worst, std::abs(x.probability - b.record.probability));
                    worst = std::max(worst, (x.branch.reduced_density_3() - b.state.density()).cwiseAbs().maxCoeff());
                    ++outcomes;
                }
            }
        }
    return {worst <= kExact, "max deviation " + fmt(worst) + " over " + std::to_string(outcomes) + " outcomes"};
}

Verdict completeness() {
    double protocols = 0.0, modules = 0.0;
    const BlochAngles a = BlochAngles::make(1.3, 0.4);
    for (int n = 1; n <= 12; ++n) {
        const InitialConfig cfg = InitialConfig::coherent(n, a);
        for (Protocol p : {Protocol::I, Protocol::II}) {
            double tot = 0.0;
            for (const auto& r : enumerate(cfg, p)) tot += r.probability;
            protocols = std::max(protocols, std::abs(tot - 1.0));
        }
        // Single-ensemble number projectors, pair QND projectors and, for N <= 5, the dense pipeline.
        for (Basis b : {Basis::Z, Basis::X}) {
            double tot = 0.0;
            for (int k = 0; k <= n; ++k) tot += project_number(cfg.psi0, b, k).probability;
            modules = std::max(modules, std::abs(tot - 1.0));
            const PairState pair = PairState::product(cfg.psi0, make_spin_coherent(n, BlochAngles::make(2.0, -1.0)));
            tot = 0.0;
            for (int d = -n; d <= n; ++d) tot += qnd_project_pair(pair, {d, b}).probability;
            modules = std::max(modules, std::abs(tot - 1.0));
            if (n <= 5) {
                const DenseTriState dense = DenseTriState::compose(cfg.psi0, pair);
                tot = 0.0;
                for (int d = -n; d <= n; ++d) tot += qnd_project_dense(dense, {d, b}).probability;
                modules = std::max(modules, std::abs(tot - 1.0));
            }
        }
    }
    return {protocols <= kExact && modules <= kExact,
            "protocol sums " + fmt(protocols) + ", projector sums " + fmt(modules)};
}

double dtheta_at(Protocol p, int n, double theta, double phi) {
    const BlochAngles ref = BlochAngles::make(theta, phi);
    return aggregate(enumerate(InitialConfig::coherent(n, ref), p), ref).dtheta;
}

Verdict dtheta_trends() {
    const std::vector<int> ns{6, 8, 10, 12, 14};
    bool decreasing = true;
    double lo = 1e300, hi = 0.0, phi_dev = 0.0;
    std::ostringstream eq;
    for (Protocol p : {Protocol::I, Protocol::II}) {
        double prev = std::numeric_limits<double>::infinity();
        eq << to_string(p) << ":";
        for (int n : ns) {
            const double d = dtheta_at(p, n, pi / 2, 0.0);
            decreasing = decreasing && d < prev;
            prev = d;
            eq << ' ' << fmt(d);
            const double q = dtheta_at(p, n, pi / 4, 0.0);
            lo = std::min(lo, q);
            hi = std::max(hi, q);
            for (double th : {pi / 4, pi / 2}) {
                const double ref = dtheta_at(p, n, th, 0.0);
                for (double ph : {0.7, 2.1, -1.3, pi})
                    phi_dev = std::max(phi_dev, std::abs(dtheta_at(p, n, th, ph) - ref));
            }
        }
        eq << "; ";
    }
    const bool pass = decreasing && lo >= kDthetaLow && hi <= kDthetaHigh && phi_dev <= kPhiIndependence;
    return {pass, "dtheta(pi/2) " + eq.str() + "dtheta(pi/4) in [" + fmt(lo) + ", " + fmt(hi) +
                      "], phi dependence " + fmt(phi_dev)};
}

double azimuth_distance(double a, double b) { return std::abs(wrap_phi(a - b)); }

Verdict four_lobe_structure() {
    const int n = 100, k1 = 20, k2 = 60;
    const InitialConfig cfg = InitialConfig::coherent(n, BlochAngles::make(pi / 2, 0.0));
    const Branch b = Teleporter(cfg).protocol1_branch(0, k1, k2);
    const EnsembleState s = EnsembleState(n, b.state.branches.front()).normalized();
    const auto peaks = q_local_maxima(s, 361, 1440, 0.1);
    const double p1 = phi_angle(n, k1), p2 = phi_angle(n, k2);
    const std::vector<double> expect{p1 + p2, -(p1 + p2), p1 - p2, -(p1 - p2)};
    std::vector<bool> used(expect.size(), false);
    double worst = 0.0;
    bool matched = peaks.size() == expect.size();
    for (const auto& pk : peaks) {
        std::size_t best = 0;
        double dist = 1e300;
        for (std::size_t i = 0; i < expect.size(); ++i)
            if (!used[i] && azimuth_distance(pk.phi, expect[i]) < dist) dist = azimuth_distance(pk.phi, expect[i]), best = i;
        if (dist > 1e299) {
            matched = false;
            break;
        }
        used[best] = true;
        worst = std::max(worst, dist);
    }
    std::ostringstream os;
    os << peaks.size() << " maxima, azimuths";
    for (const auto& pk : peaks) os << ' ' << fmt(pk.phi);
    os << ", worst offset " << fmt(worst);
    return {matched && worst <= kLobeAzimuth, os.str()};
}

// Fraction of allowed-region cells (|R| above 1e-3 of the row maximum) whose
// WKB sign matches the exact sign, maximized over a global row sign.
double wkb_sign_agreement(const Eigen::MatrixXd& r, int n, int kp) {
    const double top = r.row(kp).cwiseAbs().maxCoeff();
    int agree = 0, total = 0;
    for (int k = 0; k <= n; ++k) {
        if (!wkb_allowed(n, kp, k) || std::abs(r(kp, k)) < 1e-3 * top) continue;
        const double w = r_approx_wkb(n, kp, k);
        if (w == 0.0) continue;
        ++total;
        if ((w > 0) == (r(kp, k) > 0)) ++agree;
    }
    if (total == 0) return 0.0;
    const double f = double(agree) / total;
    return std::max(f, 1.0 - f);
}

std::vector<int> abs_peaks(const std::vector<double>& v) {
    std::vector<int> idx;
    for (std::size_t k = 1; k + 1 < v.size(); ++k)
        if (std::abs(v[k]) > std::abs(v[k - 1]) && std::abs(v[k]) >= std::abs(v[k + 1])) idx.push_back(int(k));
    return idx;
}

Verdict approximation_validation() {
    const int n = 100;
    const Eigen::MatrixXd r = r_matrix_real(n);
    bool pass = true;
    std::ostringstream os;
    os << "WKB sign agreement";
    for (int kp : {5, 50, 95}) {
        const double f = wkb_sign_agreement(r, n, kp);
        pass = pass && f > kWkbSign;
        os << " k'=" << kp << ":" << fmt(f);
    }
    std::vector<double> ho, ex;
    for (int k = 0; k <= n; ++k) {
        ho.push_back(r_approx_ho(n, 95, k));
        ex.push_back(r(95, k));
    }
    const auto a = abs_peaks(ho), b = abs_peaks(ex);
    int worst = a.size() == b.size() ? 0 : n;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    pass = pass && worst <= kHoPeak;
    os << "; HO peaks at k'=95: " << a.size() << " vs " << b.size() << ", max offset " << worst;
    return {pass, os.str()};
}

Verdict povm_limit() {
    const PovmLimitReport rep = povm_projector_limit_check(10, 200.0, pi / 40);
    return {!rep.entries.empty() && rep.min_fidelity >= kPovmFidelity && rep.completeness_deviation <= kPovmCompleteness,
            "min fidelity " + fmt(rep.min_fidelity) + " over " + std::to_string(rep.entries.size()) +
                " count pairs, completeness deviation " + fmt(rep.completeness_deviation)};
}

Verdict entanglement_preparation() {
    const int n = 10;
    PrepConfig cfg;
    cfg.max_rounds = 50;
    std::vector<double> fids;
    int converged = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const PrepResult res = prep_adaptive(n, seed, cfg);
        fids.push_back(res.trace.final_fidelity);
        converged += res.converged;
    }
    std::sort(fids.begin(), fids.end());
    const double median = 0.5 * (fids[49] + fids[50]);

    const PairState phi = max_entangled(n);
    double fixed = 0.0;
    for (Basis b : {Basis::Z, Basis::X}) fixed = std::max(fixed, 1.0 - qnd_project_pair(phi, {0, b}).probability);
    PrepConfig from_phi;
    from_phi.max_rounds = 5;
    from_phi.initial = phi;
    const PrepResult stay = prep_adaptive(n, 1, from_phi);
    const bool all_zero =
        std::all_of(stay.trace.steps.begin(), stay.trace.steps.end(), [](const PrepStep& s) { return s.delta == 0; });
    return {median >= kPrepMedian && fixed <= kExact && all_zero,
            "median fidelity " + fmt(median) + " (min " + fmt(fids.front()) + ", " + std::to_string(converged) +
                "/100 converged), fixed-point defect " + fmt(fixed)};
}

Verdict decoherence() {
    const std::vector<double> gammas{0.01, 0.1};
    const std::vector<int> ns{4, 6, 8, 10, 12};
    const std::vector<double> thetas{pi / 8, pi / 4, 3 * pi / 8}, phis{pi / 4};
    double spread = 0.0, oracle_dev = 0.0, oracle_eps_spread = 0.0;
    bool polar = true;
    double equator = 0.0;
    for (Protocol p : {Protocol::I, Protocol::II}) {
        // Closed form against the quadrature oracle on the outcome-averaged teleported spin.
        for (int n : ns)
            for (double th : thetas)
                for (double g : gammas) {
                    const InitialConfig cfg = InitialConfig::coherent(n, BlochAngles::make(th, phis[0]));
                    const SpinVector c = dephased_average_closed(enumerate(cfg, p), {g});
                    const SpinVector o = DephasingOracle(cfg, p, {g}).average();
                    oracle_dev = std::max(oracle_dev, (c - o).norm() / o.norm());
                }
        const auto closed = dephased_error_scan(p, ns, thetas, phis, gammas);
        const auto quad = dephased_error_scan(p, ns, thetas, phis, gammas, DephasingMethod::Quadrature);
        // Rows are ordered N, theta, phi, gamma; compare across N at fixed (theta, gamma).
        const std::size_t per_n = thetas.size() * gammas.size();
        auto spread_of = [&](const std::vector<ScanRow>& rows) {
            double worst = 0.0;
            for (std::size_t j = 0; j < per_n; ++j) {
                double lo = 1e300, hi = 0.0, mean = 0.0;
                for (std::size_t m = 0; m < ns.size(); ++m) {
                    const double e = rows[m * per_n + j].eps;
                    lo = std::min(lo, e);
                    hi = std::max(hi, e);
                    mean += e / ns.size();
                }
                worst = std::max(worst, (hi - lo) / mean);
            }
            return worst;
        };
        spread = std::max(spread, spread_of(closed));
        oracle_eps_spread = std::max(oracle_eps_spread, spread_of(quad));

        const int m = 40;
        const std::vector<int> n10{10};
        const std::vector<double> grid = theta_grid(m);
        for (double ph : {0.0, pi / 4, pi / 2})
            for (double g : gammas) {
                const std::vector<double> one_phi{ph}, one_g{g};
                const auto rows = dephased_error_scan(p, n10, grid, one_phi, one_g);
                const auto top = std::max_element(rows.begin(), rows.end(),
                                                  [](const ScanRow& a, const ScanRow& b) { return a.eps < b.eps; });
                const int idx = int(top - rows.begin());
                polar = polar && (idx < m / 5 || idx >= m - m / 5);
            }
        const std::vector<double> eq_t{pi / 2}, eq_p{0.0};
        for (const auto& r : dephased_error_scan(p, ns, eq_t, eq_p, gammas)) equator = std::max(equator, r.eps);
        for (const auto& r : dephased_error_scan(p, ns, eq_t, eq_p, gammas, DephasingMethod::Quadrature))
            equator = std::max(equator, r.eps);
    }
    const bool pass =
        spread < kDephasingSpread && oracle_dev <= kDephasingOracle && polar && equator <= kEquatorDephased;
    return {pass, "N spread " + fmt(spread) + " (quadrature eps spread " + fmt(oracle_eps_spread) +
                      "), closed vs quadrature spin " + fmt(oracle_dev) + ", polar maximum " + (polar ? "yes" : "no") +
                      ", equator eps " + fmt(equator)};
}

struct Criterion {
    const char* name;
    std::function<Verdict()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list{
        {"zero_average_error", zero_average_error},
        {"zero_azimuthal_spread", zero_azimuthal_spread},
        {"classical_bound_margin", classical_bound_margin},
        {"dense_oracle_equivalence", dense_oracle_equivalence},
        {"completeness", completeness},
        {"dtheta_trends", dtheta_trends},
        {"four_lobe_structure", four_lobe_structure},
        {"approximation_validation", approximation_validation},
        {"povm_limit", povm_limit},
        {"entanglement_preparation", entanglement_preparation},
        {"decoherence", decoherence},
    };
    return list;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string only = argc > 1 ? argv[1] : "";
    bool ok = true, found = only.empty();
    for (const auto& c : criteria()) {
        if (!only.empty() && only != c.name) continue;
        found = true;
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (v.pass ? "PASS " : "FAIL ") << c.name << ": " << v.detail << std::endl;
        ok = ok && v.pass;
    }
    if (!found) {
        std::cerr << "unknown criterion: " << only << '\n';
        return 2;
    }
    return ok ? 0 : 1;
}
