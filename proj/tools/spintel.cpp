// spintel: command-line driver for the teleportation simulator.
//
//   spintel run      --protocol I|II --n N --theta T --phi P [--mode enumerate|sample] ...
//   spintel figure   fig2|fig3|fig4|fig5|fig6|fig7 [overrides]
//   spintel prep     --n N --seed S [--max-rounds M]
//   spintel validate
//
// Exit codes: 0 success, 1 numeric contract violation or failed validation, 2 usage error.

#include "spintel/io.hpp"
#include "spintel/spintel.hpp"
#include "spintel/validation.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace spintel;

namespace {

constexpr double pi = std::numbers::pi;

std::string default_out_dir() {
    const char* env = std::getenv("SPINTEL_OUT_DIR");
    return env && *env ? env : ".";
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    return os;
}

Protocol parse_protocol(const std::string& s) { return s == "I" ? Protocol::I : Protocol::II; }

struct RunConfig {
    std::string protocol = "I";
    int n = 10;
    double theta = pi / 2;
    double phi = 0.0;
    std::string mode = "enumerate";
    int samples = 1000;
    std::uint64_t seed = 0;
    double gamma_t = 0.0;
    bool twisted = false;
    std::string out;
};

nlohmann::json run_header(const RunConfig& c) {
    return {{"schema_version", io::schema_version},
            {"protocol", c.protocol},
            {"N", c.n},
            {"theta0", c.theta},
            {"phi0", c.phi},
            {"mode", c.mode},
            {"samples", c.mode == "sample" ? c.samples : 0},
            {"seed", c.seed},
            {"gamma_t", c.gamma_t},
            {"input", c.twisted ? "twisted" : "coherent"},
            {"qse_bound", qse_bound(c.n)}};
}

// Enumerates or samples one scenario and writes <stem>outcomes.csv / <stem>stats.json.
void write_scenario(const RunConfig& c, const fs::path& dir, const std::string& stem) {
    const BlochAngles ref = BlochAngles::make(c.theta, c.phi);
    const InitialConfig cfg(c.twisted ? make_twisted_coherent(c.n, ref) : make_spin_coherent(c.n, ref));
    const Protocol p = parse_protocol(c.protocol);
    const DephasingChannel ch{c.gamma_t, 64};
    ch.validate();

    std::vector<OutcomeRecord> recs;
    std::vector<double> weights;
    if (c.mode == "enumerate") {
        recs = enumerate(cfg, p);
        for (const auto& r : recs) weights.push_back(r.probability);
    } else {
        OutcomeSampler sampler(cfg, p, c.seed);
        for (int i = 0; i < c.samples; ++i) recs.push_back(sampler.draw());
        weights.assign(recs.size(), 1.0 / c.samples);
    }
    if (c.gamma_t > 0.0)
        for (auto& r : recs) r = dephase_record(r, ch);

    const TeleportStats st = aggregate_weighted(recs, weights, ref);
    {
        auto os = open_out(dir, stem + "outcomes.csv");
        io::write_outcomes_csv(os, recs);
    }
    nlohmann::json j = run_header(c);
    j["outcome_count"] = recs.size();
    j.update(io::stats_json(st));
    auto os = open_out(dir, stem + "stats.json");
    os << j.dump(2) << '\n';
}

int cmd_run(const RunConfig& c) {
    write_scenario(c, c.out, "");
    std::cout << "wrote " << (fs::path(c.out) / "outcomes.csv").string() << " and stats.json\n";
    return 0;
}

std::vector<double> linspace(double a, double b, int m) {
    std::vector<double> v;
    for (int i = 0; i < m; ++i) v.push_back(m == 1 ? a : a + (b - a) * i / (m - 1));
    return v;
}

struct FigureOptions {
    std::string name;
    std::string out;
    std::vector<int> n_list;
    int theta_points = 0;
    int n = 100;
    int k1 = 20;
    int k2 = 60;
    int k1b = 10;
    int k2b = 50;
    int delta = 0;
    int grid = 0;
};

void figure_qgrid(const FigureOptions& o, const fs::path& dir, const std::string& tag, const EnsembleState& psi0, int k1,
                  int k2) {
    const int n = psi0.n_atoms();
    const Branch b = Teleporter(InitialConfig(psi0)).protocol1_branch(o.delta, k1, k2);
    const EnsembleState exact = EnsembleState(n, b.state.branches.front()).normalized();
    const EnsembleState approx = four_circle_state(psi0, k1, k2, o.delta).normalized();
    const int m = o.grid > 0 ? o.grid : 91;
    const auto th = linspace(0.0, pi, m);
    const auto ph = linspace(-pi, pi, 2 * m - 1);
    const Eigen::MatrixXd qe = q_grid(exact, th, ph);
    const Eigen::MatrixXd qa = q_grid(approx, th, ph);
    io::CsvTable t({"theta", "phi", "q_exact", "q_four_circle"});
    for (std::size_t i = 0; i < th.size(); ++i)
        for (std::size_t j = 0; j < ph.size(); ++j)
            t.add({io::num(th[i]), io::num(ph[j]), io::num(qe(i, j)), io::num(qa(i, j))});
    auto os = open_out(dir, tag + "_qgrid.csv");
    t.write(os);

    io::CsvTable peaks({"theta", "phi", "q"});
    for (const QPeak& p : q_local_maxima(exact, 181, 720, 0.01))
        peaks.add({io::num(p.theta), io::num(p.phi), io::num(p.q)});
    auto ps = open_out(dir, tag + "_maxima.csv");
    peaks.write(ps);
}

void figure_dtheta(const FigureOptions& o, const fs::path& dir, Protocol p, const std::string& tag) {
    const std::vector<int> ns = o.n_list.empty() ? std::vector<int>{6, 10, 14, 20} : o.n_list;
    const int m = o.theta_points > 0 ? o.theta_points : 31;
    const double phi0 = pi / 4;
    io::CsvTable a({"N", "theta0", "phi0", "dtheta", "eps_tel"});
    for (int n : ns)
        for (double th : linspace(0.0, pi, m)) {
            const BlochAngles ref = BlochAngles::make(th, phi0);
            const TeleportStats st = aggregate(enumerate(InitialConfig::coherent(n, ref), p), ref);
            a.add({std::to_string(n), io::num(th), io::num(phi0), io::num(st.dtheta), io::num(st.eps_tel)});
        }
    auto os = open_out(dir, tag + "_dtheta_vs_theta.csv");
    a.write(os);

    io::CsvTable b({"theta0", "N", "invN", "dtheta"});
    for (double th : {pi / 8, pi / 4, 3 * pi / 8, pi / 2})
        for (int n = 4; n <= 30; n += 2) {
            const BlochAngles ref = BlochAngles::make(th, phi0);
            const TeleportStats st = aggregate(enumerate(InitialConfig::coherent(n, ref), p), ref);
            b.add({io::num(th), std::to_string(n), io::num(1.0 / n), io::num(st.dtheta)});
        }
    auto bs = open_out(dir, tag + "_dtheta_vs_invN.csv");
    b.write(bs);
}

void figure_dephasing(const FigureOptions& o, const fs::path& dir) {
    const std::vector<double> gammas{0.01, 0.1};
    const std::vector<int> ns = o.n_list.empty() ? std::vector<int>{4, 6, 8, 10, 12} : o.n_list;
    io::CsvTable a({"protocol", "N", "theta0", "phi0", "gamma_t", "eps_closed", "eps_quadrature"});
    io::CsvTable b({"protocol", "N", "theta0", "phi0", "gamma_t", "eps_closed"});
    const std::vector<double> phis{0.0, pi / 4, pi / 2};
    for (Protocol p : {Protocol::I, Protocol::II}) {
        const std::vector<double> th{pi / 8, pi / 4, 3 * pi / 8};
        const auto closed = dephased_error_scan(p, ns, th, std::vector<double>{pi / 4}, gammas);
        const auto quad =
            dephased_error_scan(p, ns, th, std::vector<double>{pi / 4}, gammas, DephasingMethod::Quadrature);
        for (std::size_t i = 0; i < closed.size(); ++i)
            a.add({to_string(p), std::to_string(closed[i].n_atoms), io::num(closed[i].theta0), io::num(closed[i].phi0),
                   io::num(closed[i].gamma_t), io::num(closed[i].eps), io::num(quad[i].eps)});
        const int m = o.theta_points > 0 ? o.theta_points : 40;
        const std::vector<int> n10{10};
        for (const auto& r : dephased_error_scan(p, n10, theta_grid(m), phis, gammas))
            b.add({to_string(p), std::to_string(r.n_atoms), io::num(r.theta0), io::num(r.phi0), io::num(r.gamma_t),
                   io::num(r.eps)});
    }
    auto as = open_out(dir, "fig7_eps_vs_N.csv");
    a.write(as);
    auto bs = open_out(dir, "fig7_eps_vs_theta.csv");
    b.write(bs);
}

int cmd_figure(const FigureOptions& o) {
    const fs::path dir = o.out;
    if (o.name == "fig2") {
        const BlochAngles eq = BlochAngles::make(pi / 2, 0.0);
        figure_qgrid(o, dir, "fig2a", make_spin_coherent(o.n, eq), o.k1, o.k2);
        figure_qgrid(o, dir, "fig2b", make_twisted_coherent(o.n, eq), o.k1b, o.k2b);
    } else if (o.name == "fig3" || o.name == "fig4") {
        RunConfig c;
        c.protocol = o.name == "fig3" ? "I" : "II";
        c.n = 10, c.theta = pi / 2, c.phi = pi / 4;
        write_scenario(c, dir, o.name + "_ab_");
        c.n = 11, c.theta = pi / 4, c.phi = -pi / 2;
        write_scenario(c, dir, o.name + "_cd_");
    } else if (o.name == "fig5") {
        figure_dtheta(o, dir, Protocol::I, "fig5");
    } else if (o.name == "fig6") {
        figure_dtheta(o, dir, Protocol::II, "fig6");
    } else {
        figure_dephasing(o, dir);
    }
    std::cout << "wrote " << o.name << " tables to " << dir.string() << '\n';
    return 0;
}

int cmd_prep(int n, std::uint64_t seed, int max_rounds, int cap, const std::string& out) {
    PrepConfig cfg;
    cfg.max_rounds = max_rounds;
    cfg.sequence_cap = cap;
    const PrepResult res = prep_adaptive(n, seed, cfg);
    auto os = open_out(out, "prep_trace.json");
    os << io::trace_json(res, n, seed, max_rounds, cap).dump(2) << '\n';
    std::cout << "final fidelity " << io::num(res.trace.final_fidelity) << (res.converged ? "" : " (not converged)")
              << '\n';
    return 0;
}

int cmd_validate(const std::string& fault) {
    const auto results = run_validation(fault == "sign" ? Fault::SignFlip : Fault::None);
    bool ok = true;
    for (const auto& r : results) {
        std::cout << (r.passed ? "PASS  " : "FAIL  ") << r.name << "  (" << r.detail << ")\n";
        ok = ok && r.passed;
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact simulator for collective-spin teleportation between qubit ensembles"};
    app.require_subcommand(1);

    RunConfig rc;
    rc.out = default_out_dir();
    auto* run = app.add_subcommand("run", "Enumerate or sample one protocol run");
    run->add_option("--protocol", rc.protocol, "Protocol I or II")->check(CLI::IsMember({"I", "II"}));
    run->add_option("--n", rc.n, "Atoms per ensemble")->check(CLI::Range(1, 400));
    run->add_option("--theta", rc.theta, "Polar angle of the input (radians)");
    run->add_option("--phi", rc.phi, "Azimuth of the input (radians)");
    run->add_option("--mode", rc.mode, "enumerate or sample")->check(CLI::IsMember({"enumerate", "sample"}));
    run->add_option("--samples", rc.samples, "Draws in sample mode")->check(CLI::PositiveNumber);
    run->add_option("--seed", rc.seed, "Random seed");
    run->add_option("--gamma-t", rc.gamma_t, "Dephasing strength gamma*t")->check(CLI::NonNegativeNumber);
    run->add_flag("--twisted", rc.twisted, "Apply the one-axis twist exp(i Sz^2/2N) to the input");
    run->add_option("--out", rc.out, "Output directory");

    FigureOptions fo;
    fo.out = default_out_dir();
    auto* fig = app.add_subcommand("figure", "Emit the tables behind a figure");
    fig->add_option("name", fo.name, "fig2..fig7")
        ->required()
        ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5", "fig6", "fig7"}));
    fig->add_option("--out", fo.out, "Output directory");
    fig->add_option("--n-list", fo.n_list, "Ensemble sizes")->delimiter(',')->check(CLI::Range(1, 200));
    fig->add_option("--theta-points", fo.theta_points, "Polar grid size")->check(CLI::Range(2, 2000));
    fig->add_option("--n", fo.n, "Ensemble size for fig2")->check(CLI::Range(2, 400));
    fig->add_option("--k1", fo.k1, "First x-basis outcome for fig2")->check(CLI::NonNegativeNumber);
    fig->add_option("--k2", fo.k2, "Second x-basis outcome for fig2")->check(CLI::NonNegativeNumber);
    fig->add_option("--k1b", fo.k1b, "First x-basis outcome for the twisted input of fig2")->check(CLI::NonNegativeNumber);
    fig->add_option("--k2b", fo.k2b, "Second x-basis outcome for the twisted input of fig2")->check(CLI::NonNegativeNumber);
    fig->add_option("--delta", fo.delta, "QND outcome for fig2");
    fig->add_option("--grid", fo.grid, "Polar grid size for fig2")->check(CLI::Range(3, 2000));

    int pn = 10, rounds = 20, cap = 25;
    std::uint64_t pseed = 0;
    std::string pout = default_out_dir();
    auto* prep = app.add_subcommand("prep", "Adaptive preparation of the entangled resource");
    prep->add_option("--n", pn, "Atoms per ensemble")->check(CLI::Range(1, 200));
    prep->add_option("--seed", pseed, "Random seed");
    prep->add_option("--max-rounds", rounds, "Outer rounds")->check(CLI::PositiveNumber);
    prep->add_option("--seq-cap", cap, "Per-sequence measurement cap")->check(CLI::PositiveNumber);
    prep->add_option("--out", pout, "Output directory");

    std::string fault = "none";
    auto* val = app.add_subcommand("validate", "Run the invariant suite");
    val->add_option("--inject-fault", fault)->check(CLI::IsMember({"none", "sign"}))->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (*run) return cmd_run(rc);
        if (*fig) {
            if (std::max({fo.k1, fo.k2, fo.k1b, fo.k2b}) > fo.n || std::abs(fo.delta) > fo.n) {
                std::cerr << "error: fig2 indices must lie in [0, N]\n\n" << fig->help();
                return 2;
            }
            return cmd_figure(fo);
        }
        if (*prep) return cmd_prep(pn, pseed, rounds, cap, pout);
        if (*val) return cmd_validate(fault);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
