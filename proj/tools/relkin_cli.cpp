// relkin: verification suites, small solver runs and field export.
#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "relkin/coefficients.hpp"
#include "relkin/io.hpp"
#include "relkin/kernel.hpp"
#include "relkin/lorentz.hpp"
#include "relkin/solvers.hpp"
#include "relkin/suites.hpp"

using namespace relkin;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct Global {
    std::string config;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out;
    bool json = false;
    std::vector<std::string> sets;
};

SuiteConfig make_config(const Global& g) {
    SuiteConfig c = g.config.empty() ? SuiteConfig{} : SuiteConfig::load(g.config);
    for (const auto& s : g.sets) c.set(s);
    if (g.seed_given) c.seed = g.seed;
    if (!g.out.empty()) c.out_dir = g.out;
    return c;
}

Vec3 vec3(const std::vector<double>& v) {
    if (v.size() != 3) throw UsageError("expected three comma-separated components");
    return {v[0], v[1], v[2]};
}

PhasePoint phase(const std::vector<double>& v) {
    if (v.size() != 7) throw UsageError("phase point needs t,x1,x2,x3,p1,p2,p3");
    return {v[0], Vec3(v[1], v[2], v[3]), Vec3(v[4], v[5], v[6])};
}

json to_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }
json to_json(const Mat3& m) {
    json a = json::array();
    for (int i = 0; i < 3; ++i) a.push_back(json::array({m(i, 0), m(i, 1), m(i, 2)}));
    return a;
}
json to_json(const PhasePoint& z) { return {{"t", z.t}, {"x", to_json(z.x)}, {"p", to_json(z.p)}}; }

void emit(const json& j, bool as_json) {
    if (as_json)
        std::cout << j.dump(2) << "\n";
    else
        for (const auto& [k, v] : j.items()) std::cout << k << ": " << v.dump() << "\n";
}

std::filesystem::path out_path(const SuiteConfig& c, const std::string& name) {
    std::filesystem::create_directories(c.out_dir.empty() ? "." : c.out_dir);
    return (c.out_dir.empty() ? std::filesystem::path(".") : c.out_dir) / name;
}

int cmd_verify(const Global& g, const std::string& suite) {
    const SuiteConfig c = make_config(g);
    const SuiteReport r = run_suite(suite, c);
    const std::string doc = report_json(r);
    if (g.json)
        std::cout << doc;
    else
        std::cout << report_text(r);
    if (!c.out_dir.empty()) {
        const auto p = c.out_dir / (suite + ".json");
        std::ofstream(p) << doc;
    }
    return r.passed() ? 0 : kExitFail;
}

int cmd_solve_homog(const Global& g) {
    const SuiteConfig c = make_config(g);
    const double P = c.real("solve.extent", 8);
    const int n = int(c.count("solve.n", 16));
    const double T = c.real("solve.final_time", 0.5);
    HomogeneousConfig hc;
    hc.lag = int(c.count("solve.lag", 1));
    hc.cfl = c.real("solve.cfl", 0.25);
    hc.collision.threads = c.threads;
    const double every = c.real("solve.snapshot_every", 0.1);
    for (double t = every; t < T - 1e-12; t += every) hc.snapshot_times.push_back(t);
    const double c2 = c.real("solve.juttner_c2", 1.0);
    auto f0 = DistributionState::sample(MomentumGrid3D(P, n), [c2](const Vec3& p) { return std::exp(-c2 * energy(p)); });
    f0.normalize();
    const auto res = solve_homogeneous(f0, T, hc);
    json steps = json::array();
    for (const auto& s : res.steps)
        steps.push_back({{"t", s.time}, {"dt", s.dt}, {"mass", s.moments.mass}, {"energy", s.moments.energy},
                         {"entropy", s.moments.entropy}, {"clipped", s.clipped}});
    for (std::size_t i = 0; i < res.snapshots.size(); ++i)
        write_snapshot(res.snapshots[i], out_path(c, "homog_" + std::to_string(i) + ".bin"), FieldFormat::bin);
    json j = {{"steps", res.steps.size() - 1},
              {"relative_mass_drift", res.relative_drift_mass()},
              {"relative_energy_drift", res.relative_drift_energy()},
              {"max_entropy_increase", res.max_entropy_increase},
              {"lag_error", res.lag_error},
              {"wall_seconds", res.wall_seconds},
              {"snapshots", res.snapshots.size()}};
    if (g.json) j["history"] = steps;
    emit(j, g.json);
    return 0;
}

int cmd_solve_rfp(const Global& g) {
    const SuiteConfig c = make_config(g);
    RfpState s;
    s.grid = {c.real("solve.length", 2), int(c.count("solve.nx", 64)), c.real("solve.extent", 8),
              int(c.count("solve.np", 64))};
    s.u.resize(s.grid.nx, s.grid.np);
    for (int i = 0; i < s.grid.nx; ++i)
        for (int j = 0; j < s.grid.np; ++j)
            s.u(i, j) = (1 + 0.5 * std::sin(2 * M_PI * s.grid.x(i) / s.grid.length)) *
                        std::exp(-0.5 * std::pow(s.grid.p(j) + 2.0, 2));
    RfpConfig cfg;
    cfg.friction = c.real("solve.friction", 1.0);
    cfg.diffusion = c.real("solve.diffusion", 1.0);
    const double T = c.real("solve.final_time", 2.0);
    const auto r = solve_rfp_1d(s, T, cfg);
    write_rfp_csv(r.snapshots.back(), out_path(c, "rfp_final.csv"));
    emit({{"dt", r.dt},
          {"steps", r.mass.size() - 1},
          {"max_step_mass_change", r.max_step_mass_change},
          {"l1_initial", r.l1_to_steady.front()},
          {"l1_final", r.l1_to_steady.back()}},
         g.json);
    return 0;
}

int cmd_coeffs(const Global& g, const std::vector<double>& p, double c1, double c2, const std::string& export_to,
               const std::string& format) {
    const SuiteConfig c = make_config(g);
    const auto f = juttner(c1, c2);
    if (!export_to.empty()) {
        const double P = c.real("coeffs.extent", 4);
        const MomentumGrid3D grid(P, int(c.count("coeffs.n", 16)));
        std::vector<Vec3> pts;
        for (std::size_t i = 0; i < grid.size(); ++i) pts.push_back(grid.node(i));
        write_field(evaluate_field(f, pts, {}, c.threads), export_to, parse_format(format));
        emit({{"written", export_to}, {"points", pts.size()}}, g.json);
        return 0;
    }
    const Vec3 q = vec3(p);
    const CoefficientEval e = coefficients(f, q);
    emit({{"p", to_json(q)},
          {"a", to_json(e.a)},
          {"b", to_json(e.b)},
          {"B", to_json(e.B)},
          {"c", e.c},
          {"err", {e.err_a, e.err_b, e.err_B, e.err_c}}},
         g.json);
    return 0;
}

int cmd_kernel(const Global& g, const std::vector<double>& p, const std::vector<double>& q) {
    const KernelEval k = kernel_eval(vec3(p), vec3(q));
    emit({{"tau", k.tau}, {"lambda", k.lambda}, {"G", k.G}, {"Phi", to_json(k.Phi)}, {"gradG", to_json(k.gradG)},
          {"kappa_p", kappa(vec3(p))}},
         g.json);
    return 0;
}

int cmd_boost(const Global& g, const std::vector<double>& z0v, const std::vector<double>& zv) {
    const PhasePoint z0 = phase(z0v), z = phase(zv);
    emit({{"forward", to_json(boost_forward(z0, z))},
          {"inverse", to_json(boost_inverse(z0, z))},
          {"dist_L", dist_L(z, z0)}},
         g.json);
    return 0;
}

int cmd_export(const Global& g, const std::string& input, const std::string& output, const std::string& format) {
    const SuiteConfig c = make_config(g);
    const FieldFormat fmt = parse_format(format);
    if (input.empty()) {
        auto s = DistributionState::sample(MomentumGrid3D(c.real("export.extent", 8), int(c.count("export.n", 32))),
                                           [](const Vec3& p) { return std::exp(-energy(p)); });
        s.normalize();
        write_snapshot(s, output, fmt);
    } else {
        try {
            write_snapshot(read_snapshot_bin(input), output, fmt);
        } catch (const IoError&) {
            write_field(read_field_bin(input), output, fmt);
        }
    }
    emit({{"written", output}}, g.json);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"relkin: relativistic Landau toolkit"};
    app.require_subcommand(1);
    Global g;
    app.add_option("--config", g.config, "INI configuration file")->check(CLI::ExistingFile);
    auto* seed = app.add_option("--seed", g.seed, "random seed (u64)");
    app.add_option("--out", g.out, "output directory");
    app.add_flag("--json", g.json, "machine-readable output");
    app.add_option("--set", g.sets, "override a parameter, section.key=value")->take_all();

    std::string suite;
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("suite", suite, "suite name")->required();

    auto* solve = app.add_subcommand("solve", "run a solver");
    solve->require_subcommand(1);
    auto* homog = solve->add_subcommand("homog", "spatially homogeneous Landau run from a Juttner state");
    auto* rfp = solve->add_subcommand("rfp", "1+1D relativistic Fokker-Planck run");

    std::vector<double> p{0, 0, 0}, q{1, 0, 0};
    double c1 = 1, c2 = 1;
    std::string export_to, format = "csv", input, output;
    auto* coeffs = app.add_subcommand("coeffs", "coefficients a, b, B, c of a Juttner distribution");
    coeffs->add_option("--p", p, "momentum p1,p2,p3")->delimiter(',')->expected(3);
    coeffs->add_option("--c1", c1);
    coeffs->add_option("--c2", c2);
    coeffs->add_option("--export", export_to, "write the field on a grid to this file");
    coeffs->add_option("--format", format, "csv or bin");

    auto* kernel = app.add_subcommand("kernel", "collision kernel at (p, q)");
    kernel->add_option("--p", p)->delimiter(',')->expected(3);
    kernel->add_option("--q", q)->delimiter(',')->expected(3);

    std::vector<double> z0(7, 0.0), z(7, 0.0);
    auto* boost = app.add_subcommand("boost", "Lorentz frame shift of phase points");
    boost->add_option("--z0", z0, "t,x1,x2,x3,p1,p2,p3")->delimiter(',')->expected(7);
    boost->add_option("--z", z, "t,x1,x2,x3,p1,p2,p3")->delimiter(',')->expected(7);

    auto* exp = app.add_subcommand("export", "convert a binary file, or write a Juttner snapshot");
    exp->add_option("--input", input, "RELKIN1 binary file");
    exp->add_option("--output", output)->required();
    exp->add_option("--format", format, "csv or bin");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }
    g.seed_given = seed->count() > 0;

    try {
        if (*verify) return cmd_verify(g, suite);
        if (*homog) return cmd_solve_homog(g);
        if (*rfp) return cmd_solve_rfp(g);
        if (*coeffs) return cmd_coeffs(g, p, c1, c2, export_to, format);
        if (*kernel) return cmd_kernel(g, p, q);
        if (*boost) return cmd_boost(g, z0, z);
        if (*exp) return cmd_export(g, input, output, format);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
    return kExitUsage;
}
