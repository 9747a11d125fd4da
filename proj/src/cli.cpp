#include "gsde/cli.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gsde/config.hpp"
#include "gsde/expr.hpp"
#include "gsde/errors.hpp"
#include "gsde/manifest.hpp"
#include "gsde/par.hpp"

namespace gsde::cli {

namespace {

namespace fs = std::filesystem;

std::ofstream open_artifact(const fs::path& dir, const std::string& name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw ConfigError("cannot write artifact '" + (dir / name).string() + "'");
    return out;
}

void finish_manifest(const std::string& subcommand, const ExperimentConfig& config,
                     const fs::path& dir, const std::vector<std::string>& names) {
    Manifest manifest;
    manifest.subcommand = subcommand;
    std::ostringstream echo;
    config.echo(echo);
    manifest.config_echo = echo.str();
    for (const std::string& name : names) {
        manifest.artifacts.push_back({name, fnv1a64(read_file_bytes((dir / name).string()))});
    }
    manifest.write((dir / "manifest.txt").string());
}

std::vector<std::string> run_gheat(const ExperimentConfig& config, const fs::path& dir) {
    const Expr term = Expr::parse(config.terminal_expr);
    const auto phi = [&term](double x) { return term.eval(0.0, x, 0.0, 0.0); };
    const Lattice lattice = solve_gheat(phi, config.band, config.lattice_params());
    {
        auto out = open_artifact(dir, "gheat.csv");
        write_lattice_csv(lattice, out);
    }
    std::printf("gheat: root value %.12g (%zu steps, %zu nodes)\n", lattice.root_value(),
                lattice.layout.grid.n_steps(), lattice.layout.n_nodes);
    return {"gheat.csv"};
}

std::vector<std::string> run_paths(const ExperimentConfig& config, const fs::path& dir) {
    const TimeGrid grid = TimeGrid::uniform(config.horizon, config.steps);
    const auto family = bang_bang_family(grid, config.band, config.family_depth);
    const PathBundle bundle = simulate_paths(family, config.band, config.samples, config.seed);
    {
        auto out = open_artifact(dir, "paths.csv");
        write_paths_csv(bundle, out);
    }
    std::printf("paths: %zu scenarios x %zu samples x %zu steps\n", bundle.n_scenarios(),
                bundle.n_samples, bundle.grid.n_steps());
    return {"paths.csv"};
}

std::vector<std::string> run_infconv(const ExperimentConfig& config, const fs::path& dir) {
    const Expr fx = Expr::parse(config.infconv_f);
    GrowthBoundedFunction base;
    base.eval = [&fx](std::span<const double> p) { return fx.eval(0.0, p[0], 0.0, 0.0); };
    base.arity = 1;
    base.growth_M = config.infconv_growth;
    InfConvApprox approx{base, config.infconv_level, GridPolicy{}, std::nullopt};
    approx.validate();

    auto out = open_artifact(dir, "infconv.csv");
    out << "# gsde csv infconv v1\n";
    out << "x,f,f_n\n";
    char buf[96];
    const std::size_t n = std::max<std::size_t>(config.infconv_points, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = config.infconv_x_lo +
                         (config.infconv_x_hi - config.infconv_x_lo) *
                             static_cast<double>(i) / static_cast<double>(n - 1);
        const std::array<double, 1> q{x};
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", x, base.eval(q),
                      inf_convolve(approx, q));
        out << buf;
    }
    std::printf("infconv: wrote %zu query points at level %g\n", n, config.infconv_level);
    return {"infconv.csv"};
}

std::vector<std::string> run_forward(const ExperimentConfig& config, const fs::path& dir) {
    const TimeGrid grid = TimeGrid::uniform(config.horizon, config.steps);
    const auto family = bang_bang_family(grid, config.band, config.family_depth);
    const PathBundle bundle = simulate_paths(family, config.band, config.samples, config.seed);
    const ForwardSpec spec = config.build_forward();
    const GridProcess x = euler_forward(spec, bundle);
    {
        auto out = open_artifact(dir, "forward.csv");
        write_forward_csv(x, bundle, out);
    }
    std::printf("forward: %zu scenarios x %zu samples\n", x.n_scenarios, x.n_samples);
    return {"forward.csv"};
}

std::vector<std::string> run_rbsde(const ExperimentConfig& config, const fs::path& dir) {
    const BackwardSpec spec = config.build_backward();
    if (config.backend == "lattice") {
        const LatticeLayout layout = make_layout(config.lattice_params(), config.band);
        auto [solution, ladder] = solve_rbsde_ladder(spec, layout, BackwardConfig{},
                                                     LadderConfig{}, nullptr);
        const DefectReport defect = martingale_defect(solution, spec);
        {
            auto out = open_artifact(dir, "rbsde.csv");
            write_backward_csv(solution, out);
        }
        {
            auto out = open_artifact(dir, "rbsde_report.txt");
            write_backward_report(solution, defect, out);
        }
        std::printf("rbsde[lattice]: root %.12g, E^[A_T] %.6g, defect %.3g\n", solution.root(),
                    solution.expected_a_total, defect.defect);
        return {"rbsde.csv", "rbsde_report.txt"};
    }
    const TimeGrid grid = TimeGrid::uniform(config.horizon, config.steps);
    const auto family = bang_bang_family(grid, config.band, config.family_depth);
    const PathBundle bundle = simulate_paths(family, config.band, config.samples, config.seed);
    const ScenarioBackwardSolution solution = solve_rbsde_penalized(
        spec, bundle, config.penalty_epsilon, RegressionConfig{config.regression_degree, 0.0});
    const DefectReport defect = martingale_defect(solution, spec, bundle);
    {
        auto out = open_artifact(dir, "rbsde_scenario.csv");
        out << "# gsde csv rbsde_scenario v1\n";
        out << "scenario,y0\n";
        char buf[64];
        for (std::size_t s = 0; s < solution.y0_per_scenario.size(); ++s) {
            std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", s, solution.y0_per_scenario[s]);
            out << buf;
        }
    }
    {
        auto out = open_artifact(dir, "rbsde_report.txt");
        char buf[128];
        std::snprintf(buf, sizeof(buf), "root_value: %.17g\n", solution.y0);
        out << buf;
        std::snprintf(buf, sizeof(buf), "martingale_defect: %.17g\n", defect.defect);
        out << buf;
        std::snprintf(buf, sizeof(buf), "pathwise_complementarity: %.17g\n",
                      defect.pathwise_sum);
        out << buf;
        std::snprintf(buf, sizeof(buf), "rank_deficiencies: %d\n", solution.rank_deficiencies);
        out << buf;
    }
    std::printf("rbsde[scenario]: root %.12g over %zu scenarios\n", solution.y0,
                solution.y0_per_scenario.size());
    return {"rbsde_scenario.csv", "rbsde_report.txt"};
}

std::vector<std::string> run_rfbsde(const ExperimentConfig& config, const fs::path& dir) {
    if (config.backend != "lattice") {
        throw ConfigError("the coupled solver runs on the lattice backend only");
    }
    const CoupledProblem problem = config.build_problem();
    const SolveConfig solve_config = config.build_solve_config();
    auto [solution, report] = solve_rfbgsde(problem, solve_config);
    const ResidualReport residuals = residual_check(problem, solve_config, solution);
    {
        auto out = open_artifact(dir, "rfbsde.csv");
        write_solution_csv(solution, out);
    }
    {
        auto out = open_artifact(dir, "iterations.csv");
        write_iteration_csv(report, out);
    }
    {
        auto out = open_artifact(dir, "rfbsde_report.txt");
        write_iteration_report(report, out);
        char buf[128];
        std::snprintf(buf, sizeof(buf), "residual_forward: %.17g\n", residuals.forward_sup);
        out << buf;
        std::snprintf(buf, sizeof(buf), "residual_backward: %.17g\n", residuals.backward_sup);
        out << buf;
        std::snprintf(buf, sizeof(buf), "reflection_min_gap: %.17g\n",
                      residuals.reflection_min_gap);
        out << buf;
        std::snprintf(buf, sizeof(buf), "root_x: %.17g\nroot_y: %.17g\n", solution.root_x(),
                      solution.root_y());
        out << buf;
    }
    std::printf("rfbsde: %s at iteration %zu, root Y %.12g (residuals f %.3g b %.3g)\n",
                report.converged ? "converged" : "NOT converged", report.converged_at,
                solution.root_y(), residuals.forward_sup, residuals.backward_sup);
    return {"rfbsde.csv", "iterations.csv", "rfbsde_report.txt"};
}

std::vector<std::string> dispatch(const std::string& name, const ExperimentConfig& config,
                                  const fs::path& dir) {
    if (name == "gheat") return run_gheat(config, dir);
    if (name == "paths") return run_paths(config, dir);
    if (name == "infconv") return run_infconv(config, dir);
    if (name == "forward") return run_forward(config, dir);
    if (name == "rbsde") return run_rbsde(config, dir);
    if (name == "rfbsde") return run_rfbsde(config, dir);
    throw ConfigError("unknown subcommand '" + name + "'");
}

int run_audit(const std::string& manifest_path, const fs::path& out_dir) {
    const Manifest manifest = Manifest::read(manifest_path);
    std::istringstream echo(manifest.config_echo);
    const KvFile kv = KvFile::parse(echo, manifest_path + "[config]");
    const ExperimentConfig config = ExperimentConfig::from_kv(kv);

    const fs::path rerun_dir = out_dir / "audit_rerun";
    fs::create_directories(rerun_dir);
    const std::vector<std::string> names = dispatch(manifest.subcommand, config, rerun_dir);

    const fs::path original_dir = fs::path(manifest_path).parent_path();
    bool ok = true;
    for (const ManifestArtifact& recorded : manifest.artifacts) {
        const std::string rerun_bytes = read_file_bytes((rerun_dir / recorded.name).string());
        const std::uint64_t rerun_sum = fnv1a64(rerun_bytes);
        if (rerun_sum != recorded.checksum) {
            std::printf("audit: MISMATCH %s (manifest %016llx, rerun %016llx)\n",
                        recorded.name.c_str(),
                        static_cast<unsigned long long>(recorded.checksum),
                        static_cast<unsigned long long>(rerun_sum));
            ok = false;
            continue;
        }
        const fs::path original = original_dir / recorded.name;
        if (fs::exists(original) && read_file_bytes(original.string()) != rerun_bytes) {
            std::printf("audit: BYTE MISMATCH against original %s\n", original.string().c_str());
            ok = false;
            continue;
        }
        std::printf("audit: ok %s\n", recorded.name.c_str());
    }
    (void)names;
    std::printf("audit: %s\n", ok ? "byte-identical" : "FAILED");
    return ok ? 0 : 3;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Desk-scale toolkit for reflected forward-backward SDEs under "
                 "volatility uncertainty"};
    app.require_subcommand(1);
    app.fallthrough(true);

    std::string config_path;
    std::string out_dir = ".";
    bool serial = false;
    struct Override {
        std::optional<std::uint64_t> seed;
        std::optional<double> tol;
        std::optional<std::size_t> steps;
        std::optional<int> family_depth;
        std::optional<std::string> backend;
    } over;

    app.add_option("--config", config_path, "key = value experiment file");
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--serial", serial, "disable the OpenMP kernels");
    std::uint64_t seed_val = 0;
    auto* seed_opt = app.add_option("--seed", seed_val, "override the stream seed");
    double tol_val = 0.0;
    auto* tol_opt = app.add_option("--tol", tol_val, "override the solver tolerance");
    std::size_t steps_val = 0;
    auto* steps_opt = app.add_option("--steps", steps_val, "override the grid step count");
    int depth_val = 0;
    auto* depth_opt = app.add_option("--family-depth", depth_val,
                                     "override the bang-bang family depth");
    std::string backend_val;
    auto* backend_opt = app.add_option("--backend", backend_val, "lattice or scenario");

    const std::array<std::pair<const char*, const char*>, 7> names{{
        {"gheat", "backward lattice solve of the nonlinear heat equation"},
        {"paths", "simulate scenario-family paths of B and its quadratic variation"},
        {"infconv", "evaluate a Lipschitz minorant of a coefficient on a query range"},
        {"forward", "per-scenario forward Euler solve"},
        {"rbsde", "reflected backward solve (lattice or penalized scenario backend)"},
        {"rfbsde", "coupled reflected forward-backward solve via monotone iteration"},
        {"audit", "re-run a manifest and verify byte-identical artifacts"},
    }};
    for (const auto& [name, help] : names) {
        app.add_subcommand(name, help);
    }

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("gsde");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (seed_opt->count() > 0) over.seed = seed_val;
    if (tol_opt->count() > 0) over.tol = tol_val;
    if (steps_opt->count() > 0) over.steps = steps_val;
    if (depth_opt->count() > 0) over.family_depth = depth_val;
    if (backend_opt->count() > 0) over.backend = backend_val;

    par::set_enabled(!serial);

    try {
        const std::string sub = app.get_subcommands().front()->get_name();
        std::filesystem::create_directories(out_dir);

        if (sub == "audit") {
            if (config_path.empty()) {
                throw ConfigError("audit needs --config pointing at a manifest");
            }
            return run_audit(config_path, out_dir);
        }

        KvFile kv;
        if (!config_path.empty()) kv = KvFile::parse_file(config_path);
        ExperimentConfig config = ExperimentConfig::from_kv(kv);
        if (over.seed) config.seed = *over.seed;
        if (over.tol) config.tol = *over.tol;
        if (over.steps) config.steps = *over.steps;
        if (over.family_depth) config.family_depth = *over.family_depth;
        if (over.backend) config.backend = *over.backend;
        if (config.backend != "lattice" && config.backend != "scenario") {
            throw ConfigError("backend must be 'lattice' or 'scenario'");
        }

        const std::vector<std::string> artifacts = dispatch(sub, config, out_dir);
        finish_manifest(sub, config, out_dir, artifacts);
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const InvariantError& e) {
        std::fprintf(stderr, "invariant failure: %s\n", e.what());
        return 3;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numerical abort: %s\n", e.what());
        return 4;
    }
}

} // namespace gsde::cli
