// Command-line front end: computes concentration tubes around deterministic
// trajectories of stochastic contracting systems, validates them by seeded
// Monte Carlo, and verifies reach-avoid plans by set erosion.
//
// Exit codes: 0 success, 1 computation error, 2 config error,
// 3 plan failed verification (verify-plan only).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <sstream>

#include "stochtube/experiments.hpp"
#include "stochtube/rng.hpp"
#include "stochtube/simulate.hpp"

namespace {

using namespace stochtube;

struct CommonArgs {
    std::string config_path;
    CliOverrides overrides;
    std::string eps_text;
    std::string experiment_name;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
    auto* config = cmd->add_option("--config", args.config_path, "Config file (JSON, schema 1)");
    if (config_required) config->required();
    cmd->add_option("--out", args.overrides.output_dir, "Output directory");
    cmd->add_option("--seed", args.overrides.master_seed, "Master seed override");
    cmd->add_option("--delta", args.overrides.delta, "Probability level override");
    cmd->add_option("--eps", args.eps_text, "Bound eps override (number or 'auto')");
    cmd->add_option("--dt-seg", args.overrides.dt_seg, "Segment length override");
    cmd->add_option("--n", args.overrides.n_paths, "Number of rollouts override");
}

RunConfig load_config(CommonArgs& args) {
    RunConfig cfg;
    if (!args.config_path.empty()) {
        cfg = parse_config_file(args.config_path);
    } else if (!args.experiment_name.empty()) {
        cfg = experiment_defaults(args.experiment_name);
    } else {
        throw ConfigError("no --config given");
    }
    if (!args.eps_text.empty()) args.overrides.eps = args.eps_text;
    if (!args.experiment_name.empty()) args.overrides.experiment = args.experiment_name;
    apply_overrides(cfg, args.overrides);
    validate_config(cfg);
    return cfg;
}

std::filesystem::path prepare_out_dir(const RunConfig& cfg) {
    std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    std::ofstream echo(dir / "resolved_config.json");
    echo << config_to_json(cfg);
    return dir;
}

int cmd_simulate(CommonArgs& args) {
    const RunConfig cfg = load_config(args);
    const auto dir = prepare_out_dir(cfg);
    const SystemModel model = make_builtin(cfg.system.name, cfg.system.params);
    std::ofstream os(dir / "trajectories.csv");
    const TrajectoryGrid det =
        integrate_deterministic(model, cfg.simulation.x0, cfg.bound.T, cfg.simulation.dt);
    write_csv(det, os);
    for (std::size_t i = 0; i < cfg.simulation.n_paths; ++i) {
        const TrajectoryGrid traj =
            integrate_sde(model, cfg.simulation.x0, cfg.bound.T, cfg.simulation.dt,
                          rng::stream_seed(cfg.simulation.master_seed, i));
        std::ostringstream tmp;
        write_csv(traj, tmp);
        const std::string text = tmp.str();
        os << text.substr(text.find('\n') + 1);
    }
    std::cout << "wrote " << (dir / "trajectories.csv").string() << " (1 deterministic + "
              << cfg.simulation.n_paths << " stochastic paths)\n";
    return 0;
}

int cmd_bound(CommonArgs& args) {
    const RunConfig cfg = load_config(args);
    const auto dir = prepare_out_dir(cfg);
    const Pipeline pl = run_pipeline(cfg);
    {
        std::ofstream os(dir / "curves.csv");
        write_csv(pl.curves, os);
    }
    write_csv_bundle(pl.schedule, (dir / "metric_").string());
    std::cout << "wrote " << pl.curves.size() << " curves to " << (dir / "curves.csv").string()
              << " (max estimated rate " << pl.integrals.max_rate << ")\n";
    return 0;
}

int cmd_validate(CommonArgs& args) {
    const RunConfig cfg = load_config(args);
    const auto dir = prepare_out_dir(cfg);
    const Pipeline pl = run_pipeline(cfg);
    std::ofstream os(dir / "validation.csv");
    bool first = true;
    for (const auto& curve : pl.curves) {
        if (!curve.is_trajectory_level()) continue;
        const ValidationReport report =
            validate_bound(pl.model, pl.schedule, curve, pl.nominal.state(0),
                           cfg.simulation.n_paths, cfg.simulation.master_seed);
        std::ostringstream tmp;
        write_csv(report, curve.times, curve.radii, tmp);
        const std::string text = tmp.str();
        os << (first ? text : text.substr(text.find('\n') + 1));
        first = false;
        std::cout << report.summary() << "\n";
    }
    return 0;
}

int cmd_verify_plan(CommonArgs& args) {
    const RunConfig cfg = load_config(args);
    if (!cfg.safe_set) throw ConfigError("verify-plan: config has no safe_set");
    const auto dir = prepare_out_dir(cfg);
    const Pipeline pl = run_pipeline(cfg);
    const BoundCurve* curve = nullptr;
    for (const auto& c : pl.curves)
        if (c.kind == BoundKind::TrajectorySegmented) curve = &c;
    if (!curve)
        for (const auto& c : pl.curves)
            if (c.kind == BoundKind::Trajectory) curve = &c;
    const PlanReport report = verify_plan(pl.nominal, pl.schedule, *curve, *cfg.safe_set);
    {
        std::ofstream os(dir / "plan_report.csv");
        write_csv(report, os);
    }
    std::cout << report.summary() << "\n";
    return report.passed ? 0 : 3;
}

int cmd_compare(CommonArgs& args) {
    const RunConfig cfg = load_config(args);
    const auto dir = prepare_out_dir(cfg);
    const Pipeline pl = run_pipeline(cfg);
    const BoundComparison cmp = compare_bounds(pl.curves);
    std::ofstream os(dir / "comparison.csv");
    write_csv(cmp, os);
    std::cout << cmp.summary() << "\n";
    return 0;
}

int cmd_experiment(CommonArgs& args) {
    RunConfig cfg;
    if (!args.config_path.empty()) {
        cfg = parse_config_file(args.config_path);
        if (!args.experiment_name.empty()) args.overrides.experiment = args.experiment_name;
    } else {
        if (args.experiment_name.empty())
            throw ConfigError("experiment: give a name (fig2|pvtol) or --config");
        cfg = experiment_defaults(args.experiment_name);
    }
    if (!args.eps_text.empty()) args.overrides.eps = args.eps_text;
    apply_overrides(cfg, args.overrides);
    validate_config(cfg);
    const ExperimentArtifacts art = run_experiment(cfg);
    std::cout << "experiment bundle written to " << art.out_dir.string() << "\n";
    for (const auto& report : art.validations) std::cout << report.summary() << "\n";
    if (art.plan) {
        std::cout << art.plan->summary() << "\n";
        std::cout << "collision-free rollouts: " << art.collision_free_paths << "/"
                  << art.total_paths << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"concentration tubes for stochastic contracting systems"};
    app.require_subcommand(1);

    CommonArgs args;
    auto* simulate = app.add_subcommand("simulate", "Roll out associated trajectories");
    add_common(simulate, args, true);
    auto* bound = app.add_subcommand("bound", "Compute tube radius curves");
    add_common(bound, args, true);
    auto* validate = app.add_subcommand("validate", "Monte Carlo coverage check of the curves");
    add_common(validate, args, true);
    auto* verify = app.add_subcommand("verify-plan", "Set-erosion check of the nominal plan");
    add_common(verify, args, true);
    auto* compare = app.add_subcommand("compare", "Tabulate curve ratios");
    add_common(compare, args, true);
    auto* experiment = app.add_subcommand("experiment", "Run a packaged experiment (fig2|pvtol)");
    experiment->add_option("name", args.experiment_name, "Experiment name");
    experiment->add_option("--experiment", args.experiment_name, "Experiment name");
    add_common(experiment, args, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(args);
        if (bound->parsed()) return cmd_bound(args);
        if (validate->parsed()) return cmd_validate(args);
        if (verify->parsed()) return cmd_verify_plan(args);
        if (compare->parsed()) return cmd_compare(args);
        if (experiment->parsed()) return cmd_experiment(args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
