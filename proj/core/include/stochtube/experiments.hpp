#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stochtube/config.hpp"
#include "stochtube/contraction.hpp"
#include "stochtube/harness.hpp"
#include "stochtube/riccati.hpp"
#include "stochtube/tube.hpp"

namespace stochtube {

// Everything up to the bound curves: system construction, nominal trajectory,
// metric synthesis/loading, rate estimation, schedule integrals, curves.
// The segmented curve is present only when every rate is strictly negative.
struct Pipeline {
    SystemModel plant;             // as configured
    SystemModel model;             // closed-loop when TVLQR gains exist, else plant
    TrajectoryGrid nominal;
    MetricSchedule schedule;       // rates populated
    RegionBox region;              // as sampled for the rate estimate
    ScheduleIntegrals integrals;
    std::vector<BoundCurve> curves;
    std::optional<GainSchedule> gains;
};

Pipeline run_pipeline(const RunConfig& config);

// Built-in experiment presets. "fig2": strongly contracting planar linear
// system, identity metric, trajectory-level curve comparison plus Monte Carlo
// coverage. "pvtol": TVLQR-stabilised reach-avoid case study with set-erosion
// plan verification.
RunConfig experiment_defaults(const std::string& name);

struct ExperimentArtifacts {
    std::filesystem::path out_dir;
    RunConfig resolved;
    Pipeline pipeline;
    std::vector<ValidationReport> validations;  // one per trajectory-level curve
    BoundComparison comparison;
    // pvtol only:
    std::optional<PlanReport> plan;
    std::size_t collision_free_paths = 0;
    std::size_t total_paths = 0;
};

// Runs the named experiment end to end and writes the bundle
// (curves.csv, integrals.csv, validation.csv, comparison.csv, plan_report.csv
// for pvtol, summary.txt, resolved_config.json) into config.output_dir.
// Identical configs and master seeds produce byte-identical bundles.
ExperimentArtifacts run_experiment(const RunConfig& config);

// Nominal plan for the pvtol scenario: a dynamically feasible (state, input)
// trajectory tracking a smooth arc from scenario.start to the goal center.
// The returned model carries the recorded open-loop input signal.
std::pair<SystemModel, TrajectoryGrid> make_pvtol_plan(const SystemModel& plant,
                                                       const ScenarioConfig& scenario,
                                                       const Eigen::Vector2d& target,
                                                       double T, double dt);

}  // namespace stochtube
