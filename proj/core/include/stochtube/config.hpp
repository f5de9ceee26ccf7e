#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "stochtube/bounds.hpp"
#include "stochtube/system_model.hpp"
#include "stochtube/tube.hpp"

namespace stochtube {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SystemConfig {
    std::string name;  // ou | ltv_decay | pvtol
    ParamMap params;
};

enum class MetricSource { Identity, Riccati, Csv };

std::string to_string(MetricSource source);
MetricSource metric_source_from_string(const std::string& name);

struct LqrConfig {
    Eigen::MatrixXd Q;
    Eigen::MatrixXd R;
    Eigen::MatrixXd terminal;
};

struct MetricConfig {
    MetricSource source = MetricSource::Identity;
    std::optional<LqrConfig> lqr;  // required for riccati
    std::string csv_prefix;        // required for csv
};

struct RatesConfig {
    std::size_t samples = 100;
    // Absolute sampling box, or a per-coordinate margin applied around the
    // nominal trajectory's bounding box. Exactly one must be set.
    std::optional<Eigen::VectorXd> region_lo;
    std::optional<Eigen::VectorXd> region_hi;
    std::optional<Eigen::VectorXd> region_margin;
};

struct SimulationConfig {
    double dt = 0.01;
    std::size_t n_paths = 1000;
    std::uint64_t master_seed = 0;
    Eigen::VectorXd x0;
};

// Nominal-plan generation for the pvtol experiment: smooth polynomial from
// `start` to the goal center, arced by `bump` off the straight line.
struct ScenarioConfig {
    Eigen::Vector2d start{0.0, 0.0};
    double bump = 0.0;
};

struct RunConfig {
    int schema = 1;
    std::optional<std::string> experiment;  // fig2 | pvtol
    SystemConfig system;
    MetricConfig metric;
    RatesConfig rates;
    BoundParams bound;
    SimulationConfig simulation;
    std::optional<SafeSetSpec> safe_set;
    std::optional<ScenarioConfig> scenario;
    std::string output_dir = "out";
};

// Strict parsing: unknown keys anywhere are rejected with ConfigError.
RunConfig parse_config_json(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Canonical echo; parse_config_json(config_to_json(c)) reproduces c.
std::string config_to_json(const RunConfig& config);

// Cross-field checks that need the system built (dimensions, grids).
void validate_config(const RunConfig& config);

struct CliOverrides {
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> master_seed;
    std::optional<double> delta;
    std::optional<std::string> eps;  // number or "auto"
    std::optional<double> dt_seg;
    std::optional<std::size_t> n_paths;
    std::optional<std::string> experiment;
};

// Applied after file parsing, so overrides show up in the echoed config.
void apply_overrides(RunConfig& config, const CliOverrides& overrides);

}  // namespace stochtube
