#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stochtube/bounds.hpp"
#include "stochtube/metric_schedule.hpp"
#include "stochtube/simulate.hpp"
#include "stochtube/system_model.hpp"

namespace stochtube {

// Exact (Clopper-Pearson) upper confidence bound on a binomial proportion
// with `successes` out of `trials` at the given confidence level.
double binomial_upper_confidence(std::size_t successes, std::size_t trials, double confidence);

struct ValidationReport {
    std::size_t n_paths = 0;
    double delta = 0.0;
    BoundKind kind = BoundKind::SingleTime;
    std::vector<std::size_t> pointwise_violations;  // per knot
    std::size_t trajectory_violations = 0;          // paths exceeding the curve anywhere
    std::vector<double> sup_ratio_quantiles;        // of sup_t dev/radius, at kQuantiles
    std::uint64_t master_seed = 0;
    double grid_dt = 0.0;

    static constexpr std::array<double, 4> kQuantiles{0.5, 0.9, 0.99, 1.0};

    double violation_rate() const;
    // 99% Clopper-Pearson upper bound on the trajectory violation rate.
    double violation_rate_upper99() const;
    std::string summary() const;
};

// Rolls out n_paths stochastic trajectories against the shared deterministic
// path and counts exceedances of the curve: per knot always, per path for
// trajectory-level kinds. Deviations are measured in the schedule metric on
// the curve's grid; excursions between knots are not checked.
ValidationReport validate_bound(const SystemModel& model, const MetricSchedule& schedule,
                                const BoundCurve& curve, const Eigen::VectorXd& x0,
                                std::size_t n_paths, std::uint64_t master_seed,
                                unsigned workers = 0);

// Per-time radii of several curves on a shared grid with pairwise ratio
// summaries. Ratios are taken over knots where both radii are positive.
struct BoundComparison {
    std::vector<double> times;
    std::vector<BoundKind> kinds;
    Eigen::MatrixXd radii;  // knots x curves

    struct PairSummary {
        std::size_t first = 0;
        std::size_t second = 0;
        double max_ratio = 0.0;
        double mean_ratio = 0.0;
    };
    std::vector<PairSummary> pairs;

    // Knots where the segmented trajectory curve is strictly below the plain
    // trajectory curve (empty unless both kinds are present).
    std::vector<std::size_t> segmented_below_plain;

    double ratio(std::size_t i, std::size_t j, std::size_t knot) const;
    std::string summary() const;
};

BoundComparison compare_bounds(const std::vector<BoundCurve>& curves);

void write_csv(const ValidationReport& report, const std::vector<double>& times,
               const std::vector<double>& radii, std::ostream& os);
void write_csv(const BoundComparison& comparison, std::ostream& os);

}  // namespace stochtube
