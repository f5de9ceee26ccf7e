#pragma once

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stochtube/bounds.hpp"
#include "stochtube/metric_schedule.hpp"
#include "stochtube/trajectory.hpp"

namespace stochtube {

struct CircleObstacle {
    Eigen::Vector2d center;
    double radius = 0.0;
};

struct BoxObstacle {
    Eigen::Vector2d min_corner;
    Eigen::Vector2d max_corner;
};

// Planar safe set: stay clear of every obstacle, end inside the goal circle.
// proj_coords selects which two state coordinates form the planning plane.
struct SafeSetSpec {
    std::vector<CircleObstacle> circles;
    std::vector<BoxObstacle> boxes;
    CircleObstacle goal;
    std::array<int, 2> proj_coords{0, 1};

    void validate(int state_dim) const;
    std::size_t num_obstacles() const { return circles.size() + boxes.size(); }
};

// ||X_k - x_k||_{M_k} per knot; grids must share the schedule's time grid.
std::vector<double> weighted_deviation(const TrajectoryGrid& stochastic,
                                       const TrajectoryGrid& deterministic,
                                       const MetricSchedule& schedule);

// Radius of the smallest circle containing the shadow of {v : v'Mv <= r^2}
// on the selected coordinate plane: r * sqrt(lambda_max(E M^{-1} E')).
double project_tube_radius(const Eigen::MatrixXd& M, double r, const std::array<int, 2>& proj_coords);

// Half axes of the exact shadow ellipse (major, minor), for analysis.
std::array<double, 2> project_tube_axes(const Eigen::MatrixXd& M, double r,
                                        const std::array<int, 2>& proj_coords);

// Membership of a point in the eroded safe set: obstacles inflated by r_tube
// (boxes by exact Euclidean distance, giving rounded corners), goal shrunk by
// r_tube.
struct SafetyVerdict {
    bool obstacle_safe = false;
    std::optional<std::size_t> violating_obstacle;  // circles first, then boxes
    double min_obstacle_margin = 0.0;               // min over obstacles of distance - r_tube
    bool in_goal = false;
    bool goal_infeasible = false;  // goal radius <= r_tube
};

SafetyVerdict erode_check(const SafeSetSpec& spec, const Eigen::Vector2d& p, double r_tube);

struct PlanKnotVerdict {
    double t = 0.0;
    double proj_radius = 0.0;
    double min_obstacle_margin = 0.0;
    bool obstacle_safe = false;
    bool in_goal = false;
};

struct PlanReport {
    std::vector<PlanKnotVerdict> knots;
    double max_proj_radius = 0.0;
    bool goal_infeasible = false;
    bool passed = false;   // every knot obstacle-safe and terminal knot in shrunken goal
    double knot_spacing = 0.0;  // gaps between knots are not certified
    std::optional<std::size_t> first_violation_knot;

    std::string summary() const;
};

// Checks the nominal plan against the safe set eroded by the projected tube
// radius at every knot. Requires a trajectory-level curve; a per-time-instant
// curve does not certify the whole path and is rejected.
PlanReport verify_plan(const TrajectoryGrid& nominal, const MetricSchedule& schedule,
                       const BoundCurve& curve, const SafeSetSpec& spec);

// CSV with header "t,proj_radius,min_obstacle_margin,safe".
void write_csv(const PlanReport& report, std::ostream& os);

}  // namespace stochtube
