#include "stochtube/tube.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "stochtube/csv.hpp"

namespace stochtube {

void SafeSetSpec::validate(int state_dim) const {
    for (const auto& c : circles)
        if (!(c.radius > 0.0)) throw std::invalid_argument("safe set: circle radius must be > 0");
    for (const auto& b : boxes)
        if (!(b.max_corner[0] > b.min_corner[0] && b.max_corner[1] > b.min_corner[1]))
            throw std::invalid_argument("safe set: box must be non-degenerate");
    if (!(goal.radius > 0.0)) throw std::invalid_argument("safe set: goal radius must be > 0");
    if (proj_coords[0] == proj_coords[1])
        throw std::invalid_argument("safe set: projection coordinates must be distinct");
    for (int c : proj_coords)
        if (c < 0 || c >= state_dim)
            throw std::invalid_argument("safe set: projection coordinate out of range");
}

std::vector<double> weighted_deviation(const TrajectoryGrid& stochastic,
                                       const TrajectoryGrid& deterministic,
                                       const MetricSchedule& schedule) {
    if (!grids_aligned(stochastic.times, deterministic.times) ||
        !grids_aligned(stochastic.times, schedule.times()))
        throw std::invalid_argument("weighted_deviation: time grids are misaligned");
    const std::size_t K1 = schedule.num_knots();
    std::vector<double> dev(K1);
    for (std::size_t k = 0; k < K1; ++k) {
        const Eigen::VectorXd d = stochastic.states.col(static_cast<Eigen::Index>(k)) -
                                  deterministic.states.col(static_cast<Eigen::Index>(k));
        dev[k] = std::sqrt(std::max(0.0, d.dot(schedule.metric(k) * d)));
    }
    return dev;
}

namespace {

Eigen::Matrix2d projected_inverse(const Eigen::MatrixXd& M, const std::array<int, 2>& pc) {
    if (M.rows() != M.cols()) throw std::invalid_argument("project_tube_radius: M must be square");
    for (int c : pc)
        if (c < 0 || c >= M.rows())
            throw std::invalid_argument("project_tube_radius: projection coordinate out of range");
    if (pc[0] == pc[1])
        throw std::invalid_argument("project_tube_radius: projection coordinates must be distinct");
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("project_tube_radius: M must be positive definite");
    const Eigen::MatrixXd Minv = llt.solve(Eigen::MatrixXd::Identity(M.rows(), M.cols()));
    Eigen::Matrix2d S;
    S << Minv(pc[0], pc[0]), Minv(pc[0], pc[1]), Minv(pc[1], pc[0]), Minv(pc[1], pc[1]);
    return 0.5 * (S + S.transpose());
}

}  // namespace

double project_tube_radius(const Eigen::MatrixXd& M, double r, const std::array<int, 2>& pc) {
    if (!(r >= 0.0)) throw std::invalid_argument("project_tube_radius: r must be >= 0");
    const Eigen::Matrix2d S = projected_inverse(M, pc);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(S, Eigen::EigenvaluesOnly);
    return r * std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

std::array<double, 2> project_tube_axes(const Eigen::MatrixXd& M, double r,
                                        const std::array<int, 2>& pc) {
    if (!(r >= 0.0)) throw std::invalid_argument("project_tube_axes: r must be >= 0");
    const Eigen::Matrix2d S = projected_inverse(M, pc);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(S, Eigen::EigenvaluesOnly);
    return {r * std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff())),
            r * std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()))};
}

namespace {

double distance_to_box(const Eigen::Vector2d& p, const BoxObstacle& box) {
    const double dx = std::max({box.min_corner[0] - p[0], 0.0, p[0] - box.max_corner[0]});
    const double dy = std::max({box.min_corner[1] - p[1], 0.0, p[1] - box.max_corner[1]});
    return std::hypot(dx, dy);
}

}  // namespace

SafetyVerdict erode_check(const SafeSetSpec& spec, const Eigen::Vector2d& p, double r_tube) {
    if (!(r_tube >= 0.0)) throw std::invalid_argument("erode_check: r_tube must be >= 0");
    SafetyVerdict v;
    v.obstacle_safe = true;
    v.min_obstacle_margin = std::numeric_limits<double>::infinity();
    std::size_t index = 0;
    for (const auto& c : spec.circles) {
        const double margin = (p - c.center).norm() - c.radius - r_tube;
        if (margin < v.min_obstacle_margin) v.min_obstacle_margin = margin;
        if (margin <= 0.0 && v.obstacle_safe) {
            v.obstacle_safe = false;
            v.violating_obstacle = index;
        }
        ++index;
    }
    for (const auto& b : spec.boxes) {
        const double margin = distance_to_box(p, b) - r_tube;
        if (margin < v.min_obstacle_margin) v.min_obstacle_margin = margin;
        if (margin <= 0.0 && v.obstacle_safe) {
            v.obstacle_safe = false;
            v.violating_obstacle = index;
        }
        ++index;
    }
    v.goal_infeasible = spec.goal.radius <= r_tube;
    v.in_goal = !v.goal_infeasible &&
                (p - spec.goal.center).norm() <= spec.goal.radius - r_tube;
    return v;
}

PlanReport verify_plan(const TrajectoryGrid& nominal, const MetricSchedule& schedule,
                       const BoundCurve& curve, const SafeSetSpec& spec) {
    if (!curve.is_trajectory_level())
        throw std::invalid_argument(
            "verify_plan: curve kind '" + to_string(curve.kind) +
            "' bounds single time instants only and cannot certify the whole path; "
            "use a trajectory-level curve");
    if (!grids_aligned(nominal.times, schedule.times()) ||
        !grids_aligned(nominal.times, curve.times))
        throw std::invalid_argument("verify_plan: time grids are misaligned");
    spec.validate(nominal.dim());

    PlanReport report;
    report.knot_spacing = nominal.dt();
    report.knots.resize(nominal.num_knots());
    report.max_proj_radius = 0.0;
    for (std::size_t k = 0; k < nominal.num_knots(); ++k) {
        const double r_proj = project_tube_radius(schedule.metric(k), curve.radii[k], spec.proj_coords);
        report.max_proj_radius = std::max(report.max_proj_radius, r_proj);
        const Eigen::Vector2d p(nominal.states(spec.proj_coords[0], static_cast<Eigen::Index>(k)),
                                nominal.states(spec.proj_coords[1], static_cast<Eigen::Index>(k)));
        const SafetyVerdict v = erode_check(spec, p, r_proj);
        report.knots[k] = {nominal.times[k], r_proj, v.min_obstacle_margin, v.obstacle_safe,
                           v.in_goal};
        report.goal_infeasible = report.goal_infeasible || v.goal_infeasible;
        if (!v.obstacle_safe && !report.first_violation_knot) report.first_violation_knot = k;
    }
    const bool terminal_in_goal = !report.knots.empty() && report.knots.back().in_goal;
    report.passed = !report.first_violation_knot && terminal_in_goal && !report.goal_infeasible;
    return report;
}

std::string PlanReport::summary() const {
    std::ostringstream os;
    os << "plan " << (passed ? "PASS" : "FAIL") << ": max projected tube radius "
       << max_proj_radius << ", knot spacing " << knot_spacing
       << " (inter-knot excursions unchecked)";
    if (goal_infeasible) os << "; goal infeasible (radius <= tube radius)";
    if (first_violation_knot)
        os << "; first obstacle violation at knot " << *first_violation_knot << " (t="
           << knots[*first_violation_knot].t << ")";
    else if (!knots.empty() && !knots.back().in_goal)
        os << "; terminal knot misses the shrunken goal";
    return os.str();
}

void write_csv(const PlanReport& report, std::ostream& os) {
    csv::write_row(os, {"t", "proj_radius", "min_obstacle_margin", "safe"});
    for (const auto& k : report.knots) {
        const bool safe = k.obstacle_safe;
        csv::write_row(os, {csv::format(k.t), csv::format(k.proj_radius),
                            csv::format(k.min_obstacle_margin), safe ? "1" : "0"});
    }
}

}  // namespace stochtube
