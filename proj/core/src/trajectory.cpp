#include "stochtube/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "stochtube/csv.hpp"

namespace stochtube {

std::string to_string(TrajectoryKind kind) {
    return kind == TrajectoryKind::Deterministic ? "deterministic" : "stochastic";
}

Eigen::VectorXd TrajectoryGrid::at_time(double t) const {
    if (times.empty()) throw std::invalid_argument("TrajectoryGrid: empty");
    if (t <= times.front()) return states.col(0);
    if (t >= times.back()) return states.col(states.cols() - 1);
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const Eigen::Index hi = static_cast<Eigen::Index>(it - times.begin());
    const Eigen::Index lo = hi - 1;
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    return (1.0 - w) * states.col(lo) + w * states.col(hi);
}

std::vector<double> make_time_grid(double T, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("time grid: dt must be > 0");
    if (!(T >= dt)) throw std::invalid_argument("time grid: T must be >= dt");
    const double steps = T / dt;
    const auto K = static_cast<std::size_t>(std::llround(steps));
    if (K < 1 || std::abs(static_cast<double>(K) * dt - T) > 1e-9 * std::max(1.0, T))
        throw std::invalid_argument("time grid: dt must divide T");
    std::vector<double> times(K + 1);
    for (std::size_t k = 0; k <= K; ++k) times[k] = static_cast<double>(k) * dt;
    times[K] = T;
    return times;
}

bool grids_aligned(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > tol * std::max(1.0, std::abs(a[i]))) return false;
    return true;
}

void write_csv(const TrajectoryGrid& traj, std::ostream& os) {
    std::vector<std::string> row;
    row.push_back("t");
    for (int i = 1; i <= traj.dim(); ++i) row.push_back("x_" + std::to_string(i));
    row.push_back("kind");
    row.push_back("seed");
    csv::write_row(os, row);
    const std::string kind = to_string(traj.kind);
    const std::string seed = traj.seed ? std::to_string(*traj.seed) : "";
    for (std::size_t k = 0; k < traj.num_knots(); ++k) {
        row.clear();
        row.push_back(csv::format(traj.times[k]));
        for (int i = 0; i < traj.dim(); ++i)
            row.push_back(csv::format(traj.states(i, static_cast<Eigen::Index>(k))));
        row.push_back(kind);
        row.push_back(seed);
        csv::write_row(os, row);
    }
}

}  // namespace stochtube
