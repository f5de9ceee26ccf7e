#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stochtube {

enum class TrajectoryKind { Deterministic, Stochastic };

std::string to_string(TrajectoryKind kind);

// States sampled on a uniform time grid; column k of `states` is the state
// at times[k].
struct TrajectoryGrid {
    std::vector<double> times;
    Eigen::MatrixXd states;  // n x (K+1)
    TrajectoryKind kind = TrajectoryKind::Deterministic;
    std::optional<std::uint64_t> seed;

    int dim() const { return static_cast<int>(states.rows()); }
    std::size_t num_knots() const { return times.size(); }
    double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
    double horizon() const { return times.empty() ? 0.0 : times.back(); }

    Eigen::VectorXd state(std::size_t k) const { return states.col(static_cast<Eigen::Index>(k)); }

    // Linear interpolation between knots, clamped at the ends.
    Eigen::VectorXd at_time(double t) const;
};

// Uniform grid 0, dt, ..., T. Throws unless dt divides T (to grid tolerance).
std::vector<double> make_time_grid(double T, double dt);

// Same length, entrywise equal within an absolute/relative mix of `tol`.
bool grids_aligned(const std::vector<double>& a, const std::vector<double>& b, double tol = 1e-9);

// CSV with header "t,x_1,...,x_n,kind,seed".
void write_csv(const TrajectoryGrid& traj, std::ostream& os);

}  // namespace stochtube
