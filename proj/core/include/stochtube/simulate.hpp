#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "stochtube/system_model.hpp"
#include "stochtube/trajectory.hpp"

namespace stochtube {

// Classical RK4 on the uniform grid; global error O(dt^4) on smooth systems.
TrajectoryGrid integrate_deterministic(const SystemModel& model, const Eigen::VectorXd& x0,
                                       double T, double dt);

// Euler-Maruyama: X_{k+1} = X_k + f dt + g_k sqrt(dt) z_k with counter-based
// standard normal z_k. Identical (seed, dt, T, x0) reproduce the path bit for
// bit.
TrajectoryGrid integrate_sde(const SystemModel& model, const Eigen::VectorXd& x0,
                             double T, double dt, std::uint64_t seed);

// Deterministic and stochastic paths sharing x0 and the input signal.
std::pair<TrajectoryGrid, TrajectoryGrid> rollout_associated_pair(
    const SystemModel& model, const Eigen::VectorXd& x0, double T, double dt,
    std::uint64_t seed);

// Visits N stochastic rollouts, one per derived stream, in index order per
// worker chunk. The visited paths do not depend on `workers` (0 = hardware
// concurrency). `visit` must be thread-safe when workers != 1.
void for_each_rollout(const SystemModel& model, const Eigen::VectorXd& x0, double T, double dt,
                      std::uint64_t master_seed, std::size_t n_paths,
                      const std::function<void(std::size_t index, const TrajectoryGrid&)>& visit,
                      unsigned workers = 0);

// Materialised batch; prefer for_each_rollout for large N.
std::vector<TrajectoryGrid> batch_rollouts(const SystemModel& model, const Eigen::VectorXd& x0,
                                           double T, double dt, std::uint64_t master_seed,
                                           std::size_t n_paths, unsigned workers = 0);

}  // namespace stochtube
