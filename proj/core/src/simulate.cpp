#include "stochtube/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "stochtube/rng.hpp"

namespace stochtube {

namespace {

[[noreturn]] void divergence(const char* what, std::size_t k, double t) {
    throw std::runtime_error(std::string(what) + ": trajectory diverged (non-finite state) at knot " +
                             std::to_string(k) + ", t=" + std::to_string(t));
}

// ||g||_2 <= sigma, checked cheaply through the Frobenius norm first.
void check_diffusion_bound(const Eigen::MatrixXd& g, double sigma, double t) {
    if (g.norm() <= sigma) return;
    const double spectral = g.jacobiSvd().singularValues()(0);
    if (spectral > sigma * (1.0 + 1e-9))
        throw std::runtime_error("diffusion bound violated: ||g(x,t)|| = " + std::to_string(spectral) +
                                 " > sigma = " + std::to_string(sigma) + " at t=" + std::to_string(t));
}

}  // namespace

TrajectoryGrid integrate_deterministic(const SystemModel& model, const Eigen::VectorXd& x0,
                                       double T, double dt) {
    if (x0.size() != model.state_dim)
        throw std::invalid_argument("integrate_deterministic: x0 dimension mismatch");
    TrajectoryGrid traj;
    traj.times = make_time_grid(T, dt);
    traj.kind = TrajectoryKind::Deterministic;
    const std::size_t K = traj.times.size() - 1;
    const int n = model.state_dim;
    traj.states.resize(n, static_cast<Eigen::Index>(K + 1));
    traj.states.col(0) = x0;

    Eigen::VectorXd x = x0, u(model.input_dim);
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), xs(n);
    for (std::size_t k = 0; k < K; ++k) {
        const double t = traj.times[k];
        model.input.eval_into(t, u);
        model.drift(x, u, t, k1);
        model.input.eval_into(t + 0.5 * dt, u);
        xs = x + 0.5 * dt * k1;
        model.drift(xs, u, t + 0.5 * dt, k2);
        xs = x + 0.5 * dt * k2;
        model.drift(xs, u, t + 0.5 * dt, k3);
        model.input.eval_into(t + dt, u);
        xs = x + dt * k3;
        model.drift(xs, u, t + dt, k4);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite()) divergence("integrate_deterministic", k + 1, traj.times[k + 1]);
        traj.states.col(static_cast<Eigen::Index>(k + 1)) = x;
    }
    return traj;
}

TrajectoryGrid integrate_sde(const SystemModel& model, const Eigen::VectorXd& x0,
                             double T, double dt, std::uint64_t seed) {
    if (x0.size() != model.state_dim)
        throw std::invalid_argument("integrate_sde: x0 dimension mismatch");
    TrajectoryGrid traj;
    traj.times = make_time_grid(T, dt);
    traj.kind = TrajectoryKind::Stochastic;
    traj.seed = seed;
    const std::size_t K = traj.times.size() - 1;
    const int n = model.state_dim;
    traj.states.resize(n, static_cast<Eigen::Index>(K + 1));
    traj.states.col(0) = x0;

    const double sqrt_dt = std::sqrt(dt);
    Eigen::VectorXd x = x0, u(model.input_dim), f(n), z(n);
    Eigen::MatrixXd g;
    for (std::size_t k = 0; k < K; ++k) {
        const double t = traj.times[k];
        model.input.eval_into(t, u);
        model.drift(x, u, t, f);
        x += dt * f;
        if (model.sigma > 0.0) {
            rng::fill_normals(seed, 0, k, z.data(), n);
            if (model.diffusion) {
                g.resize(n, n);
                model.diffusion(x, t, g);
                check_diffusion_bound(g, model.sigma, t);
                x += sqrt_dt * (g * z);
            } else {
                x += (model.sigma * sqrt_dt) * z;
            }
        }
        if (!x.allFinite()) divergence("integrate_sde", k + 1, traj.times[k + 1]);
        traj.states.col(static_cast<Eigen::Index>(k + 1)) = x;
    }
    return traj;
}

std::pair<TrajectoryGrid, TrajectoryGrid> rollout_associated_pair(
    const SystemModel& model, const Eigen::VectorXd& x0, double T, double dt,
    std::uint64_t seed) {
    return {integrate_deterministic(model, x0, T, dt), integrate_sde(model, x0, T, dt, seed)};
}

void for_each_rollout(const SystemModel& model, const Eigen::VectorXd& x0, double T, double dt,
                      std::uint64_t master_seed, std::size_t n_paths,
                      const std::function<void(std::size_t, const TrajectoryGrid&)>& visit,
                      unsigned workers) {
    if (n_paths == 0) throw std::invalid_argument("for_each_rollout: need at least one path");
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_paths));

    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const TrajectoryGrid traj =
                integrate_sde(model, x0, T, dt, rng::stream_seed(master_seed, i));
            visit(i, traj);
        }
    };

    if (workers <= 1) {
        run_range(0, n_paths);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n_paths + workers - 1) / workers;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = static_cast<std::size_t>(w) * chunk;
        const std::size_t end = std::min(n_paths, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                run_range(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<TrajectoryGrid> batch_rollouts(const SystemModel& model, const Eigen::VectorXd& x0,
                                           double T, double dt, std::uint64_t master_seed,
                                           std::size_t n_paths, unsigned workers) {
    std::vector<TrajectoryGrid> out(n_paths);
    for_each_rollout(
        model, x0, T, dt, master_seed, n_paths,
        [&out](std::size_t i, const TrajectoryGrid& traj) { out[i] = traj; }, workers);
    return out;
}

}  // namespace stochtube
