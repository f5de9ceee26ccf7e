#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "stochtube/metric_schedule.hpp"
#include "stochtube/system_model.hpp"
#include "stochtube/trajectory.hpp"

namespace stochtube {

// Inputs for finite-horizon LQR along a reference trajectory; the reference
// input comes from the model's input signal.
struct LqrSpec {
    Eigen::MatrixXd Q;         // n x n, SPD
    Eigen::MatrixXd R;         // p x p, SPD
    Eigen::MatrixXd terminal;  // n x n, SPD boundary condition at t = T
    TrajectoryGrid reference;  // nominal states over [0, T]
};

class GainSchedule {
public:
    GainSchedule() = default;
    GainSchedule(std::vector<double> times, std::vector<Eigen::MatrixXd> gains);

    const std::vector<double>& times() const { return times_; }
    const Eigen::MatrixXd& gain(std::size_t k) const { return gains_[k]; }
    std::size_t num_knots() const { return times_.size(); }

    // Linear interpolation, clamped outside the grid.
    Eigen::MatrixXd at(double t) const;
    void at_into(double t, Eigen::MatrixXd& K) const;

private:
    std::vector<double> times_;
    std::vector<Eigen::MatrixXd> gains_;
};

// Backward matrix Riccati integration (RK4) from the terminal condition:
//   -dP/dt = A' P + P A - P B R^{-1} B' P + Q
// with A, B linearised along the reference. Returns the metric schedule
// M_t = P_t (with dM/dt from the Riccati right-hand side, rates unset) and
// the gain schedule K_t = R^{-1} B' P_t. Throws CertificateError when P
// loses positive definiteness, reporting the first failing time.
std::pair<MetricSchedule, GainSchedule> riccati_tvlqr(const SystemModel& model,
                                                      const LqrSpec& spec, double dt);

// Folds u(t) = u_ref(t) - K_t (x - x_ref(t)) into the drift; the result is an
// autonomous model whose deterministic solution from x_ref(0) is x_ref.
SystemModel close_loop(const SystemModel& model, const GainSchedule& gains,
                       const TrajectoryGrid& reference);

}  // namespace stochtube
