#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "stochtube/metric_schedule.hpp"
#include "stochtube/system_model.hpp"

namespace stochtube {

// Axis-aligned sampling region in state space.
struct RegionBox {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
};

// Smallest c with J' M + M J + Mdot <= 2 c M, i.e. half the largest
// generalized eigenvalue of the pencil (J' M + M J + Mdot, M).
double pointwise_rate(const Eigen::MatrixXd& J, const Eigen::MatrixXd& M,
                      const Eigen::MatrixXd& Mdot);

// Fills rates[k] = max over sampled region states of the pointwise rate at
// t_k. Sampling is seeded-uniform; the first `samples` states are a prefix of
// any larger sample set with the same seed, so growing `samples` can only
// tighten the estimate upward.
MetricSchedule estimate_rate_schedule(const SystemModel& model, MetricSchedule schedule,
                                      const RegionBox& region, std::size_t samples,
                                      std::uint64_t seed);

struct LmiViolation {
    std::size_t knot = 0;
    std::size_t sample = 0;
    double margin = 0.0;  // lambda_max of the shifted pencil; > tol means violated
};

struct LmiReport {
    bool passed = false;
    bool vacuous = false;  // no samples
    double worst_margin = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_knots = 0;
    double tol = 0.0;
    std::vector<LmiViolation> violations;
    std::string note;

    std::string summary() const;
};

// Checks lambda_max(M^{-1/2} (J'M + MJ + Mdot - 2 c_t M) M^{-1/2}) <= tol at
// every sampled (state, knot). Violations are report content, not errors.
LmiReport verify_lmi(const SystemModel& model, const MetricSchedule& schedule,
                     const RegionBox& region, std::size_t samples, double tol,
                     std::uint64_t seed);

}  // namespace stochtube
