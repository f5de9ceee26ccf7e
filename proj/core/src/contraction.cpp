#include "stochtube/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "stochtube/rng.hpp"

namespace stochtube {

namespace {

// lambda_max of the pencil (S, M) with S symmetric, M SPD.
double pencil_max_eig(const Eigen::MatrixXd& S, const Eigen::MatrixXd& M) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, M, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("generalized eigenvalue solve failed");
    return es.eigenvalues().maxCoeff();
}

Eigen::MatrixXd lmi_matrix(const Eigen::MatrixXd& J, const Eigen::MatrixXd& M,
                           const Eigen::MatrixXd& Mdot) {
    Eigen::MatrixXd S = J.transpose() * M + M * J + 0.5 * (Mdot + Mdot.transpose());
    return 0.5 * (S + S.transpose());
}

void check_spd_metric(const Eigen::MatrixXd& M) {
    if (M.rows() != M.cols()) throw std::invalid_argument("pointwise_rate: M must be square");
    if ((M - M.transpose()).norm() > 1e-10 * std::max(1.0, M.norm()))
        throw std::invalid_argument("pointwise_rate: M must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("pointwise_rate: M must be positive definite");
}

std::vector<Eigen::VectorXd> sample_region(const RegionBox& region, std::size_t samples,
                                           std::uint64_t seed, int dim) {
    if (region.lo.size() != dim || region.hi.size() != dim)
        throw std::invalid_argument("region dimension mismatch");
    for (int d = 0; d < dim; ++d)
        if (!(region.hi[d] >= region.lo[d]))
            throw std::invalid_argument("region is degenerate (hi < lo)");
    std::vector<Eigen::VectorXd> states(samples, Eigen::VectorXd(dim));
    for (std::size_t i = 0; i < samples; ++i)
        for (int d = 0; d < dim; ++d)
            states[i][d] = rng::uniform_in(seed, i, static_cast<std::uint64_t>(d),
                                           region.lo[d], region.hi[d]);
    return states;
}

}  // namespace

double pointwise_rate(const Eigen::MatrixXd& J, const Eigen::MatrixXd& M,
                      const Eigen::MatrixXd& Mdot) {
    check_spd_metric(M);
    if (J.rows() != M.rows() || Mdot.rows() != M.rows())
        throw std::invalid_argument("pointwise_rate: dimension mismatch");
    return 0.5 * pencil_max_eig(lmi_matrix(J, M, Mdot), M);
}

MetricSchedule estimate_rate_schedule(const SystemModel& model, MetricSchedule schedule,
                                      const RegionBox& region, std::size_t samples,
                                      std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("estimate_rate_schedule: samples must be >= 1");
    if (schedule.dim() != model.state_dim)
        throw std::invalid_argument("estimate_rate_schedule: schedule/model dimension mismatch");
    const auto states = sample_region(region, samples, seed, model.state_dim);

    std::vector<double> rates(schedule.num_knots());
    for (std::size_t k = 0; k < schedule.num_knots(); ++k) {
        const double t = schedule.times()[k];
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& x : states) {
            const Eigen::MatrixXd J = eval_jacobian(model, x, t);
            worst = std::max(worst, pointwise_rate(J, schedule.metric(k), schedule.metric_dot(k)));
        }
        rates[k] = worst;
    }
    schedule.set_rates(std::move(rates));
    return schedule;
}

LmiReport verify_lmi(const SystemModel& model, const MetricSchedule& schedule,
                     const RegionBox& region, std::size_t samples, double tol,
                     std::uint64_t seed) {
    if (!schedule.has_rates())
        throw std::invalid_argument("verify_lmi: schedule rates not populated");
    LmiReport report;
    report.n_samples = samples;
    report.n_knots = schedule.num_knots();
    report.tol = tol;
    if (samples == 0) {
        report.passed = true;
        report.vacuous = true;
        report.note = "no samples";
        return report;
    }
    const auto states = sample_region(region, samples, seed, model.state_dim);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < schedule.num_knots(); ++k) {
        const double t = schedule.times()[k];
        const double c = schedule.rate(k);
        for (std::size_t i = 0; i < states.size(); ++i) {
            const Eigen::MatrixXd J = eval_jacobian(model, states[i], t);
            const Eigen::MatrixXd S =
                lmi_matrix(J, schedule.metric(k), schedule.metric_dot(k)) -
                2.0 * c * schedule.metric(k);
            const double margin = pencil_max_eig(S, schedule.metric(k));
            worst = std::max(worst, margin);
            if (margin > tol) report.violations.push_back({k, i, margin});
        }
    }
    report.worst_margin = worst;
    report.passed = report.violations.empty();
    return report;
}

std::string LmiReport::summary() const {
    std::ostringstream os;
    if (vacuous) {
        os << "lmi check vacuous: no samples";
        return os.str();
    }
    os << "lmi check over " << n_samples << " samples x " << n_knots << " knots: "
       << (passed ? "pass" : "FAIL") << ", worst margin " << worst_margin << " (tol " << tol
       << "), violations " << violations.size();
    return os.str();
}

}  // namespace stochtube
