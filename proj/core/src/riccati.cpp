#include "stochtube/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace stochtube {

GainSchedule::GainSchedule(std::vector<double> times, std::vector<Eigen::MatrixXd> gains)
    : times_(std::move(times)), gains_(std::move(gains)) {
    if (times_.empty() || times_.size() != gains_.size())
        throw std::invalid_argument("GainSchedule: need one gain per time knot");
}

void GainSchedule::at_into(double t, Eigen::MatrixXd& K) const {
    if (t <= times_.front()) {
        K = gains_.front();
        return;
    }
    if (t >= times_.back()) {
        K = gains_.back();
        return;
    }
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
    K = (1.0 - w) * gains_[lo] + w * gains_[hi];
}

Eigen::MatrixXd GainSchedule::at(double t) const {
    Eigen::MatrixXd K;
    at_into(t, K);
    return K;
}

namespace {

void require_spd(const Eigen::MatrixXd& M, const char* what) {
    if (M.rows() != M.cols()) throw std::invalid_argument(std::string(what) + " must be square");
    if ((M - M.transpose()).norm() > 1e-10 * std::max(1.0, M.norm()))
        throw std::invalid_argument(std::string(what) + " must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument(std::string(what) + " must be positive definite");
}

}  // namespace

std::pair<MetricSchedule, GainSchedule> riccati_tvlqr(const SystemModel& model,
                                                      const LqrSpec& spec, double dt) {
    const int n = model.state_dim;
    const int p = model.input_dim;
    if (p < 1) throw std::invalid_argument("riccati_tvlqr: model has no inputs");
    if (spec.Q.rows() != n || spec.R.rows() != p || spec.terminal.rows() != n)
        throw std::invalid_argument("riccati_tvlqr: dimension mismatch in Q/R/terminal");
    require_spd(spec.Q, "Q");
    require_spd(spec.R, "R");
    require_spd(spec.terminal, "terminal");
    if (spec.reference.dim() != n)
        throw std::invalid_argument("riccati_tvlqr: reference dimension mismatch");

    const double T = spec.reference.horizon();
    const std::vector<double> times = make_time_grid(T, dt);
    const std::size_t K = times.size() - 1;

    const Eigen::MatrixXd Rinv = spec.R.inverse();

    auto riccati_rhs = [&](double t, const Eigen::MatrixXd& P) -> Eigen::MatrixXd {
        const Eigen::VectorXd x = spec.reference.at_time(t);
        const Eigen::MatrixXd A = eval_jacobian(model, x, t);
        const Eigen::MatrixXd B = eval_input_jacobian(model, x, t);
        Eigen::MatrixXd dP = -(A.transpose() * P + P * A - P * B * Rinv * B.transpose() * P + spec.Q);
        return 0.5 * (dP + dP.transpose());
    };

    std::vector<Eigen::MatrixXd> P(K + 1), Pdot(K + 1), gains(K + 1);
    P[K] = spec.terminal;

    // RK4 with negative step from the terminal condition.
    const double h = -dt;
    for (std::size_t k = K; k-- > 0;) {
        const double t = times[k + 1];
        const Eigen::MatrixXd& Pk1 = P[k + 1];
        const Eigen::MatrixXd k1 = riccati_rhs(t, Pk1);
        const Eigen::MatrixXd k2 = riccati_rhs(t + 0.5 * h, Pk1 + 0.5 * h * k1);
        const Eigen::MatrixXd k3 = riccati_rhs(t + 0.5 * h, Pk1 + 0.5 * h * k2);
        const Eigen::MatrixXd k4 = riccati_rhs(t + h, Pk1 + h * k3);
        Eigen::MatrixXd next = Pk1 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        next = 0.5 * (next + next.transpose());
        Eigen::LLT<Eigen::MatrixXd> llt(next);
        if (llt.info() != Eigen::Success)
            throw CertificateError("riccati_tvlqr: P lost positive definiteness at t=" +
                                   std::to_string(times[k]));
        P[k] = std::move(next);
    }

    for (std::size_t k = 0; k <= K; ++k) {
        Pdot[k] = riccati_rhs(times[k], P[k]);
        const Eigen::VectorXd x = spec.reference.at_time(times[k]);
        const Eigen::MatrixXd B = eval_input_jacobian(model, x, times[k]);
        gains[k] = Rinv * B.transpose() * P[k];
    }

    MetricSchedule schedule =
        MetricSchedule::from_parts(times, std::move(P), std::move(Pdot), model.sigma);
    return {std::move(schedule), GainSchedule(times, std::move(gains))};
}

SystemModel close_loop(const SystemModel& model, const GainSchedule& gains,
                       const TrajectoryGrid& reference) {
    if (model.input_dim < 1) throw std::invalid_argument("close_loop: model has no inputs");
    if (reference.dim() != model.state_dim)
        throw std::invalid_argument("close_loop: reference dimension mismatch");

    SystemModel cl;
    cl.name = model.name + "_cl";
    cl.state_dim = model.state_dim;
    cl.input_dim = 0;
    cl.sigma = model.sigma;
    cl.diffusion = model.diffusion;
    cl.input = InputSignal(0);

    // Shared state so drift and jacobian reuse one feedback evaluation path.
    struct Loop {
        SystemModel plant;
        GainSchedule gains;
        TrajectoryGrid reference;

        Eigen::VectorXd feedback_input(const Eigen::VectorXd& x, double t) const {
            Eigen::VectorXd u_ref = plant.input(t);
            Eigen::MatrixXd K;
            gains.at_into(t, K);
            return u_ref - K * (x - reference.at_time(t));
        }
    };
    auto loop = std::make_shared<Loop>(Loop{model, gains, reference});

    cl.drift = [loop](const Eigen::VectorXd& x, const Eigen::VectorXd&, double t,
                      Eigen::VectorXd& dx) {
        loop->plant.drift(x, loop->feedback_input(x, t), t, dx);
    };
    if (model.jacobian) {
        cl.jacobian = [loop](const Eigen::VectorXd& x, const Eigen::VectorXd&, double t,
                             Eigen::MatrixXd& jac) {
            const Eigen::VectorXd u = loop->feedback_input(x, t);
            loop->plant.jacobian(x, u, t, jac);
            const int n = loop->plant.state_dim;
            const int p = loop->plant.input_dim;
            Eigen::MatrixXd B(n, p);
            if (loop->plant.input_jacobian) {
                loop->plant.input_jacobian(x, u, t, B);
            } else {
                Eigen::VectorXd up = u, um = u, fp(n), fm(n);
                for (int j = 0; j < p; ++j) {
                    up[j] = u[j] + kDefaultFdStep;
                    um[j] = u[j] - kDefaultFdStep;
                    loop->plant.drift(x, up, t, fp);
                    loop->plant.drift(x, um, t, fm);
                    B.col(j) = (fp - fm) / (2.0 * kDefaultFdStep);
                    up[j] = u[j];
                    um[j] = u[j];
                }
            }
            jac -= B * loop->gains.at(t);
        };
    }
    return cl;
}

}  // namespace stochtube
