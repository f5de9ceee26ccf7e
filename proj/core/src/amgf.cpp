#include "stochtube/amgf.hpp"

#include <cmath>
#include <stdexcept>

namespace stochtube {

namespace {

void validate(const AmgfQuery& q) {
    if (q.dim < 1) throw std::invalid_argument("amgf: dim must be >= 1");
    if (!(q.radius >= 0.0)) throw std::invalid_argument("amgf: radius must be >= 0");
    if (!std::isfinite(q.lambda)) throw std::invalid_argument("amgf: lambda must be finite");
}

void validate_eps(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("amgf: eps must be in (0,1)");
}

}  // namespace

double amgf_value(const AmgfQuery& q) {
    validate(q);
    const double arg = std::abs(q.lambda) * q.radius;
    if (arg > kAmgfArgLimit)
        throw std::invalid_argument("amgf_value: |lambda|*radius exceeds the overflow guard (700); "
                                    "use amgf_lower_bound or log-domain comparisons");
    const double nu = 0.5 * static_cast<double>(q.dim);
    const double z = 0.25 * arg * arg;
    // Positive-term series; Kahan accumulation, stop on relative tail < 1e-16.
    double sum = 1.0, comp = 0.0, term = 1.0;
    for (std::size_t k = 0; k < 1000000; ++k) {
        term *= z / ((nu + static_cast<double>(k)) * (static_cast<double>(k) + 1.0));
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if (term < 1e-16 * sum) return sum;
    }
    throw std::runtime_error("amgf_value: series did not converge");
}

double amgf_weighted(const Eigen::VectorXd& x, const Eigen::MatrixXd& M, double lambda) {
    if (M.rows() != M.cols() || M.rows() != x.size())
        throw std::invalid_argument("amgf_weighted: dimension mismatch");
    if (!M.isApprox(M.transpose(), 1e-10))
        throw std::invalid_argument("amgf_weighted: M must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("amgf_weighted: M must be positive definite");
    const double quad = x.dot(M * x);
    AmgfQuery q;
    q.lambda = lambda;
    q.radius = std::sqrt(std::max(0.0, quad));
    q.dim = static_cast<int>(x.size());
    return amgf_value(q);
}

double amgf_lower_bound(const AmgfQuery& q, double eps) {
    validate(q);
    validate_eps(eps);
    const double n = static_cast<double>(q.dim);
    return std::pow(1.0 - eps * eps, 0.5 * n) * std::exp(eps * std::abs(q.lambda) * q.radius);
}

EpsilonTerms epsilon_terms(double eps) {
    validate_eps(eps);
    const double e2 = eps * eps;
    return {-std::log1p(-e2) / e2, 2.0 / e2};
}

double amgf_tail_radius(double theta, int dim, double delta, double eps) {
    if (!(theta >= 0.0)) throw std::invalid_argument("amgf_tail_radius: theta must be >= 0");
    if (dim < 1) throw std::invalid_argument("amgf_tail_radius: dim must be >= 1");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("amgf_tail_radius: delta must be in (0,1)");
    const EpsilonTerms e = epsilon_terms(eps);
    return theta * std::sqrt(e.eps1 * static_cast<double>(dim) + e.eps2 * std::log(1.0 / delta));
}

double optimize_epsilon_for_log(int dim, double log_term) {
    if (dim < 1) throw std::invalid_argument("optimize_epsilon: dim must be >= 1");
    const double n = static_cast<double>(dim);
    auto objective = [&](double eps) {
        const EpsilonTerms e = epsilon_terms(eps);
        return e.eps1 * n + e.eps2 * log_term;
    };
    // The objective is unimodal in eps on (0,1): with u = eps^2 it equals
    // (-log(1-u) + 2L)/u whose derivative has a single sign change.
    double a = 1e-3, b = 1.0 - 1e-6;
    const double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = objective(c), fd = objective(d);
    while (b - a > 1e-6) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    return 0.5 * (a + b);
}

double optimize_epsilon(int dim, double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("optimize_epsilon: delta must be in (0,1)");
    return optimize_epsilon_for_log(dim, std::log(1.0 / delta));
}

}  // namespace stochtube
