#pragma once

#include <Eigen/Dense>

namespace stochtube {

// Direction-averaged moment generating function
//   Phi(X) = E_{l uniform on S^{n-1}} exp(lambda <l, X>),
// which depends on X only through r = ||X|| (or ||X||_M for the weighted
// form). Used to turn martingale bounds on E Phi into radius tail bounds.
struct AmgfQuery {
    double lambda = 0.0;
    double radius = 0.0;  // ||X|| or ||X||_M, >= 0
    int dim = 1;          // n >= 1
};

// Largest |lambda| * radius the series evaluator accepts before exp overflow.
inline constexpr double kAmgfArgLimit = 700.0;

// Exact sphere average via the confluent limit series
//   sum_k z^k / ((n/2)_k k!),  z = (lambda * radius)^2 / 4,
// summed with compensated accumulation to relative tail < 1e-14.
// Closed forms: n=1 -> cosh(lambda r), n=3 -> sinh(lambda r)/(lambda r).
double amgf_value(const AmgfQuery& q);

// Phi_M(x) = Phi at radius ||x||_M = sqrt(x' M x); M must be SPD.
double amgf_weighted(const Eigen::VectorXd& x, const Eigen::MatrixXd& M, double lambda);

// (1 - eps^2)^(n/2) * exp(eps |lambda| r); a guaranteed lower bound on
// amgf_value for any eps in (0,1).
double amgf_lower_bound(const AmgfQuery& q, double eps);

// eps1 = log(1/(1-eps^2)) / eps^2, eps2 = 2 / eps^2.
struct EpsilonTerms {
    double eps1 = 0.0;
    double eps2 = 0.0;
};
EpsilonTerms epsilon_terms(double eps);

// theta * sqrt(eps1 n + eps2 log(1/delta)): if a random X satisfies
// E Phi_M(X) <= exp(lambda^2 theta^2 / 2) for all lambda, then
// P(||X||_M <= radius) >= 1 - delta.
double amgf_tail_radius(double theta, int dim, double delta, double eps);

// Golden-section minimiser of eps1(e) n + eps2(e) L over e in (0,1).
double optimize_epsilon_for_log(int dim, double log_term);
double optimize_epsilon(int dim, double delta);

}  // namespace stochtube
