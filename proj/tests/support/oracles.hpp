#pragma once

// Test-only reference computations, independent of the library's own
// evaluation paths.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Inverse standard normal CDF by bisection; accurate to ~1e-13.
inline double normal_quantile(double p) {
    double lo = -12.0, hi = 12.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Monte Carlo average of exp(lambda <l, r e1>) over uniform directions l.
struct SphereAverage {
    double mean = 0.0;
    double std_error = 0.0;
};

inline SphereAverage mc_sphere_average(int n, double lambda_radius, std::size_t samples,
                                       std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    double sum = 0.0, sumsq = 0.0;
    Eigen::VectorXd g(n);
    for (std::size_t i = 0; i < samples; ++i) {
        for (int d = 0; d < n; ++d) g[d] = normal(gen);
        const double first = g[0] / g.norm();
        const double v = std::exp(lambda_radius * first);
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / static_cast<double>(samples);
    const double var = std::max(0.0, sumsq / static_cast<double>(samples) - mean * mean);
    return {mean, std::sqrt(var / static_cast<double>(samples))};
}

// Kolmogorov-Smirnov statistic of samples against a CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> samples, Cdf cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

// Stationary deviation variance of dX = c X dt + sigma dW from its noise-free
// twin at time t (per coordinate).
inline double ou_deviation_variance(double c, double sigma, double t) {
    return sigma * sigma * (1.0 - std::exp(2.0 * c * t)) / (2.0 * std::abs(c));
}

// RK4 on the scalar variance equation vdot = 2 a(t) v + sigma^2.
template <typename RateFn>
double isotropic_variance_ode(RateFn a, double sigma, double T, double dt) {
    double v = 0.0;
    const auto f = [&](double t, double vv) { return 2.0 * a(t) * vv + sigma * sigma; };
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double k1 = f(t, v);
        const double k2 = f(t + 0.5 * dt, v + 0.5 * dt * k1);
        const double k3 = f(t + 0.5 * dt, v + 0.5 * dt * k2);
        const double k4 = f(t + dt, v + dt * k3);
        v += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return v;
}

}  // namespace oracles
