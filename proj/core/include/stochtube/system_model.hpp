#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>

#include "stochtube/input_signal.hpp"

namespace stochtube {

// Callables write into a preallocated output so the integrators stay
// allocation-free in their hot loops. All must be re-entrant.
using DriftFn = std::function<void(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                   double t, Eigen::VectorXd& dx)>;
using StateJacobianFn = std::function<void(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                           double t, Eigen::MatrixXd& jac)>;
using InputJacobianFn = std::function<void(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                           double t, Eigen::MatrixXd& jac)>;
using DiffusionFn = std::function<void(const Eigen::VectorXd& x, double t, Eigen::MatrixXd& g)>;

// Continuous-time model dX = f(X, u_t) dt + g_t(X) dW with the diffusion
// characterised by the uniform bound ||g_t g_t^T|| <= sigma^2. Any state
// feedback is assumed to be folded into the drift already.
struct SystemModel {
    int state_dim = 0;
    int input_dim = 0;
    DriftFn drift;                       // required
    StateJacobianFn jacobian;            // optional; finite differences otherwise
    InputJacobianFn input_jacobian;      // optional; finite differences otherwise
    DiffusionFn diffusion;               // optional; default g = sigma * I
    double sigma = 0.0;                  // uniform diffusion bound, >= 0
    InputSignal input;
    std::string name;

    bool has_analytic_jacobian() const { return static_cast<bool>(jacobian); }
};

inline constexpr double kDefaultFdStep = 1e-5;  // central differences

// f(x, u(t), t). Throws on dimension mismatch or non-finite output.
Eigen::VectorXd eval_drift(const SystemModel& model, const Eigen::VectorXd& x, double t);

// d f / d x at (x, u(t), t); analytic when available, else central
// differences with step h per coordinate.
Eigen::MatrixXd eval_jacobian(const SystemModel& model, const Eigen::VectorXd& x, double t,
                              double h = kDefaultFdStep);

// d f / d u at (x, u(t), t).
Eigen::MatrixXd eval_input_jacobian(const SystemModel& model, const Eigen::VectorXd& x, double t,
                                    double h = kDefaultFdStep);

enum class BuiltinSystem { Ou, LtvDecay, Pvtol };

BuiltinSystem builtin_from_string(const std::string& name);
std::string to_string(BuiltinSystem name);

using ParamMap = std::map<std::string, double>;

// Benchmark systems, each with analytic Jacobians:
//   ou        params {c, sigma}                 1-state  dx = c x dt + sigma dW
//   ltv_decay params {base, amp, sigma}         2-state  A_t = (base - amp sin t) I + [[0,2],[-2,0]]
//   pvtol     params {m, J, l, g, sigma}        6-state planar VTOL, body-frame velocities
SystemModel make_builtin(BuiltinSystem name, const ParamMap& params);
SystemModel make_builtin(const std::string& name, const ParamMap& params);

}  // namespace stochtube
