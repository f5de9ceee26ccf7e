#pragma once

#include <Eigen/Dense>
#include <vector>

namespace stochtube {

enum class InterpMode { Hold, Linear };

// Open-loop input u(t) given by samples on a strictly increasing time grid.
// Evaluation holds or linearly interpolates between knots and clamps to the
// nearest endpoint outside [t_front, t_back]. Immutable after construction.
class InputSignal {
public:
    // Zero signal of a given dimension (dimension 0 = autonomous system).
    explicit InputSignal(int dim = 0);

    static InputSignal constant(const Eigen::VectorXd& u);
    static InputSignal sampled(std::vector<double> times,
                               std::vector<Eigen::VectorXd> values,
                               InterpMode mode = InterpMode::Linear);

    int dim() const { return dim_; }
    InterpMode mode() const { return mode_; }
    const std::vector<double>& times() const { return times_; }

    Eigen::VectorXd operator()(double t) const;
    void eval_into(double t, Eigen::VectorXd& u) const;

private:
    int dim_ = 0;
    InterpMode mode_ = InterpMode::Hold;
    std::vector<double> times_;
    std::vector<Eigen::VectorXd> values_;
};

}  // namespace stochtube
