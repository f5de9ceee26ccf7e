#include "stochtube/input_signal.hpp"

#include <algorithm>
#include <stdexcept>

namespace stochtube {

InputSignal::InputSignal(int dim) : dim_(dim) {
    if (dim < 0) throw std::invalid_argument("InputSignal: dim must be >= 0");
    if (dim > 0) {
        times_ = {0.0};
        values_ = {Eigen::VectorXd::Zero(dim)};
    }
}

InputSignal InputSignal::constant(const Eigen::VectorXd& u) {
    InputSignal s;
    s.dim_ = static_cast<int>(u.size());
    s.mode_ = InterpMode::Hold;
    s.times_ = {0.0};
    s.values_ = {u};
    return s;
}

InputSignal InputSignal::sampled(std::vector<double> times, std::vector<Eigen::VectorXd> values,
                                 InterpMode mode) {
    if (times.empty() || times.size() != values.size())
        throw std::invalid_argument("InputSignal: need equally many times and values, at least one");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("InputSignal: times must be strictly increasing");
    const int dim = static_cast<int>(values.front().size());
    for (const auto& v : values)
        if (v.size() != dim) throw std::invalid_argument("InputSignal: inconsistent value dimensions");
    InputSignal s;
    s.dim_ = dim;
    s.mode_ = mode;
    s.times_ = std::move(times);
    s.values_ = std::move(values);
    return s;
}

void InputSignal::eval_into(double t, Eigen::VectorXd& u) const {
    if (dim_ == 0) {
        u.resize(0);
        return;
    }
    if (t <= times_.front()) {
        u = values_.front();
        return;
    }
    if (t >= times_.back()) {
        u = values_.back();
        return;
    }
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
    const std::size_t lo = hi - 1;
    if (mode_ == InterpMode::Hold) {
        u = values_[lo];
    } else {
        const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
        u = (1.0 - w) * values_[lo] + w * values_[hi];
    }
}

Eigen::VectorXd InputSignal::operator()(double t) const {
    Eigen::VectorXd u;
    eval_into(t, u);
    return u;
}

}  // namespace stochtube
