#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace stochtube {

// A contraction certificate that cannot be trusted (broken SPD structure,
// near-singular metric). Deliberately not silently regularised.
struct CertificateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Time-varying SPD metric M_t with its derivative, the contraction rates c_t
// under it, and the derived scalars
//   metric_max_eig[k]  = lambda_max(M_k)
//   sigma_bar[k]       = sqrt(metric_max_eig[k]) * sigma.
// Matrices are checked symmetric/SPD on construction; linear interpolation
// between knots is SPD-checked at midpoints. Condition numbers above 1e12
// raise CertificateError.
class MetricSchedule {
public:
    MetricSchedule() = default;  // empty placeholder; build via the factories

    // M = I everywhere, rates unset.
    static MetricSchedule identity(std::vector<double> times, int dim, double sigma);

    // metric_dots may be empty: central finite differences on the grid
    // (one-sided at the endpoints). rates may be empty: fill later.
    static MetricSchedule from_parts(std::vector<double> times,
                                     std::vector<Eigen::MatrixXd> metrics,
                                     std::vector<Eigen::MatrixXd> metric_dots,
                                     double sigma,
                                     std::vector<double> rates = {});

    int dim() const { return dim_; }
    double sigma() const { return sigma_; }
    std::size_t num_knots() const { return times_.size(); }
    const std::vector<double>& times() const { return times_; }
    const Eigen::MatrixXd& metric(std::size_t k) const { return metrics_[k]; }
    const Eigen::MatrixXd& metric_dot(std::size_t k) const { return metric_dots_[k]; }
    double metric_max_eig(std::size_t k) const { return m_bar_[k]; }
    double sigma_bar(std::size_t k) const { return sigma_bar_[k]; }

    bool has_rates() const { return !rates_.empty(); }
    const std::vector<double>& rates() const;
    double rate(std::size_t k) const { return rates().at(k); }
    void set_rates(std::vector<double> rates);

    // Linear interpolation in matrix entries, clamped outside the grid.
    Eigen::MatrixXd metric_at(double t) const;

    // Largest rate over all knots; requires rates.
    double max_rate() const;

private:
    void validate_metrics() const;

    int dim_ = 0;
    double sigma_ = 0.0;
    std::vector<double> times_;
    std::vector<Eigen::MatrixXd> metrics_;
    std::vector<Eigen::MatrixXd> metric_dots_;
    std::vector<double> rates_;
    std::vector<double> m_bar_;
    std::vector<double> sigma_bar_;
};

// CSV bundle <prefix>metrics.csv, <prefix>metric_dots.csv, <prefix>rates.csv,
// <prefix>scalars.csv; matrix rows are "t, row-major entries".
void write_csv_bundle(const MetricSchedule& schedule, const std::string& prefix);
MetricSchedule read_csv_bundle(const std::string& prefix, double sigma);

}  // namespace stochtube
