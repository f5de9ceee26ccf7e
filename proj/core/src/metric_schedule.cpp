#include "stochtube/metric_schedule.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "stochtube/csv.hpp"

namespace stochtube {

namespace {

void check_spd(const Eigen::MatrixXd& M, double t, const char* what) {
    const double scale = std::max(1.0, M.norm());
    if ((M - M.transpose()).norm() > 1e-10 * scale)
        throw CertificateError(std::string(what) + " not symmetric at t=" + std::to_string(t));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0))
        throw CertificateError(std::string(what) + " not positive definite at t=" + std::to_string(t));
    if (hi / lo > 1e12)
        throw CertificateError(std::string(what) + " near-singular (condition number " +
                               std::to_string(hi / lo) + ") at t=" + std::to_string(t));
}

}  // namespace

MetricSchedule MetricSchedule::identity(std::vector<double> times, int dim, double sigma) {
    const std::size_t K1 = times.size();
    std::vector<Eigen::MatrixXd> metrics(K1, Eigen::MatrixXd::Identity(dim, dim));
    std::vector<Eigen::MatrixXd> dots(K1, Eigen::MatrixXd::Zero(dim, dim));
    return from_parts(std::move(times), std::move(metrics), std::move(dots), sigma);
}

MetricSchedule MetricSchedule::from_parts(std::vector<double> times,
                                          std::vector<Eigen::MatrixXd> metrics,
                                          std::vector<Eigen::MatrixXd> metric_dots,
                                          double sigma,
                                          std::vector<double> rates) {
    if (times.empty() || metrics.size() != times.size())
        throw std::invalid_argument("MetricSchedule: need one metric per time knot");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1]))
            throw std::invalid_argument("MetricSchedule: times must be strictly increasing");
    if (!(sigma >= 0.0)) throw std::invalid_argument("MetricSchedule: sigma must be >= 0");
    if (!rates.empty() && rates.size() != times.size())
        throw std::invalid_argument("MetricSchedule: rates size mismatch");

    MetricSchedule s;
    s.dim_ = static_cast<int>(metrics.front().rows());
    s.sigma_ = sigma;
    s.times_ = std::move(times);
    s.metrics_ = std::move(metrics);
    s.rates_ = std::move(rates);

    if (metric_dots.empty()) {
        // Central differences; one-sided at the ends.
        const std::size_t K = s.times_.size() - 1;
        metric_dots.resize(K + 1);
        if (K == 0) {
            metric_dots[0] = Eigen::MatrixXd::Zero(s.dim_, s.dim_);
        } else {
            metric_dots[0] = (s.metrics_[1] - s.metrics_[0]) / (s.times_[1] - s.times_[0]);
            metric_dots[K] = (s.metrics_[K] - s.metrics_[K - 1]) / (s.times_[K] - s.times_[K - 1]);
            for (std::size_t k = 1; k < K; ++k)
                metric_dots[k] =
                    (s.metrics_[k + 1] - s.metrics_[k - 1]) / (s.times_[k + 1] - s.times_[k - 1]);
        }
    } else if (metric_dots.size() != s.times_.size()) {
        throw std::invalid_argument("MetricSchedule: metric_dots size mismatch");
    }
    s.metric_dots_ = std::move(metric_dots);

    s.validate_metrics();

    s.m_bar_.resize(s.times_.size());
    s.sigma_bar_.resize(s.times_.size());
    for (std::size_t k = 0; k < s.times_.size(); ++k) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.metrics_[k], Eigen::EigenvaluesOnly);
        s.m_bar_[k] = es.eigenvalues().maxCoeff();
        s.sigma_bar_[k] = std::sqrt(s.m_bar_[k]) * sigma;
    }
    return s;
}

void MetricSchedule::validate_metrics() const {
    for (std::size_t k = 0; k < times_.size(); ++k) {
        if (metrics_[k].rows() != dim_ || metrics_[k].cols() != dim_ ||
            metric_dots_[k].rows() != dim_ || metric_dots_[k].cols() != dim_)
            throw std::invalid_argument("MetricSchedule: inconsistent matrix dimensions");
        check_spd(metrics_[k], times_[k], "metric");
    }
    for (std::size_t k = 0; k + 1 < times_.size(); ++k) {
        const Eigen::MatrixXd mid = 0.5 * (metrics_[k] + metrics_[k + 1]);
        check_spd(mid, 0.5 * (times_[k] + times_[k + 1]), "interpolated metric");
    }
}

const std::vector<double>& MetricSchedule::rates() const {
    if (rates_.empty()) throw std::logic_error("MetricSchedule: rates not populated");
    return rates_;
}

void MetricSchedule::set_rates(std::vector<double> rates) {
    if (rates.size() != times_.size())
        throw std::invalid_argument("MetricSchedule: rates size mismatch");
    rates_ = std::move(rates);
}

Eigen::MatrixXd MetricSchedule::metric_at(double t) const {
    if (t <= times_.front()) return metrics_.front();
    if (t >= times_.back()) return metrics_.back();
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
    return (1.0 - w) * metrics_[lo] + w * metrics_[hi];
}

double MetricSchedule::max_rate() const {
    const auto& r = rates();
    return *std::max_element(r.begin(), r.end());
}

namespace {

void write_matrix_file(const std::string& path, const std::vector<double>& times,
                       const std::vector<Eigen::MatrixXd>& mats) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    const int n = static_cast<int>(mats.front().rows());
    std::vector<std::string> row;
    row.push_back("t");
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            row.push_back("m_" + std::to_string(i) + "_" + std::to_string(j));
    csv::write_row(os, row);
    for (std::size_t k = 0; k < times.size(); ++k) {
        row.clear();
        row.push_back(csv::format(times[k]));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) row.push_back(csv::format(mats[k](i, j)));
        csv::write_row(os, row);
    }
}

std::pair<std::vector<double>, std::vector<Eigen::MatrixXd>> read_matrix_file(
    const std::string& path) {
    const csv::Table t = csv::read_file(path);
    const std::size_t cols = t.header.size();
    const int n = static_cast<int>(std::llround(std::sqrt(static_cast<double>(cols - 1))));
    if (static_cast<std::size_t>(n) * static_cast<std::size_t>(n) + 1 != cols)
        throw std::invalid_argument("metric csv '" + path + "': column count is not 1 + n^2");
    std::vector<double> times(t.rows.size());
    std::vector<Eigen::MatrixXd> mats(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        times[r] = t.number(r, 0);
        Eigen::MatrixXd m(n, n);
        std::size_t c = 1;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = t.number(r, c++);
        mats[r] = m;
    }
    return {std::move(times), std::move(mats)};
}

}  // namespace

void write_csv_bundle(const MetricSchedule& schedule, const std::string& prefix) {
    std::vector<Eigen::MatrixXd> metrics, dots;
    for (std::size_t k = 0; k < schedule.num_knots(); ++k) {
        metrics.push_back(schedule.metric(k));
        dots.push_back(schedule.metric_dot(k));
    }
    write_matrix_file(prefix + "metrics.csv", schedule.times(), metrics);
    write_matrix_file(prefix + "metric_dots.csv", schedule.times(), dots);
    {
        std::ofstream os(prefix + "rates.csv");
        csv::write_row(os, {"t", "rate"});
        if (schedule.has_rates())
            for (std::size_t k = 0; k < schedule.num_knots(); ++k)
                csv::write_row(os, {csv::format(schedule.times()[k]), csv::format(schedule.rate(k))});
    }
    {
        std::ofstream os(prefix + "scalars.csv");
        csv::write_row(os, {"t", "metric_max_eig", "sigma_bar"});
        for (std::size_t k = 0; k < schedule.num_knots(); ++k)
            csv::write_row(os, {csv::format(schedule.times()[k]),
                                csv::format(schedule.metric_max_eig(k)),
                                csv::format(schedule.sigma_bar(k))});
    }
}

MetricSchedule read_csv_bundle(const std::string& prefix, double sigma) {
    auto [times, metrics] = read_matrix_file(prefix + "metrics.csv");
    std::vector<Eigen::MatrixXd> dots;
    {
        std::ifstream probe(prefix + "metric_dots.csv");
        if (probe) {
            auto [dtimes, dmats] = read_matrix_file(prefix + "metric_dots.csv");
            if (dtimes.size() == times.size()) dots = std::move(dmats);
        }
    }
    std::vector<double> rates;
    {
        std::ifstream probe(prefix + "rates.csv");
        if (probe) {
            const csv::Table t = csv::read(probe);
            if (t.rows.size() == times.size()) {
                const std::size_t col = t.column("rate");
                for (std::size_t r = 0; r < t.rows.size(); ++r) rates.push_back(t.number(r, col));
            }
        }
    }
    return MetricSchedule::from_parts(std::move(times), std::move(metrics), std::move(dots), sigma,
                                      std::move(rates));
}

}  // namespace stochtube
