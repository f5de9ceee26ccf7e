#include "stochtube/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "stochtube/csv.hpp"

namespace stochtube {

namespace {

// log P(Bin(n, p) = k)
double log_binom_pmf(std::size_t k, std::size_t n, double p) {
    const double kd = static_cast<double>(k), nd = static_cast<double>(n);
    return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) +
           kd * std::log(p) + (nd - kd) * std::log1p(-p);
}

double binom_cdf(std::size_t x, std::size_t n, double p) {
    if (p <= 0.0) return 1.0;
    if (p >= 1.0) return x >= n ? 1.0 : 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k <= x; ++k) sum += std::exp(log_binom_pmf(k, n, p));
    return std::min(1.0, sum);
}

}  // namespace

double binomial_upper_confidence(std::size_t successes, std::size_t trials, double confidence) {
    if (trials == 0) throw std::invalid_argument("binomial_upper_confidence: trials must be > 0");
    if (successes > trials)
        throw std::invalid_argument("binomial_upper_confidence: successes > trials");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("binomial_upper_confidence: confidence must be in (0,1)");
    if (successes == trials) return 1.0;
    const double alpha = 1.0 - confidence;
    // P(Bin(n, p) <= x) is decreasing in p; bisect for the alpha level.
    double lo = static_cast<double>(successes) / static_cast<double>(trials);
    double hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (binom_cdf(successes, trials, mid) > alpha)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double ValidationReport::violation_rate() const {
    return static_cast<double>(trajectory_violations) / static_cast<double>(n_paths);
}

double ValidationReport::violation_rate_upper99() const {
    return binomial_upper_confidence(trajectory_violations, n_paths, 0.99);
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    os << "validation[" << to_string(kind) << "]: " << trajectory_violations << "/" << n_paths
       << " trajectory violations (rate " << violation_rate() << ", 99% upper "
       << violation_rate_upper99() << ", target delta " << delta << "), sup-ratio quantiles";
    for (std::size_t i = 0; i < kQuantiles.size(); ++i)
        os << " q" << kQuantiles[i] << "=" << sup_ratio_quantiles[i];
    os << "; grid dt " << grid_dt << " (inter-knot excursions unchecked)";
    return os.str();
}

ValidationReport validate_bound(const SystemModel& model, const MetricSchedule& schedule,
                                const BoundCurve& curve, const Eigen::VectorXd& x0,
                                std::size_t n_paths, std::uint64_t master_seed,
                                unsigned workers) {
    if (n_paths < 1) throw std::invalid_argument("validate_bound: n_paths must be >= 1");
    if (!grids_aligned(curve.times, schedule.times()))
        throw std::invalid_argument("validate_bound: curve and schedule grids are misaligned");
    const std::size_t K1 = curve.times.size();
    if (K1 < 2) throw std::invalid_argument("validate_bound: need at least two knots");
    const double dt = curve.times[1] - curve.times[0];
    const double T = curve.times.back();

    const TrajectoryGrid det = integrate_deterministic(model, x0, T, dt);
    if (!grids_aligned(det.times, curve.times))
        throw std::invalid_argument("validate_bound: simulation grid does not match the curve");

    ValidationReport report;
    report.n_paths = n_paths;
    report.delta = curve.params.delta;
    report.kind = curve.kind;
    report.master_seed = master_seed;
    report.grid_dt = dt;

    std::vector<std::atomic<std::size_t>> knot_hits(K1);
    for (auto& a : knot_hits) a.store(0, std::memory_order_relaxed);
    std::vector<double> sup_ratios(n_paths, 0.0);
    std::atomic<std::size_t> path_hits{0};

    for_each_rollout(
        model, x0, T, dt, master_seed, n_paths,
        [&](std::size_t i, const TrajectoryGrid& traj) {
            double sup_ratio = 0.0;
            bool violated = false;
            for (std::size_t k = 0; k < K1; ++k) {
                const Eigen::VectorXd d = traj.states.col(static_cast<Eigen::Index>(k)) -
                                          det.states.col(static_cast<Eigen::Index>(k));
                const double dev = std::sqrt(std::max(0.0, d.dot(schedule.metric(k) * d)));
                const double r = curve.radii[k];
                if (dev > r) {
                    knot_hits[k].fetch_add(1, std::memory_order_relaxed);
                    violated = true;
                }
                if (r > 0.0) sup_ratio = std::max(sup_ratio, dev / r);
            }
            sup_ratios[i] = sup_ratio;
            if (violated) path_hits.fetch_add(1, std::memory_order_relaxed);
        },
        workers);

    report.pointwise_violations.resize(K1);
    for (std::size_t k = 0; k < K1; ++k) report.pointwise_violations[k] = knot_hits[k].load();
    report.trajectory_violations = path_hits.load();

    std::sort(sup_ratios.begin(), sup_ratios.end());
    for (double q : ValidationReport::kQuantiles) {
        const auto idx = static_cast<std::size_t>(
            std::min<double>(static_cast<double>(n_paths) - 1.0,
                             std::max(0.0, std::ceil(q * static_cast<double>(n_paths)) - 1.0)));
        report.sup_ratio_quantiles.push_back(sup_ratios[idx]);
    }
    return report;
}

double BoundComparison::ratio(std::size_t i, std::size_t j, std::size_t knot) const {
    const double a = radii(static_cast<Eigen::Index>(knot), static_cast<Eigen::Index>(i));
    const double b = radii(static_cast<Eigen::Index>(knot), static_cast<Eigen::Index>(j));
    if (!(a > 0.0 && b > 0.0))
        throw std::invalid_argument("BoundComparison: ratio undefined where a radius is zero");
    return a / b;
}

BoundComparison compare_bounds(const std::vector<BoundCurve>& curves) {
    if (curves.empty()) throw std::invalid_argument("compare_bounds: no curves");
    BoundComparison cmp;
    cmp.times = curves.front().times;
    for (const auto& c : curves) {
        if (!grids_aligned(c.times, cmp.times))
            throw std::invalid_argument("compare_bounds: curves do not share a time grid");
        cmp.kinds.push_back(c.kind);
    }
    const std::size_t K1 = cmp.times.size();
    cmp.radii.resize(static_cast<Eigen::Index>(K1), static_cast<Eigen::Index>(curves.size()));
    for (std::size_t c = 0; c < curves.size(); ++c)
        for (std::size_t k = 0; k < K1; ++k)
            cmp.radii(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) =
                curves[c].radii[k];

    for (std::size_t i = 0; i < curves.size(); ++i) {
        for (std::size_t j = 0; j < curves.size(); ++j) {
            if (i == j) continue;
            double max_ratio = 0.0, sum = 0.0;
            std::size_t count = 0;
            for (std::size_t k = 0; k < K1; ++k) {
                const double a = curves[i].radii[k], b = curves[j].radii[k];
                if (!(a > 0.0 && b > 0.0)) continue;
                const double r = a / b;
                max_ratio = std::max(max_ratio, r);
                sum += r;
                ++count;
            }
            cmp.pairs.push_back({i, j, max_ratio, count ? sum / static_cast<double>(count) : 0.0});
        }
    }

    const auto find_kind = [&](BoundKind kind) -> std::ptrdiff_t {
        for (std::size_t c = 0; c < cmp.kinds.size(); ++c)
            if (cmp.kinds[c] == kind) return static_cast<std::ptrdiff_t>(c);
        return -1;
    };
    const std::ptrdiff_t seg = find_kind(BoundKind::TrajectorySegmented);
    const std::ptrdiff_t plain = find_kind(BoundKind::Trajectory);
    if (seg >= 0 && plain >= 0) {
        for (std::size_t k = 0; k < K1; ++k)
            if (cmp.radii(static_cast<Eigen::Index>(k), seg) <
                cmp.radii(static_cast<Eigen::Index>(k), plain))
                cmp.segmented_below_plain.push_back(k);
    }
    return cmp;
}

std::string BoundComparison::summary() const {
    std::ostringstream os;
    os << "curve comparison over " << times.size() << " knots:";
    for (const auto& p : pairs)
        os << " " << to_string(kinds[p.first]) << "/" << to_string(kinds[p.second]) << " max "
           << p.max_ratio << " mean " << p.mean_ratio << ";";
    if (!segmented_below_plain.empty())
        os << " segmented below plain at " << segmented_below_plain.size() << " knots";
    return os.str();
}

void write_csv(const ValidationReport& report, const std::vector<double>& times,
               const std::vector<double>& radii, std::ostream& os) {
    csv::write_row(os, {"t", "radius", "pointwise_violations", "n_paths", "kind"});
    const std::string n = std::to_string(report.n_paths);
    const std::string kind = to_string(report.kind);
    for (std::size_t k = 0; k < times.size(); ++k)
        csv::write_row(os, {csv::format(times[k]), csv::format(radii[k]),
                            std::to_string(report.pointwise_violations[k]), n, kind});
}

void write_csv(const BoundComparison& comparison, std::ostream& os) {
    std::vector<std::string> row{"t"};
    for (const auto kind : comparison.kinds) row.push_back("radius_" + to_string(kind));
    csv::write_row(os, row);
    for (std::size_t k = 0; k < comparison.times.size(); ++k) {
        row.clear();
        row.push_back(csv::format(comparison.times[k]));
        for (Eigen::Index c = 0; c < comparison.radii.cols(); ++c)
            row.push_back(csv::format(comparison.radii(static_cast<Eigen::Index>(k), c)));
        csv::write_row(os, row);
    }
}

}  // namespace stochtube
