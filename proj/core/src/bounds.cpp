#include "stochtube/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "stochtube/amgf.hpp"
#include "stochtube/csv.hpp"

namespace stochtube {

void BoundParams::validate() const {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("BoundParams: delta must be in (0,1)");
    if (eps && !(*eps > 0.0 && *eps < 1.0))
        throw std::invalid_argument("BoundParams: eps must be in (0,1) or auto");
    if (!(grid_dt > 0.0 && grid_dt <= dt_seg && dt_seg <= T))
        throw std::invalid_argument("BoundParams: need 0 < grid_dt <= dt_seg <= T");
}

double BoundParams::default_grid_dt(double dt_seg) { return std::min(1e-3, dt_seg / 10.0); }

std::size_t ScheduleIntegrals::segment_of(double t) const {
    if (segment_noise_energy.empty()) throw std::logic_error("integrals: no segments");
    const double j = std::floor(t / dt_seg + 1e-9);
    const auto idx = static_cast<std::size_t>(std::max(0.0, j));
    return std::min(idx, segment_noise_energy.size() - 1);
}

std::string to_string(BoundKind kind) {
    switch (kind) {
        case BoundKind::SingleTime: return "single_time";
        case BoundKind::Trajectory: return "trajectory";
        case BoundKind::TrajectorySegmented: return "trajectory_segmented";
        case BoundKind::IsaBaseline: return "isa_baseline";
    }
    return "?";
}

BoundKind bound_kind_from_string(const std::string& name) {
    if (name == "single_time") return BoundKind::SingleTime;
    if (name == "trajectory") return BoundKind::Trajectory;
    if (name == "trajectory_segmented") return BoundKind::TrajectorySegmented;
    if (name == "isa_baseline") return BoundKind::IsaBaseline;
    throw std::invalid_argument("unknown bound kind '" + name + "'");
}

namespace {

double lerp(double t, double t0, double t1, double v0, double v1) {
    const double w = (t - t0) / (t1 - t0);
    return (1.0 - w) * v0 + w * v1;
}

}  // namespace

ScheduleIntegrals compute_integrals(const MetricSchedule& schedule, const BoundParams& params) {
    params.validate();
    if (!schedule.has_rates()) throw std::invalid_argument("compute_integrals: rates not populated");
    const auto& times = schedule.times();
    const double tol = 1e-9 * std::max(1.0, params.T);
    if (times.front() > tol || times.back() < params.T - tol)
        throw std::invalid_argument("compute_integrals: schedule does not cover [0, T]");

    // Knots up to the horizon; the horizon itself must be a knot.
    std::size_t last = 0;
    while (last + 1 < times.size() && times[last + 1] <= params.T + tol) ++last;
    if (std::abs(times[last] - params.T) > tol)
        throw std::invalid_argument("compute_integrals: T must coincide with a schedule knot");

    ScheduleIntegrals si;
    si.dt_seg = params.dt_seg;
    si.times.assign(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(last + 1));
    si.rate_integral.assign(last + 1, 0.0);
    si.noise_energy.assign(last + 1, 0.0);
    si.max_rate = schedule.rate(0);

    // Composite Simpson per schedule interval at substep <= grid_dt; the rate
    // integral is accumulated at every substep node so the noise-energy
    // integrand e^{-2 psi} is available there.
    std::vector<double> psi_nodes, w_nodes;
    for (std::size_t k = 0; k < last; ++k) {
        const double t0 = times[k], t1 = times[k + 1];
        const double c0 = schedule.rate(k), c1 = schedule.rate(k + 1);
        const double s0 = schedule.sigma_bar(k), s1 = schedule.sigma_bar(k + 1);
        si.max_rate = std::max(si.max_rate, c1);

        const auto m = 2 * std::max<std::size_t>(
                               1, static_cast<std::size_t>(
                                      std::ceil((t1 - t0) / (2.0 * params.grid_dt) - 1e-12)));
        const double h = (t1 - t0) / static_cast<double>(m);
        psi_nodes.assign(m + 1, 0.0);
        w_nodes.assign(m + 1, 0.0);
        psi_nodes[0] = si.rate_integral[k];
        for (std::size_t j = 0; j < m; ++j) {
            const double ta = t0 + static_cast<double>(j) * h;
            const double ca = lerp(ta, t0, t1, c0, c1);
            const double cm = lerp(ta + 0.5 * h, t0, t1, c0, c1);
            const double cb = lerp(ta + h, t0, t1, c0, c1);
            psi_nodes[j + 1] = psi_nodes[j] + h / 6.0 * (ca + 4.0 * cm + cb);
        }
        for (std::size_t j = 0; j <= m; ++j) {
            const double t = t0 + static_cast<double>(j) * h;
            const double sb = lerp(t, t0, t1, s0, s1);
            w_nodes[j] = sb * sb * std::exp(-2.0 * psi_nodes[j]);
        }
        double inc = 0.0;
        for (std::size_t i = 0; 2 * i + 2 <= m; ++i)
            inc += h / 3.0 * (w_nodes[2 * i] + 4.0 * w_nodes[2 * i + 1] + w_nodes[2 * i + 2]);
        si.rate_integral[k + 1] = psi_nodes[m];
        si.noise_energy[k + 1] = si.noise_energy[k] + inc;
    }

    // Segment boundaries must land on knots; energies are differences of the
    // cumulative integral, so they sum to the total exactly.
    const auto n_seg = static_cast<std::size_t>(std::llround(params.T / params.dt_seg));
    if (n_seg < 1 || std::abs(static_cast<double>(n_seg) * params.dt_seg - params.T) > tol)
        throw std::invalid_argument("compute_integrals: dt_seg must divide T");
    std::vector<std::size_t> boundary(n_seg + 1);
    for (std::size_t j = 0; j <= n_seg; ++j) {
        const double tb = static_cast<double>(j) * params.dt_seg;
        const auto it = std::lower_bound(si.times.begin(), si.times.end(), tb - tol);
        if (it == si.times.end() || std::abs(*it - tb) > tol)
            throw std::invalid_argument("compute_integrals: dt_seg incompatible with schedule grid");
        boundary[j] = static_cast<std::size_t>(it - si.times.begin());
    }
    si.segment_noise_energy.resize(n_seg);
    for (std::size_t j = 0; j < n_seg; ++j)
        si.segment_noise_energy[j] = si.noise_energy[boundary[j + 1]] - si.noise_energy[boundary[j]];
    return si;
}

namespace {

double resolve_eps(const BoundParams& params, int dim, double log_term) {
    if (params.eps) return *params.eps;
    return optimize_epsilon_for_log(dim, log_term);
}

BoundCurve make_curve(const ScheduleIntegrals& si, BoundKind kind, const BoundParams& params,
                      int dim, double eps_effective) {
    BoundCurve curve;
    curve.times = si.times;
    curve.radii.resize(si.times.size());
    curve.kind = kind;
    curve.params = params;
    curve.eps_effective = eps_effective;
    curve.dim = dim;
    return curve;
}

}  // namespace

BoundCurve bound_single_time(const ScheduleIntegrals& si, int dim, const BoundParams& params) {
    params.validate();
    if (dim < 1) throw std::invalid_argument("bound_single_time: dim must be >= 1");
    const double L = std::log(1.0 / params.delta);
    const double eps = resolve_eps(params, dim, L);
    const EpsilonTerms e = epsilon_terms(eps);
    const double tail = e.eps1 * dim + e.eps2 * L;
    BoundCurve curve = make_curve(si, BoundKind::SingleTime, params, dim, eps);
    for (std::size_t k = 0; k < si.times.size(); ++k)
        curve.radii[k] = std::sqrt(std::exp(2.0 * si.rate_integral[k]) * si.noise_energy[k] * tail);
    return curve;
}

BoundCurve bound_trajectory(const ScheduleIntegrals& si, int dim, const BoundParams& params) {
    params.validate();
    if (dim < 1) throw std::invalid_argument("bound_trajectory: dim must be >= 1");
    const double L = std::log(1.0 / params.delta);
    const double eps = resolve_eps(params, dim, L);
    const EpsilonTerms e = epsilon_terms(eps);
    const double tail = e.eps1 * dim + e.eps2 * L;
    const double total_energy = si.noise_energy.back();
    BoundCurve curve = make_curve(si, BoundKind::Trajectory, params, dim, eps);
    for (std::size_t k = 0; k < si.times.size(); ++k)
        curve.radii[k] = std::sqrt(std::exp(2.0 * si.rate_integral[k]) * total_energy * tail);
    return curve;
}

BoundCurve bound_trajectory_segmented(const ScheduleIntegrals& si, int dim,
                                      const BoundParams& params) {
    params.validate();
    if (dim < 1) throw std::invalid_argument("bound_trajectory_segmented: dim must be >= 1");
    if (!(si.max_rate < 0.0))
        throw std::invalid_argument(
            "bound_trajectory_segmented: hypothesis violation, every rate must be strictly "
            "negative (max rate " + std::to_string(si.max_rate) + ")");
    const double L = std::log(2.0 * params.T / (params.delta * params.dt_seg));
    const double eps = resolve_eps(params, dim, L);
    const EpsilonTerms e = epsilon_terms(eps);
    const double tail = std::sqrt(e.eps1 * dim + e.eps2 * L);
    BoundCurve curve = make_curve(si, BoundKind::TrajectorySegmented, params, dim, eps);
    for (std::size_t k = 0; k < si.times.size(); ++k) {
        const double within =
            std::sqrt(std::exp(2.0 * si.rate_integral[k]) * si.noise_energy[k]);
        const double segment = std::sqrt(si.segment_noise_energy[si.segment_of(si.times[k])]);
        curve.radii[k] = (within + segment) * tail;
    }
    return curve;
}

BoundCurve bound_isa_baseline(const ScheduleIntegrals& si, int dim, double delta) {
    if (dim < 1) throw std::invalid_argument("bound_isa_baseline: dim must be >= 1");
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("bound_isa_baseline: delta must be in (0,1]");
    BoundCurve curve;
    curve.times = si.times;
    curve.radii.resize(si.times.size());
    curve.kind = BoundKind::IsaBaseline;
    curve.params.delta = delta;
    curve.params.eps = std::nullopt;
    curve.params.T = si.times.back();
    curve.params.dt_seg = si.dt_seg;
    curve.eps_effective = 0.0;
    curve.dim = dim;
    for (std::size_t k = 0; k < si.times.size(); ++k)
        curve.radii[k] = std::sqrt(std::exp(2.0 * si.rate_integral[k]) * si.noise_energy[k] *
                                   static_cast<double>(dim) / delta);
    return curve;
}

double am_sublevel_probability(const AffineMartingaleSpec& spec, double B_bar, double grid_dt) {
    if (!(B_bar > 0.0)) throw std::invalid_argument("am_sublevel_probability: B_bar must be > 0");
    if (!(spec.B0 >= 0.0)) throw std::invalid_argument("am_sublevel_probability: B0 must be >= 0");
    if (spec.a.size() != spec.b.size() || spec.a.size() < 2)
        throw std::invalid_argument("am_sublevel_probability: need matching a/b with >= 2 knots");
    if (!(spec.T > 0.0) || !(grid_dt > 0.0))
        throw std::invalid_argument("am_sublevel_probability: T and grid_dt must be > 0");
    for (double bv : spec.b)
        if (!(bv >= 0.0)) throw std::invalid_argument("am_sublevel_probability: b must be >= 0");

    const std::size_t K = spec.a.size() - 1;
    const double knot_dt = spec.T / static_cast<double>(K);

    // Fine nodes per knot interval, cumulative integral of a first.
    std::vector<double> fine_t, fine_a, fine_b;
    for (std::size_t k = 0; k < K; ++k) {
        const double t0 = static_cast<double>(k) * knot_dt;
        const auto m = 2 * std::max<std::size_t>(
                               1, static_cast<std::size_t>(std::ceil(knot_dt / (2.0 * grid_dt) - 1e-12)));
        const double h = knot_dt / static_cast<double>(m);
        for (std::size_t j = 0; j < m; ++j) {
            const double w = static_cast<double>(j) / static_cast<double>(m);
            fine_t.push_back(t0 + static_cast<double>(j) * h);
            fine_a.push_back((1.0 - w) * spec.a[k] + w * spec.a[k + 1]);
            fine_b.push_back((1.0 - w) * spec.b[k] + w * spec.b[k + 1]);
        }
    }
    fine_t.push_back(spec.T);
    fine_a.push_back(spec.a[K]);
    fine_b.push_back(spec.b[K]);

    // Substep counts are even per interval, so Simpson pairs tile the grid
    // exactly; odd nodes get the consistent half-panel value.
    const std::size_t N = fine_t.size();
    std::vector<double> cum_a(N, 0.0);
    for (std::size_t j = 0; j + 2 < N; j += 2) {
        const double h = fine_t[j + 1] - fine_t[j];
        cum_a[j + 1] = cum_a[j] + h / 12.0 * (5.0 * fine_a[j] + 8.0 * fine_a[j + 1] - fine_a[j + 2]);
        cum_a[j + 2] = cum_a[j] + h / 3.0 * (fine_a[j] + 4.0 * fine_a[j + 1] + fine_a[j + 2]);
    }
    const double total_a = cum_a[N - 1];

    // xi(t) = exp(int_t^T a)
    std::vector<double> weighted_b(N);
    for (std::size_t j = 0; j < N; ++j) weighted_b[j] = fine_b[j] * std::exp(total_a - cum_a[j]);
    double integral_b = 0.0;
    for (std::size_t j = 0; j + 2 < N; j += 2) {
        const double h = fine_t[j + 1] - fine_t[j];
        integral_b += h / 3.0 * (weighted_b[j] + 4.0 * weighted_b[j + 1] + weighted_b[j + 2]);
    }

    const double xi0 = std::exp(total_a);
    const double p = 1.0 - (spec.B0 * xi0 + integral_b) / B_bar;
    return std::clamp(p, 0.0, 1.0);
}

void write_csv(const std::vector<BoundCurve>& curves, std::ostream& os) {
    csv::write_row(os, {"t", "radius", "kind", "delta", "eps", "dt_seg"});
    for (const auto& curve : curves) {
        const std::string kind = to_string(curve.kind);
        const std::string delta = csv::format(curve.params.delta);
        const std::string eps =
            curve.kind == BoundKind::IsaBaseline ? "" : csv::format(curve.eps_effective);
        const std::string dt_seg = csv::format(curve.params.dt_seg);
        for (std::size_t k = 0; k < curve.times.size(); ++k)
            csv::write_row(os, {csv::format(curve.times[k]), csv::format(curve.radii[k]), kind,
                                delta, eps, dt_seg});
    }
}

}  // namespace stochtube
