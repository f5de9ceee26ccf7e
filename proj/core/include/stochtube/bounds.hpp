#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stochtube/metric_schedule.hpp"

namespace stochtube {

// Parameters shared by the bound curves: probability level delta, direction
// parameter eps (empty = minimise over eps per curve), horizon T, segment
// length dt_seg for the segmented curve, quadrature step grid_dt.
struct BoundParams {
    double delta = 1e-3;
    std::optional<double> eps = 0.9;
    double T = 1.0;
    double dt_seg = 0.1;
    double grid_dt = 1e-3;

    void validate() const;  // throws std::invalid_argument
    static double default_grid_dt(double dt_seg);
};

// Accumulated quantities of a rate/noise schedule on the schedule grid:
//   rate_integral[k]          = int_0^{t_k} c_tau dtau
//   noise_energy[k]           = int_0^{t_k} sigma_bar^2 e^{-2 rate_integral} dtau
//   segment_noise_energy[j]   = the same integrand over segment [j dt_seg, (j+1) dt_seg]
// Segment integrals partition the horizon, so they sum to noise_energy.back().
struct ScheduleIntegrals {
    std::vector<double> times;
    std::vector<double> rate_integral;
    std::vector<double> noise_energy;
    std::vector<double> segment_noise_energy;
    double dt_seg = 0.0;
    double max_rate = 0.0;

    std::size_t segment_of(double t) const;  // floor(t / dt_seg), T onto the last segment
};

enum class BoundKind { SingleTime, Trajectory, TrajectorySegmented, IsaBaseline };

std::string to_string(BoundKind kind);
BoundKind bound_kind_from_string(const std::string& name);

// Per-time tube radii in the M_t-weighted norm, tagged with the parameters
// that produced them.
struct BoundCurve {
    std::vector<double> times;
    std::vector<double> radii;
    BoundKind kind = BoundKind::SingleTime;
    BoundParams params;
    double eps_effective = 0.0;  // resolved value when params.eps is empty
    int dim = 0;

    bool is_trajectory_level() const {
        return kind == BoundKind::Trajectory || kind == BoundKind::TrajectorySegmented;
    }
};

// Composite Simpson quadrature at step params.grid_dt; rates and sigma_bar
// are interpolated linearly between schedule knots. Requires populated rates
// covering [0, T].
ScheduleIntegrals compute_integrals(const MetricSchedule& schedule, const BoundParams& params);

// radius(t) = sqrt(e^{2 psi_t} Psi_t (eps1 n + eps2 log(1/delta))) with
// psi = rate_integral, Psi = noise_energy; the tightest per-time-instant bound.
BoundCurve bound_single_time(const ScheduleIntegrals& si, int dim, const BoundParams& params);

// radius(t) = sqrt(e^{2 psi_t} Psi_T (...)); holds jointly for all t <= T.
BoundCurve bound_trajectory(const ScheduleIntegrals& si, int dim, const BoundParams& params);

// radius(t) = (sqrt(e^{2 psi_t} Psi_t) + sqrt(segment energy at t))
//             * sqrt(eps1 n + eps2 log(2T/(delta dt_seg))).
// Joint over t <= T via a union bound over T/dt_seg segments; requires every
// rate strictly negative and refuses to run otherwise.
BoundCurve bound_trajectory_segmented(const ScheduleIntegrals& si, int dim,
                                      const BoundParams& params);

// Second-moment (Chebyshev) comparator radius(t) = sqrt(e^{2 psi_t} Psi_t n / delta);
// scales as sqrt(1/delta). Baseline only, labelled as such in outputs.
BoundCurve bound_isa_baseline(const ScheduleIntegrals& si, int dim, double delta);

// Nonnegative process whose conditional drift is bounded by a_t B + b_t,
// with initial value B0; coefficients sampled on a uniform grid over [0, T].
struct AffineMartingaleSpec {
    std::vector<double> a;
    std::vector<double> b;  // >= 0 pointwise
    double B0 = 0.0;
    double T = 0.0;
};

// Lower bound on P(process stays in the weighted sublevel set below B_bar up
// to T): max(0, 1 - (B0 xi_0 + int_0^T b xi dtau) / B_bar) with
// xi_t = exp(int_t^T a dtau), integrals by Simpson quadrature at grid_dt.
double am_sublevel_probability(const AffineMartingaleSpec& spec, double B_bar, double grid_dt);

// CSV with header "t,radius,kind,delta,eps,dt_seg".
void write_csv(const std::vector<BoundCurve>& curves, std::ostream& os);

}  // namespace stochtube
