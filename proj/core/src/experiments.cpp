#include "stochtube/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "stochtube/csv.hpp"
#include "stochtube/rng.hpp"
#include "stochtube/simulate.hpp"

namespace stochtube {

namespace {

std::uint64_t rate_sampling_seed(std::uint64_t master_seed) {
    return rng::hash(master_seed, 0x726567696f6eULL, 0, 0);
}

RegionBox resolve_region(const RunConfig& cfg, const TrajectoryGrid& nominal) {
    RegionBox region;
    if (cfg.rates.region_lo) {
        region.lo = *cfg.rates.region_lo;
        region.hi = *cfg.rates.region_hi;
        return region;
    }
    if (!cfg.rates.region_margin)
        throw ConfigError("config: rates needs region or region_margin");
    const Eigen::VectorXd margin = *cfg.rates.region_margin;
    region.lo = nominal.states.rowwise().minCoeff() - margin;
    region.hi = nominal.states.rowwise().maxCoeff() + margin;
    return region;
}

}  // namespace

std::pair<SystemModel, TrajectoryGrid> make_pvtol_plan(const SystemModel& plant,
                                                       const ScenarioConfig& scenario,
                                                       const Eigen::Vector2d& target,
                                                       double T, double dt) {
    if (plant.state_dim != 6 || plant.input_dim != 2)
        throw std::invalid_argument("make_pvtol_plan: needs the 6-state planar VTOL model");

    const Eigen::Vector2d start = scenario.start;
    const Eigen::Vector2d span = target - start;
    Eigen::Vector2d normal(-span[1], span[0]);
    const double span_norm = span.norm();
    if (span_norm < 1e-9) throw std::invalid_argument("make_pvtol_plan: start equals target");
    normal /= span_norm;

    // Minimum-jerk progress along the chord plus a sine arc sideways.
    const auto desired = [&](double t, Eigen::Vector2d& p, Eigen::Vector2d& v, Eigen::Vector2d& a) {
        const double tau = std::clamp(t / T, 0.0, 1.0);
        const double s = ((6.0 * tau - 15.0) * tau + 10.0) * tau * tau * tau;
        const double sd = ((30.0 * tau - 60.0) * tau + 30.0) * tau * tau / T;
        const double sdd = ((120.0 * tau - 180.0) * tau + 60.0) * tau / (T * T);
        const double pi = 3.14159265358979323846;
        p = start + s * span + scenario.bump * std::sin(pi * s) * normal;
        v = sd * span + scenario.bump * pi * std::cos(pi * s) * sd * normal;
        a = sdd * span +
            scenario.bump * pi *
                (std::cos(pi * s) * sdd - pi * std::sin(pi * s) * sd * sd) * normal;
    };

    // Recover the input map and gravity from the model itself: B is constant,
    // and vdot_z at rest with zero thrust is -g.
    const Eigen::MatrixXd B = eval_input_jacobian(plant, Eigen::VectorXd::Zero(6), 0.0);
    const double inv_m = B(4, 0);
    const double l_over_J = B(5, 0);
    Eigen::VectorXd rest = Eigen::VectorXd::Zero(6);
    SystemModel probe = plant;
    probe.input = InputSignal::constant(Eigen::Vector2d::Zero());
    const double grav = -eval_drift(probe, rest, 0.0)[4];

    const double kp = 6.0, kd = 5.0;       // position loop
    const double kphi = 80.0, kom = 18.0;  // attitude loop

    const auto feedback = [&](const Eigen::VectorXd& x, double t) -> Eigen::Vector2d {
        Eigen::Vector2d pd, vd, ad;
        desired(t, pd, vd, ad);
        const double phi = x[2], om = x[5];
        const Eigen::Vector2d p(x[0], x[1]);
        const double c = std::cos(phi), s = std::sin(phi);
        const Eigen::Vector2d v_world(x[3] * c - x[4] * s, x[3] * s + x[4] * c);
        const Eigen::Vector2d a_cmd = ad + kp * (pd - p) + kd * (vd - v_world);
        // Thrust must supply a_cmd plus gravity along the body z-axis (-sin, cos).
        const Eigen::Vector2d force(a_cmd[0], a_cmd[1] + grav);
        const double phi_d = std::atan2(-force[0], force[1]);
        const double thrust = force.norm() / inv_m;
        const double omdot_cmd = kphi * (phi_d - phi) - kom * om;
        const double diff = omdot_cmd / l_over_J;
        return {0.5 * (thrust + diff), 0.5 * (thrust - diff)};
    };

    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(6);
    x0[0] = start[0];
    x0[1] = start[1];

    // Track the arc once to record the open-loop input, then re-integrate the
    // plant under that recorded (interpolated) input so the returned pair is
    // exactly consistent.
    const std::vector<double> times = make_time_grid(T, dt);
    std::vector<Eigen::VectorXd> inputs(times.size());
    {
        SystemModel tracked = plant;
        tracked.input_dim = 0;
        tracked.input = InputSignal(0);
        tracked.drift = [&plant, &feedback](const Eigen::VectorXd& x, const Eigen::VectorXd&,
                                            double t, Eigen::VectorXd& dx) {
            plant.drift(x, feedback(x, t), t, dx);
        };
        TrajectoryGrid pass = integrate_deterministic(tracked, x0, T, dt);
        for (std::size_t k = 0; k < times.size(); ++k)
            inputs[k] = feedback(pass.state(k), times[k]);
    }

    SystemModel with_plan = plant;
    with_plan.input = InputSignal::sampled(times, std::move(inputs), InterpMode::Linear);
    TrajectoryGrid nominal = integrate_deterministic(with_plan, x0, T, dt);
    return {std::move(with_plan), std::move(nominal)};
}

Pipeline run_pipeline(const RunConfig& cfg) {
    validate_config(cfg);
    Pipeline pl;
    pl.plant = make_builtin(cfg.system.name, cfg.system.params);

    const double T = cfg.bound.T;
    const double dt = cfg.simulation.dt;

    switch (cfg.metric.source) {
        case MetricSource::Riccati: {
            TrajectoryGrid reference;
            if (cfg.scenario && cfg.system.name == "pvtol") {
                if (!cfg.safe_set)
                    throw ConfigError("config: pvtol scenario needs safe_set.goal as target");
                auto [planned, nominal] =
                    make_pvtol_plan(pl.plant, *cfg.scenario, cfg.safe_set->goal.center, T, dt);
                pl.plant = std::move(planned);
                reference = std::move(nominal);
            } else {
                reference = integrate_deterministic(pl.plant, cfg.simulation.x0, T, dt);
            }
            LqrSpec spec{cfg.metric.lqr->Q, cfg.metric.lqr->R, cfg.metric.lqr->terminal,
                         reference};
            auto [schedule, gains] = riccati_tvlqr(pl.plant, spec, dt);
            pl.schedule = std::move(schedule);
            pl.gains = std::move(gains);
            pl.model = close_loop(pl.plant, *pl.gains, reference);
            pl.nominal = integrate_deterministic(pl.model, reference.state(0), T, dt);
            break;
        }
        case MetricSource::Identity: {
            pl.model = pl.plant;
            pl.nominal = integrate_deterministic(pl.model, cfg.simulation.x0, T, dt);
            pl.schedule =
                MetricSchedule::identity(pl.nominal.times, pl.model.state_dim, pl.model.sigma);
            break;
        }
        case MetricSource::Csv: {
            pl.model = pl.plant;
            pl.nominal = integrate_deterministic(pl.model, cfg.simulation.x0, T, dt);
            pl.schedule = read_csv_bundle(cfg.metric.csv_prefix, pl.model.sigma);
            if (!grids_aligned(pl.schedule.times(), pl.nominal.times))
                throw ConfigError("config: csv metric grid does not match the simulation grid");
            break;
        }
    }

    pl.region = resolve_region(cfg, pl.nominal);
    pl.schedule = estimate_rate_schedule(pl.model, std::move(pl.schedule), pl.region,
                                         cfg.rates.samples,
                                         rate_sampling_seed(cfg.simulation.master_seed));
    pl.integrals = compute_integrals(pl.schedule, cfg.bound);

    const int n = pl.model.state_dim;
    pl.curves.push_back(bound_single_time(pl.integrals, n, cfg.bound));
    pl.curves.push_back(bound_trajectory(pl.integrals, n, cfg.bound));
    if (pl.integrals.max_rate < 0.0)
        pl.curves.push_back(bound_trajectory_segmented(pl.integrals, n, cfg.bound));
    pl.curves.push_back(bound_isa_baseline(pl.integrals, n, cfg.bound.delta));
    return pl;
}

RunConfig experiment_defaults(const std::string& name) {
    RunConfig cfg;
    cfg.experiment = name;
    if (name == "fig2") {
        cfg.system = {"ltv_decay", {{"base", -1.0}, {"amp", 0.5}, {"sigma", 0.5}}};
        cfg.metric.source = MetricSource::Identity;
        cfg.rates.samples = 8;
        cfg.rates.region_lo = Eigen::Vector2d(-1.0, -1.0);
        cfg.rates.region_hi = Eigen::Vector2d(1.0, 1.0);
        cfg.bound = {1e-3, 15.0 / 16.0, 10.0, 0.1, 1e-3};
        cfg.simulation.dt = 0.01;
        cfg.simulation.n_paths = 5000;
        cfg.simulation.master_seed = 20250607;
        cfg.simulation.x0 = Eigen::Vector2d(1.0, 0.0);
        cfg.output_dir = "out_fig2";
        return cfg;
    }
    if (name == "pvtol") {
        cfg.system = {"pvtol",
                      {{"m", 0.486}, {"J", 0.00383}, {"l", 0.25}, {"g", 9.81}, {"sigma", 0.1}}};
        cfg.metric.source = MetricSource::Riccati;
        LqrConfig lqr;
        Eigen::VectorXd qdiag(6);
        qdiag << 8.0, 8.0, 2.0, 1.0, 1.0, 0.2;
        lqr.Q = qdiag.asDiagonal();
        lqr.R = 0.5 * Eigen::MatrixXd::Identity(2, 2);
        lqr.terminal = lqr.Q;
        cfg.metric.lqr = std::move(lqr);
        cfg.rates.samples = 60;
        Eigen::VectorXd margin(6);
        margin << 0.25, 0.25, 0.15, 0.25, 0.25, 0.3;
        cfg.rates.region_margin = margin;
        cfg.bound = {1e-4, 0.9, 2.5, 0.01, 1e-3};
        cfg.simulation.dt = 0.01;
        cfg.simulation.n_paths = 10000;
        cfg.simulation.master_seed = 20250613;
        Eigen::VectorXd x0 = Eigen::VectorXd::Zero(6);
        cfg.simulation.x0 = x0;
        SafeSetSpec spec;
        spec.circles = {{Eigen::Vector2d(1.2, 0.1), 0.3}, {Eigen::Vector2d(2.3, 1.9), 0.3}};
        spec.boxes = {{Eigen::Vector2d(1.9, 0.1), Eigen::Vector2d(2.4, 0.6)}};
        spec.goal = {Eigen::Vector2d(3.5, 1.5), 1.0};
        spec.proj_coords = {0, 1};
        cfg.safe_set = spec;
        ScenarioConfig scenario;
        scenario.start = Eigen::Vector2d(0.0, 0.0);
        scenario.bump = 0.7;
        cfg.scenario = scenario;
        cfg.output_dir = "out_pvtol";
        return cfg;
    }
    throw ConfigError("unknown experiment '" + name + "' (expected fig2 or pvtol)");
}

namespace {

void write_integrals_csv(const ScheduleIntegrals& si, std::ostream& os) {
    csv::write_row(os, {"t", "rate_integral", "noise_energy", "segment_index",
                        "segment_noise_energy"});
    for (std::size_t k = 0; k < si.times.size(); ++k) {
        const std::size_t seg = si.segment_of(si.times[k]);
        csv::write_row(os, {csv::format(si.times[k]), csv::format(si.rate_integral[k]),
                            csv::format(si.noise_energy[k]), std::to_string(seg),
                            csv::format(si.segment_noise_energy[seg])});
    }
}

std::ofstream open_out(const std::filesystem::path& dir, const char* name) {
    std::ofstream os(dir / name);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    return os;
}

}  // namespace

ExperimentArtifacts run_experiment(const RunConfig& cfg) {
    if (!cfg.experiment) throw ConfigError("run_experiment: config has no experiment name");
    ExperimentArtifacts art;
    art.resolved = cfg;
    art.out_dir = cfg.output_dir;
    std::filesystem::create_directories(art.out_dir);

    art.pipeline = run_pipeline(cfg);
    Pipeline& pl = art.pipeline;
    const Eigen::VectorXd x0 = pl.nominal.state(0);

    for (const auto& curve : pl.curves) {
        if (!curve.is_trajectory_level()) continue;
        art.validations.push_back(validate_bound(pl.model, pl.schedule, curve, x0,
                                                 cfg.simulation.n_paths,
                                                 cfg.simulation.master_seed));
    }
    art.comparison = compare_bounds(pl.curves);

    const bool is_pvtol = cfg.experiment == "pvtol";
    if (is_pvtol) {
        if (!cfg.safe_set) throw ConfigError("pvtol experiment requires safe_set");
        const BoundCurve* tube_curve = nullptr;
        for (const auto& curve : pl.curves)
            if (curve.kind == BoundKind::TrajectorySegmented) tube_curve = &curve;
        if (!tube_curve)
            throw std::runtime_error(
                "pvtol experiment: no segmented curve (estimated rates are not all negative)");
        art.plan = verify_plan(pl.nominal, pl.schedule, *tube_curve, *cfg.safe_set);

        // Collision statistics of raw rollouts against the un-inflated obstacles.
        const auto& spec = *cfg.safe_set;
        std::atomic<std::size_t> collision_free{0};
        for_each_rollout(
            pl.model, x0, cfg.bound.T, cfg.simulation.dt, cfg.simulation.master_seed,
            cfg.simulation.n_paths,
            [&](std::size_t, const TrajectoryGrid& traj) {
                for (std::size_t k = 0; k < traj.num_knots(); ++k) {
                    const Eigen::Vector2d p(
                        traj.states(spec.proj_coords[0], static_cast<Eigen::Index>(k)),
                        traj.states(spec.proj_coords[1], static_cast<Eigen::Index>(k)));
                    if (!erode_check(spec, p, 0.0).obstacle_safe) return;
                }
                collision_free.fetch_add(1, std::memory_order_relaxed);
            });
        art.collision_free_paths = collision_free.load();
        art.total_paths = cfg.simulation.n_paths;
    }

    // ---- bundle ----
    {
        auto os = open_out(art.out_dir, "curves.csv");
        write_csv(pl.curves, os);
    }
    {
        auto os = open_out(art.out_dir, "integrals.csv");
        write_integrals_csv(pl.integrals, os);
    }
    {
        auto os = open_out(art.out_dir, "validation.csv");
        bool first = true;
        std::size_t vi = 0;
        for (const auto& curve : pl.curves) {
            if (!curve.is_trajectory_level()) continue;
            const auto& report = art.validations[vi++];
            if (first) {
                write_csv(report, curve.times, curve.radii, os);
                first = false;
            } else {
                std::ostringstream tmp;
                write_csv(report, curve.times, curve.radii, tmp);
                const std::string text = tmp.str();
                os << text.substr(text.find('\n') + 1);  // skip the repeated header
            }
        }
    }
    {
        auto os = open_out(art.out_dir, "comparison.csv");
        write_csv(art.comparison, os);
    }
    if (art.plan) {
        auto os = open_out(art.out_dir, "plan_report.csv");
        write_csv(*art.plan, os);
    }
    {
        auto os = open_out(art.out_dir, "summary.txt");
        os << "experiment: " << *cfg.experiment << "\n";
        os << "system: " << cfg.system.name << " (n=" << pl.model.state_dim << ")\n";
        os << "max estimated rate: " << csv::format(pl.integrals.max_rate) << "\n";
        os << "total noise energy: " << csv::format(pl.integrals.noise_energy.back()) << "\n";
        for (const auto& report : art.validations) os << report.summary() << "\n";
        os << art.comparison.summary() << "\n";
        os << "note: isa_baseline is a second-moment comparator, not part of the tube "
              "guarantee\n";
        if (art.plan) {
            os << art.plan->summary() << "\n";
            os << "collision-free rollouts (un-inflated obstacles): " << art.collision_free_paths
               << "/" << art.total_paths << "\n";
        }
    }
    {
        auto os = open_out(art.out_dir, "resolved_config.json");
        os << config_to_json(art.resolved);
    }
    return art;
}

}  // namespace stochtube
