#include "stochtube/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stochtube/trajectory.hpp"

namespace stochtube {

using nlohmann::json;

std::string to_string(MetricSource source) {
    switch (source) {
        case MetricSource::Identity: return "identity";
        case MetricSource::Riccati: return "riccati";
        case MetricSource::Csv: return "csv";
    }
    return "?";
}

MetricSource metric_source_from_string(const std::string& name) {
    if (name == "identity") return MetricSource::Identity;
    if (name == "riccati") return MetricSource::Riccati;
    if (name == "csv") return MetricSource::Csv;
    throw ConfigError("config: unknown metric source '" + name + "'");
}

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
    if (!obj.is_object()) throw ConfigError("config: " + ctx + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError("config: unknown key '" + key + "' in " + ctx);
    }
}

const json& require(const json& obj, const char* key, const std::string& ctx) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError("config: missing key '" + std::string(key) + "' in " + ctx);
    return *it;
}

double as_number(const json& v, const std::string& ctx) {
    if (!v.is_number()) throw ConfigError("config: " + ctx + " must be a number");
    return v.get<double>();
}

Eigen::VectorXd as_vector(const json& v, const std::string& ctx) {
    if (!v.is_array()) throw ConfigError("config: " + ctx + " must be an array of numbers");
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = as_number(v[i], ctx);
    return out;
}

Eigen::MatrixXd as_matrix(const json& v, const std::string& ctx) {
    if (!v.is_array() || v.empty()) throw ConfigError("config: " + ctx + " must be an array of rows");
    const std::size_t rows = v.size();
    const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
    if (cols == 0) throw ConfigError("config: " + ctx + " rows must be non-empty arrays");
    Eigen::MatrixXd out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!v[i].is_array() || v[i].size() != cols)
            throw ConfigError("config: " + ctx + " must be rectangular");
        for (std::size_t j = 0; j < cols; ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                as_number(v[i][j], ctx);
    }
    return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        out.push_back(row);
    }
    return out;
}

SafeSetSpec parse_safe_set(const json& obj) {
    check_keys(obj, {"circles", "boxes", "goal", "proj_coords"}, "safe_set");
    SafeSetSpec spec;
    if (obj.contains("circles")) {
        for (const auto& c : obj["circles"]) {
            check_keys(c, {"center", "radius"}, "safe_set.circles[]");
            const Eigen::VectorXd center = as_vector(require(c, "center", "circle"), "circle center");
            if (center.size() != 2) throw ConfigError("config: circle center must have 2 entries");
            spec.circles.push_back({Eigen::Vector2d(center[0], center[1]),
                                    as_number(require(c, "radius", "circle"), "circle radius")});
        }
    }
    if (obj.contains("boxes")) {
        for (const auto& b : obj["boxes"]) {
            check_keys(b, {"min", "max"}, "safe_set.boxes[]");
            const Eigen::VectorXd lo = as_vector(require(b, "min", "box"), "box min");
            const Eigen::VectorXd hi = as_vector(require(b, "max", "box"), "box max");
            if (lo.size() != 2 || hi.size() != 2)
                throw ConfigError("config: box corners must have 2 entries");
            spec.boxes.push_back({Eigen::Vector2d(lo[0], lo[1]), Eigen::Vector2d(hi[0], hi[1])});
        }
    }
    const json& goal = require(obj, "goal", "safe_set");
    check_keys(goal, {"center", "radius"}, "safe_set.goal");
    const Eigen::VectorXd gc = as_vector(require(goal, "center", "goal"), "goal center");
    if (gc.size() != 2) throw ConfigError("config: goal center must have 2 entries");
    spec.goal = {Eigen::Vector2d(gc[0], gc[1]), as_number(require(goal, "radius", "goal"), "goal radius")};
    const json& pc = require(obj, "proj_coords", "safe_set");
    if (!pc.is_array() || pc.size() != 2)
        throw ConfigError("config: proj_coords must be a pair of indices");
    spec.proj_coords = {pc[0].get<int>(), pc[1].get<int>()};
    return spec;
}

json safe_set_to_json(const SafeSetSpec& spec) {
    json obj;
    json circles = json::array();
    for (const auto& c : spec.circles)
        circles.push_back({{"center", vector_to_json(c.center)}, {"radius", c.radius}});
    obj["circles"] = circles;
    json boxes = json::array();
    for (const auto& b : spec.boxes)
        boxes.push_back({{"min", vector_to_json(b.min_corner)}, {"max", vector_to_json(b.max_corner)}});
    obj["boxes"] = boxes;
    obj["goal"] = {{"center", vector_to_json(spec.goal.center)}, {"radius", spec.goal.radius}};
    obj["proj_coords"] = {spec.proj_coords[0], spec.proj_coords[1]};
    return obj;
}

}  // namespace

RunConfig parse_config_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(root,
               {"schema", "experiment", "system", "metric", "rates", "bound", "simulation",
                "safe_set", "scenario", "output_dir"},
               "top level");

    RunConfig cfg;
    const json& schema = require(root, "schema", "top level");
    if (!schema.is_number_integer() || schema.get<int>() != 1)
        throw ConfigError("config: unsupported schema version (expected 1)");
    cfg.schema = 1;

    if (root.contains("experiment")) cfg.experiment = root["experiment"].get<std::string>();

    {
        const json& sys = require(root, "system", "top level");
        check_keys(sys, {"name", "params"}, "system");
        cfg.system.name = require(sys, "name", "system").get<std::string>();
        builtin_from_string(cfg.system.name);  // reject unknown names early
        if (sys.contains("params"))
            for (const auto& [key, value] : sys["params"].items())
                cfg.system.params[key] = as_number(value, "system.params." + key);
    }

    {
        const json& met = require(root, "metric", "top level");
        check_keys(met, {"source", "lqr", "csv_prefix"}, "metric");
        cfg.metric.source =
            metric_source_from_string(require(met, "source", "metric").get<std::string>());
        if (met.contains("lqr")) {
            const json& lqr = met["lqr"];
            check_keys(lqr, {"Q", "R", "terminal"}, "metric.lqr");
            LqrConfig l;
            l.Q = as_matrix(require(lqr, "Q", "metric.lqr"), "Q");
            l.R = as_matrix(require(lqr, "R", "metric.lqr"), "R");
            l.terminal = as_matrix(require(lqr, "terminal", "metric.lqr"), "terminal");
            cfg.metric.lqr = std::move(l);
        }
        if (met.contains("csv_prefix")) cfg.metric.csv_prefix = met["csv_prefix"].get<std::string>();
        if (cfg.metric.source == MetricSource::Riccati && !cfg.metric.lqr)
            throw ConfigError("config: metric.source 'riccati' requires metric.lqr");
        if (cfg.metric.source == MetricSource::Csv && cfg.metric.csv_prefix.empty())
            throw ConfigError("config: metric.source 'csv' requires metric.csv_prefix");
    }

    {
        const json& rates = require(root, "rates", "top level");
        check_keys(rates, {"samples", "region", "region_margin"}, "rates");
        if (rates.contains("samples")) cfg.rates.samples = rates["samples"].get<std::size_t>();
        if (rates.contains("region")) {
            const json& region = rates["region"];
            check_keys(region, {"lo", "hi"}, "rates.region");
            cfg.rates.region_lo = as_vector(require(region, "lo", "rates.region"), "region lo");
            cfg.rates.region_hi = as_vector(require(region, "hi", "rates.region"), "region hi");
        }
        if (rates.contains("region_margin"))
            cfg.rates.region_margin = as_vector(rates["region_margin"], "region_margin");
        if (cfg.rates.region_margin && cfg.rates.region_lo)
            throw ConfigError("config: rates.region and rates.region_margin are exclusive");
        if (!cfg.rates.region_margin && !cfg.rates.region_lo)
            throw ConfigError("config: rates needs region or region_margin");
    }

    {
        const json& bound = require(root, "bound", "top level");
        check_keys(bound, {"delta", "eps", "T", "dt_seg", "grid_dt"}, "bound");
        cfg.bound.delta = as_number(require(bound, "delta", "bound"), "bound.delta");
        const json& eps = require(bound, "eps", "bound");
        if (eps.is_string()) {
            if (eps.get<std::string>() != "auto")
                throw ConfigError("config: bound.eps must be a number or \"auto\"");
            cfg.bound.eps = std::nullopt;
        } else {
            cfg.bound.eps = as_number(eps, "bound.eps");
        }
        cfg.bound.T = as_number(require(bound, "T", "bound"), "bound.T");
        cfg.bound.dt_seg = as_number(require(bound, "dt_seg", "bound"), "bound.dt_seg");
        cfg.bound.grid_dt = bound.contains("grid_dt")
                                ? as_number(bound["grid_dt"], "bound.grid_dt")
                                : BoundParams::default_grid_dt(cfg.bound.dt_seg);
        try {
            cfg.bound.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
    }

    {
        const json& sim = require(root, "simulation", "top level");
        check_keys(sim, {"dt", "n_paths", "master_seed", "x0"}, "simulation");
        cfg.simulation.dt = as_number(require(sim, "dt", "simulation"), "simulation.dt");
        cfg.simulation.n_paths = require(sim, "n_paths", "simulation").get<std::size_t>();
        cfg.simulation.master_seed = require(sim, "master_seed", "simulation").get<std::uint64_t>();
        cfg.simulation.x0 = as_vector(require(sim, "x0", "simulation"), "simulation.x0");
    }

    if (root.contains("safe_set")) cfg.safe_set = parse_safe_set(root["safe_set"]);

    if (root.contains("scenario")) {
        const json& sc = root["scenario"];
        check_keys(sc, {"start", "bump"}, "scenario");
        ScenarioConfig s;
        const Eigen::VectorXd start = as_vector(require(sc, "start", "scenario"), "scenario.start");
        if (start.size() != 2) throw ConfigError("config: scenario.start must have 2 entries");
        s.start = Eigen::Vector2d(start[0], start[1]);
        if (sc.contains("bump")) s.bump = as_number(sc["bump"], "scenario.bump");
        cfg.scenario = s;
    }

    if (root.contains("output_dir")) cfg.output_dir = root["output_dir"].get<std::string>();
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_json(ss.str());
}

std::string config_to_json(const RunConfig& cfg) {
    json root;
    root["schema"] = 1;
    if (cfg.experiment) root["experiment"] = *cfg.experiment;
    {
        json params;
        for (const auto& [key, value] : cfg.system.params) params[key] = value;
        root["system"] = {{"name", cfg.system.name}, {"params", params}};
    }
    {
        json met;
        met["source"] = to_string(cfg.metric.source);
        if (cfg.metric.lqr)
            met["lqr"] = {{"Q", matrix_to_json(cfg.metric.lqr->Q)},
                          {"R", matrix_to_json(cfg.metric.lqr->R)},
                          {"terminal", matrix_to_json(cfg.metric.lqr->terminal)}};
        if (!cfg.metric.csv_prefix.empty()) met["csv_prefix"] = cfg.metric.csv_prefix;
        root["metric"] = met;
    }
    {
        json rates;
        rates["samples"] = cfg.rates.samples;
        if (cfg.rates.region_lo)
            rates["region"] = {{"lo", vector_to_json(*cfg.rates.region_lo)},
                               {"hi", vector_to_json(*cfg.rates.region_hi)}};
        if (cfg.rates.region_margin)
            rates["region_margin"] = vector_to_json(*cfg.rates.region_margin);
        root["rates"] = rates;
    }
    {
        json bound;
        bound["delta"] = cfg.bound.delta;
        if (cfg.bound.eps)
            bound["eps"] = *cfg.bound.eps;
        else
            bound["eps"] = "auto";
        bound["T"] = cfg.bound.T;
        bound["dt_seg"] = cfg.bound.dt_seg;
        bound["grid_dt"] = cfg.bound.grid_dt;
        root["bound"] = bound;
    }
    root["simulation"] = {{"dt", cfg.simulation.dt},
                          {"n_paths", cfg.simulation.n_paths},
                          {"master_seed", cfg.simulation.master_seed},
                          {"x0", vector_to_json(cfg.simulation.x0)}};
    if (cfg.safe_set) root["safe_set"] = safe_set_to_json(*cfg.safe_set);
    if (cfg.scenario)
        root["scenario"] = {{"start", vector_to_json(cfg.scenario->start)},
                            {"bump", cfg.scenario->bump}};
    root["output_dir"] = cfg.output_dir;
    return root.dump(2) + "\n";
}

void validate_config(const RunConfig& cfg) {
    SystemModel model;
    try {
        model = make_builtin(cfg.system.name, cfg.system.params);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    const int n = model.state_dim;
    if (cfg.simulation.x0.size() != n)
        throw ConfigError("config: simulation.x0 has dimension " +
                          std::to_string(cfg.simulation.x0.size()) + ", system expects " +
                          std::to_string(n));
    if (cfg.rates.region_lo &&
        (cfg.rates.region_lo->size() != n || cfg.rates.region_hi->size() != n))
        throw ConfigError("config: rates.region dimensions do not match the system");
    if (cfg.rates.region_margin && cfg.rates.region_margin->size() != n)
        throw ConfigError("config: rates.region_margin dimension does not match the system");
    if (!(cfg.simulation.dt > 0.0)) throw ConfigError("config: simulation.dt must be > 0");
    try {
        make_time_grid(cfg.bound.T, cfg.simulation.dt);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (cfg.simulation.n_paths < 1) throw ConfigError("config: simulation.n_paths must be >= 1");
    if (cfg.metric.lqr) {
        if (cfg.metric.lqr->Q.rows() != n || cfg.metric.lqr->terminal.rows() != n ||
            cfg.metric.lqr->R.rows() != model.input_dim)
            throw ConfigError("config: metric.lqr matrix dimensions do not match the system");
    }
    if (cfg.safe_set) {
        try {
            cfg.safe_set->validate(n);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
    }
}

void apply_overrides(RunConfig& cfg, const CliOverrides& overrides) {
    if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
    if (overrides.master_seed) cfg.simulation.master_seed = *overrides.master_seed;
    if (overrides.delta) cfg.bound.delta = *overrides.delta;
    if (overrides.eps) {
        if (*overrides.eps == "auto") {
            cfg.bound.eps = std::nullopt;
        } else {
            double v = 0.0;
            const auto& s = *overrides.eps;
            const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc() || res.ptr != s.data() + s.size())
                throw ConfigError("config: --eps must be a number or 'auto'");
            cfg.bound.eps = v;
        }
    }
    if (overrides.dt_seg) cfg.bound.dt_seg = *overrides.dt_seg;
    if (overrides.n_paths) cfg.simulation.n_paths = *overrides.n_paths;
    if (overrides.experiment) cfg.experiment = *overrides.experiment;
}

}  // namespace stochtube
