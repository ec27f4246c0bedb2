#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvarnav/audit.hpp"
#include "cvarnav/bench.hpp"
#include "cvarnav/sim.hpp"

namespace cvarnav::config {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Tracks which keys of one JSON object were consumed; anything left over is
// an unknown-key error naming the offending field.
class Fields {
public:
    Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object())
            throw ConfigError(path_ + ": expected a JSON object");
    }

    bool has(const char* key) const { return obj_.contains(key); }

    const json* take(const char* key) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    template <typename T>
    void get(const char* key, T& out) {
        if (const json* v = take(key)) {
            try {
                out = v->get<T>();
            } catch (const json::exception&) {
                throw ConfigError(path_ + "." + key + ": wrong type");
            }
        }
    }

    void get_vec2(const char* key, Vec2& out) {
        if (const json* v = take(key)) {
            if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
                throw ConfigError(path_ + "." + key + ": expected [x, y]");
            out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
        }
    }

    void finish() const {
        for (const auto& item : obj_.items())
            if (!seen_.count(item.key()))
                throw ConfigError(path_ + ": unknown key '" + item.key() + "'");
    }

    const std::string& path() const { return path_; }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

inline sim::MethodKind method_kind(const std::string& name, const std::string& path) {
    if (name == "Proposed") return sim::MethodKind::Proposed;
    if (name == "CVaRDistFixed") return sim::MethodKind::CVaRDistFixed;
    if (name == "CBFCone") return sim::MethodKind::CBFCone;
    if (name == "RobustCBFCone") return sim::MethodKind::RobustCBFCone;
    if (name == "DistAdaptive") return sim::MethodKind::DistAdaptive;
    if (name == "ConeAdaptive") return sim::MethodKind::ConeAdaptive;
    throw ConfigError(path + ": unknown method kind '" + name + "'");
}

inline sim::MethodSpec parse_method(const json& obj, const std::string& path) {
    Fields f(obj, path);
    sim::MethodSpec m;
    std::string kind = "Proposed";
    f.get("kind", kind);
    m.kind = method_kind(kind, path + ".kind");
    f.get("beta", m.beta);
    f.finish();
    return m;
}

}  // namespace detail

// Scenario document: every key optional, defaults per the implementation
// notes (beta_u 0.5, dt 0.1, L 20, sensor 5 m, arena half-extent 6 m).
inline sim::ScenarioConfig parse_scenario(const json& obj, const std::string& path = "scenario") {
    detail::Fields f(obj, path);
    sim::ScenarioConfig cfg;
    f.get("arena", cfg.arena);
    f.get("n_obstacles", cfg.n_obstacles);
    f.get("sigma", cfg.sigma);
    f.get_vec2("robot_start", cfg.robot_start);
    f.get_vec2("robot_goal", cfg.robot_goal);
    f.get("seed", cfg.seed);
    f.get("time_limit", cfg.time_limit);
    f.get("goal_eps", cfg.goal_eps);
    f.get("sensor_range", cfg.sensor_range);
    f.get("L", cfg.L);
    f.get("dt", cfg.limits.dt);
    f.get("a_max", cfg.limits.a_max);
    f.get("v_max", cfg.limits.v_max);
    if (const json* m = f.take("method")) cfg.method = detail::parse_method(*m, path + ".method");
    f.get("beta_u", cfg.filter.beta_u);
    f.get("beta_min", cfg.filter.beta_min);
    f.get("beta_max", cfg.filter.beta_max);
    f.get("beta_grid", cfg.filter.beta_grid);
    f.get("beta_grid_size", cfg.filter.beta_grid_size);
    f.get("gamma", cfg.filter.gamma);
    f.get("sqp_iters", cfg.filter.sqp_iters);
    f.get("sqp_damping", cfg.filter.sqp_damping);
    f.get("grid_resolution", cfg.filter.grid_resolution);
    f.get("bisect_tol", cfg.filter.bisect_tol);
    f.get("exact_tol", cfg.filter.exact_tol);
    f.get("fallback_scan", cfg.filter.fallback_scan);
    f.get("softplus_temp", cfg.filter.barrier.softplus_temp);
    f.get("robot_radius", cfg.filter.robot_radius);
    f.get("safety_margin", cfg.filter.safety_margin);
    f.get("kp", cfg.filter.kp);
    f.get("kd", cfg.filter.kd);
    if (const json* s = f.take("sfm")) {
        detail::Fields fs(*s, path + ".sfm");
        fs.get("tau", cfg.sfm.tau);
        fs.get("A", cfg.sfm.A);
        fs.get("B", cfg.sfm.B);
        fs.get("body_factor", cfg.sfm.body_factor);
        fs.get("goal_tol", cfg.sfm.goal_tol);
        fs.finish();
    }
    f.finish();
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return cfg;
}

inline bench::SweepSpec parse_sweep(const json& obj, const std::string& path = "sweep") {
    detail::Fields f(obj, path);
    bench::SweepSpec spec;
    f.get("obstacle_counts", spec.obstacle_counts);
    f.get("sigmas", spec.sigmas);
    if (const json* ms = f.take("methods")) {
        if (!ms->is_array()) throw ConfigError(path + ".methods: expected an array");
        spec.methods.clear();
        for (std::size_t i = 0; i < ms->size(); ++i)
            spec.methods.push_back(
                detail::parse_method((*ms)[i], path + ".methods[" + std::to_string(i) + "]"));
    }
    f.get("configs_per_cell", spec.configs_per_cell);
    f.get("base_seed", spec.base_seed);
    if (const json* s = f.take("scenario"))
        spec.base = parse_scenario(*s, path + ".scenario");
    f.finish();
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return spec;
}

inline audit::AuditSpec parse_audit(const json& obj, const std::string& path = "audit") {
    detail::Fields f(obj, path);
    audit::AuditSpec spec;
    f.get("solver_scenes", spec.solver_scenes);
    f.get("minimality_scenes", spec.minimality_scenes);
    f.get("base_seed", spec.base_seed);
    f.get("oracle_resolution", spec.oracle_resolution);
    f.get("minimality_resolution", spec.minimality_resolution);
    f.get("sigma", spec.sigma);
    f.get("L", spec.L);
    if (const json* s = f.take("scenario")) {
        const sim::ScenarioConfig cfg = parse_scenario(*s, path + ".scenario");
        spec.filter = cfg.filter;
        spec.limits = cfg.limits;
        spec.sigma = cfg.sigma;
        spec.L = cfg.L;
    }
    f.finish();
    if (spec.solver_scenes < 1 || spec.minimality_scenes < 1 || spec.oracle_resolution < 2 ||
        spec.minimality_resolution < 2 || spec.sigma < 0.0 || spec.L < 1)
        throw ConfigError(path + ": counts/resolutions out of range");
    return spec;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("parse failure in " + path + ": " + e.what());
    }
}

// key=value overrides with dotted paths into the document, e.g.
// "sigma=0.15", "method.kind=CBFCone", "scenario.gamma=0.3". Values are
// parsed as JSON when possible, else taken as strings.
inline void apply_override(json& doc, const std::string& setting) {
    const auto eq = setting.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override must have the form key=value: " + setting);
    const std::string key = setting.substr(0, eq);
    const std::string value = setting.substr(eq + 1);
    json* node = &doc;
    std::stringstream parts(key);
    std::string part;
    std::vector<std::string> segments;
    while (std::getline(parts, part, '.')) segments.push_back(part);
    if (segments.empty()) throw ConfigError("override has empty key: " + setting);
    for (std::size_t i = 0; i + 1 < segments.size(); ++i) node = &(*node)[segments[i]];
    json parsed = json::parse(value, nullptr, false);
    (*node)[segments.back()] = parsed.is_discarded() ? json(value) : parsed;
}

inline void apply_overrides(json& doc, const std::vector<std::string>& settings) {
    for (const auto& s : settings) apply_override(doc, s);
}

}  // namespace cvarnav::config
