#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvarnav/crowd.hpp"
#include "cvarnav/dynamics.hpp"
#include "cvarnav/filter.hpp"
#include "cvarnav/vec2.hpp"

namespace cvarnav::sim {

using crowd::CrowdMember;
using dynamics::Limits;
using dynamics::ObstacleState;
using dynamics::RobotState;

enum class MethodKind {
    Proposed,       // dynamic-zone barrier, adaptive risk level
    CVaRDistFixed,  // distance barrier, fixed risk level
    CBFCone,        // deterministic cone barrier on the nominal prediction
    RobustCBFCone,  // cone barrier enforced on every prediction sample
    DistAdaptive,   // distance barrier, adaptive risk level (ablation)
    ConeAdaptive,   // cone barrier, adaptive risk level (ablation)
};

struct MethodSpec {
    MethodKind kind = MethodKind::Proposed;
    double beta = 0.5;  // fixed risk level; only used by CVaRDistFixed

    void validate() const {
        if (kind == MethodKind::CVaRDistFixed && (!(beta > 0.0) || !(beta < 1.0)))
            throw std::invalid_argument("MethodSpec: fixed beta must be in (0,1)");
    }
};

inline std::string method_name(const MethodSpec& m) {
    switch (m.kind) {
        case MethodKind::Proposed: return "Proposed";
        case MethodKind::CVaRDistFixed: {
            char buf[48];
            std::snprintf(buf, sizeof buf, "CVaRDistFixed(%g)", m.beta);
            return buf;
        }
        case MethodKind::CBFCone: return "CBFCone";
        case MethodKind::RobustCBFCone: return "RobustCBFCone";
        case MethodKind::DistAdaptive: return "DistAdaptive";
        case MethodKind::ConeAdaptive: return "ConeAdaptive";
    }
    return "?";
}

struct ScenarioConfig {
    double arena = 6.0;  // half-extent, m (12 m x 12 m space)
    int n_obstacles = 5;
    double sigma = 0.05;  // prediction noise std dev, m
    Vec2 robot_start{0.0, -4.0};
    Vec2 robot_goal{0.0, 4.0};
    std::uint64_t seed = 1;
    double time_limit = 50.0;  // s
    double goal_eps = 0.3;     // m
    double sensor_range = 5.0;
    int L = 20;  // prediction samples per obstacle
    MethodSpec method;
    Limits limits;
    filter::FilterConfig filter;
    crowd::SfmParams sfm;
    bool record_crowd = false;  // keep per-step crowd states in the result

    void validate() const {
        if (!(sigma >= 0.0)) throw std::invalid_argument("ScenarioConfig: sigma must be >= 0");
        if (n_obstacles < 0) throw std::invalid_argument("ScenarioConfig: n_obstacles must be >= 0");
        if (!(time_limit > 0.0)) throw std::invalid_argument("ScenarioConfig: time_limit must be > 0");
        if (!(goal_eps > 0.0)) throw std::invalid_argument("ScenarioConfig: goal_eps must be > 0");
        if (!(sensor_range > 0.0))
            throw std::invalid_argument("ScenarioConfig: sensor_range must be > 0");
        if (L < 1) throw std::invalid_argument("ScenarioConfig: L must be >= 1");
        if (!(arena > 0.0)) throw std::invalid_argument("ScenarioConfig: arena must be > 0");
        method.validate();
        limits.validate();
        filter.validate();
        sfm.validate();
    }
};

enum class Outcome { Success, Collision, Infeasible, Timeout };

inline const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Success: return "Success";
        case Outcome::Collision: return "Collision";
        case Outcome::Infeasible: return "Infeasible";
        case Outcome::Timeout: return "Timeout";
    }
    return "?";
}

struct StepRecord {
    int k = 0;
    double t = 0.0;
    Vec2 p, v, a;
    double beta_k = 0.0;
    double beta_bar_u = 0.0;
    std::vector<double> h;  // per sensed obstacle, exact barrier values
    double dist_min = std::numeric_limits<double>::infinity();  // surface separation, all members
    bool feasible = true;
};

struct EpisodeResult {
    Outcome outcome = Outcome::Timeout;
    double trajectory_length = 0.0;
    double elapsed = 0.0;
    double min_separation = std::numeric_limits<double>::infinity();
    bool feasible_throughout = true;
    std::vector<StepRecord> trace;
    std::vector<std::vector<ObstacleState>> crowd_trace;  // filled when record_crowd is set
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b));
}

// Per-method controller configuration. The shared filter settings come from
// the scenario; only barrier kind and risk handling vary across methods.
inline filter::FilterConfig make_filter_config(const ScenarioConfig& cfg) {
    filter::FilterConfig fc = cfg.filter;
    switch (cfg.method.kind) {
        case MethodKind::Proposed:
            fc.barrier.kind = barriers::BarrierKind::DynamicZone;
            fc.risk_mode = filter::RiskMode::Adaptive;
            break;
        case MethodKind::CVaRDistFixed:
            fc.barrier.kind = barriers::BarrierKind::Distance;
            fc.risk_mode = filter::RiskMode::Fixed;
            fc.fixed_beta = cfg.method.beta;
            break;
        case MethodKind::CBFCone:
            fc.barrier.kind = barriers::BarrierKind::Cone;
            fc.risk_mode = filter::RiskMode::MeanPoint;
            break;
        case MethodKind::RobustCBFCone:
            fc.barrier.kind = barriers::BarrierKind::Cone;
            fc.risk_mode = filter::RiskMode::WorstSample;
            break;
        case MethodKind::DistAdaptive:
            fc.barrier.kind = barriers::BarrierKind::Distance;
            fc.risk_mode = filter::RiskMode::Adaptive;
            break;
        case MethodKind::ConeAdaptive:
            fc.barrier.kind = barriers::BarrierKind::Cone;
            fc.risk_mode = filter::RiskMode::Adaptive;
            break;
    }
    return fc;
}

// Circle-crossing crowd: members start on a circle inside the arena with
// antipodal goals plus seeded jitter. Speed caps are drawn per axis from
// {0.3, 0.6, 0.9, 1.2} m/s and radii from {0.3, 0.4, 0.5} m. Spawn positions
// keep clearance from the robot start and from one another.
inline std::vector<CrowdMember> build_crowd(const ScenarioConfig& cfg) {
    std::mt19937_64 rng(mix_seed(cfg.seed, 0xC0FFEEull));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double circle = cfg.arena * 2.0 / 3.0;
    const double speeds[] = {0.3, 0.6, 0.9, 1.2};
    const double radii[] = {0.3, 0.4, 0.5};
    std::vector<CrowdMember> crowd;
    crowd.reserve(static_cast<std::size_t>(cfg.n_obstacles));
    for (int i = 0; i < cfg.n_obstacles; ++i) {
        CrowdMember m;
        m.state.radius = radii[static_cast<int>(unit(rng) * 3.0) % 3];
        m.vmax_axis = {speeds[static_cast<int>(unit(rng) * 4.0) % 4],
                       speeds[static_cast<int>(unit(rng) * 4.0) % 4]};
        m.desired_speed = std::max(m.vmax_axis.x, m.vmax_axis.y);
        constexpr double kTwoPi = 6.283185307179586;
        const double base =
            kTwoPi * static_cast<double>(i) / static_cast<double>(std::max(cfg.n_obstacles, 1));
        Vec2 start;
        bool placed = false;
        for (int attempt = 0; attempt < 50 && !placed; ++attempt) {
            const double ang = base + (unit(rng) - 0.5) * 0.9;
            const double rad = circle + (unit(rng) - 0.5) * 0.8;
            start = {rad * std::cos(ang), rad * std::sin(ang)};
            placed = norm(start - cfg.robot_start) >= 1.2;
            for (const auto& other : crowd)
                placed = placed && norm(start - other.state.p) >=
                                       m.state.radius + other.state.radius + 0.2;
        }
        m.state.p = start;
        m.state.v = {0.0, 0.0};
        m.home = start;
        m.goal = -start + Vec2{(unit(rng) - 0.5) * 0.6, (unit(rng) - 0.5) * 0.6};
        crowd.push_back(m);
    }
    return crowd;
}

// Exact states of the members within sensor range (closed boundary).
inline std::vector<std::size_t> sense_indices(const RobotState& robot,
                                              const std::vector<CrowdMember>& crowd,
                                              double range) {
    if (!(range > 0.0)) throw std::invalid_argument("sense: range must be > 0");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < crowd.size(); ++i)
        if (crowd[i].active && norm(crowd[i].state.p - robot.p) <= range) idx.push_back(i);
    return idx;
}

inline std::vector<ObstacleState> sense(const RobotState& robot,
                                        const std::vector<CrowdMember>& crowd, double range) {
    std::vector<ObstacleState> out;
    for (std::size_t i : sense_indices(robot, crowd, range)) out.push_back(crowd[i].state);
    return out;
}

// Termination events in precedence order Collision > Success > Timeout, with
// a non-feasible final decision reclassifying a goal/timeout end as
// Infeasible so that Success always implies feasibility throughout.
inline std::optional<Outcome> check_termination(const RobotState& s, const ScenarioConfig& cfg,
                                                double t, const filter::FilterDecision& last,
                                                const std::vector<CrowdMember>& crowd) {
    for (const auto& m : crowd)
        if (m.active && norm(s.p - m.state.p) < cfg.filter.robot_radius + m.state.radius)
            return Outcome::Collision;
    if (norm(s.p - cfg.robot_goal) < cfg.goal_eps)
        return last.feasible ? Outcome::Success : Outcome::Infeasible;
    if (t >= cfg.time_limit - 1e-12)
        return last.feasible ? Outcome::Timeout : Outcome::Infeasible;
    if (!last.feasible) return Outcome::Infeasible;
    return std::nullopt;
}

// One episode: sense -> predict -> filter -> step robot -> step crowd ->
// check termination, at a fixed clock, fully determined by the config.
inline EpisodeResult run_episode(const ScenarioConfig& cfg) {
    cfg.validate();
    const Limits& lim = cfg.limits;
    const filter::FilterConfig fc = make_filter_config(cfg);
    filter::SafetyFilter saf(fc);
    std::vector<CrowdMember> members = build_crowd(cfg);
    RobotState robot{cfg.robot_start, {0.0, 0.0}};
    std::mt19937_64 pred_rng(mix_seed(cfg.seed, 0x9e3779b9ull));

    EpisodeResult res;
    const int max_steps = static_cast<int>(std::ceil(cfg.time_limit / lim.dt)) + 2;
    double t = 0.0;
    for (int k = 1; k <= max_steps; ++k) {
        const auto sensed = sense_indices(robot, members, cfg.sensor_range);
        std::vector<dynamics::ObstaclePrediction> preds;
        std::vector<int> ids;
        preds.reserve(sensed.size());
        for (std::size_t i : sensed) {
            auto pred = dynamics::predict_obstacle(members[i].state, lim, cfg.sigma, cfg.L,
                                                   pred_rng);
            pred.r_safe = fc.robot_radius + members[i].state.radius + fc.safety_margin;
            preds.push_back(std::move(pred));
            ids.push_back(static_cast<int>(i));
        }
        const auto u_nom = filter::nominal_control(robot, cfg.robot_goal, lim, fc);
        const filter::FilterDecision decision = saf.decide(robot, preds, ids, u_nom, lim);

        const RobotState next = dynamics::step_robot(robot, decision.u, lim);
        members = crowd::step_crowd(members, cfg.sfm, lim);
        if (cfg.record_crowd) {
            std::vector<ObstacleState> snapshot;
            snapshot.reserve(members.size());
            for (const auto& m : members) snapshot.push_back(m.state);
            res.crowd_trace.push_back(std::move(snapshot));
        }
        t += lim.dt;
        res.trajectory_length += norm(next.p - robot.p);
        robot = next;

        StepRecord rec;
        rec.k = k;
        rec.t = t;
        rec.p = robot.p;
        rec.v = robot.v;
        rec.a = decision.u.a;
        rec.beta_k = decision.beta_k;
        rec.beta_bar_u = decision.beta_bar_u;
        rec.h = decision.per_obstacle_h;
        rec.feasible = decision.feasible;
        for (const auto& m : members)
            rec.dist_min = std::min(rec.dist_min, norm(robot.p - m.state.p) -
                                                      fc.robot_radius - m.state.radius);
        res.min_separation = std::min(res.min_separation, rec.dist_min);
        res.feasible_throughout = res.feasible_throughout && decision.feasible;
        res.trace.push_back(std::move(rec));
        res.elapsed = t;

        if (const auto outcome = check_termination(robot, cfg, t, decision, members)) {
            res.outcome = *outcome;
            return res;
        }
    }
    res.outcome = Outcome::Timeout;
    return res;
}

}  // namespace cvarnav::sim
