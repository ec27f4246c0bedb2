#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "cvarnav/barriers.hpp"
#include "cvarnav/dynamics.hpp"
#include "cvarnav/risk.hpp"
#include "cvarnav/vec2.hpp"

namespace cvarnav::filter {

using barriers::BarrierConfig;
using barriers::BarrierKind;
using dynamics::ControlInput;
using dynamics::Limits;
using dynamics::ObstaclePrediction;
using dynamics::RobotState;

// Sentinel barrier value for configurations where the barrier is undefined
// (collision cone evaluated inside the safety radius). Large and negative so
// any constraint containing it is unsatisfiable.
constexpr double kUnsafeBarrier = -1e9;

// How the per-sample barrier values of one obstacle are folded into a single
// constraint value.
enum class RiskMode {
    Adaptive,     // CVaR at the grid-selected risk level
    Fixed,        // CVaR at one fixed risk level
    MeanPoint,    // deterministic barrier at the nominal prediction
    WorstSample,  // worst case over all prediction samples
};

enum class SolverStatus { NominalPass, Filtered, Infeasible };

struct FilterConfig {
    double beta_u = 0.5;            // desired risk level (upper bound before zone expansion)
    std::vector<double> beta_grid;  // explicit candidates; empty -> linspace per step
    int beta_grid_size = 15;
    double beta_min = 0.02;
    double beta_max = 0.99;
    double gamma = 0.2;  // per-obstacle barrier decay rate
    BarrierConfig barrier{};
    int sqp_iters = 5;
    double sqp_damping = 0.5;
    int grid_resolution = 41;  // oracle / fallback lattice per axis
    double bisect_tol = 1e-4;  // CVaR gap tolerance in the upper-bound search
    double exact_tol = 1e-6;   // constraint satisfaction tolerance on exact residuals
    bool fallback_scan = true;
    double kp = 1.0;  // go-to-goal proportional gain
    double kd = 2.0;  // damping gain
    double robot_radius = 0.3;
    double safety_margin = 0.1;  // added to radii when forming r_safe
    RiskMode risk_mode = RiskMode::Adaptive;
    double fixed_beta = 0.5;

    void validate() const {
        if (!(beta_u > 0.0) || !(beta_u < 1.0))
            throw std::invalid_argument("FilterConfig: beta_u must be in (0,1)");
        if (!(gamma > 0.0) || !(gamma <= 1.0))
            throw std::invalid_argument("FilterConfig: gamma must be in (0,1]");
        if (!(beta_min > 0.0) || !(beta_min < beta_max) || !(beta_max < 1.0))
            throw std::invalid_argument("FilterConfig: need 0 < beta_min < beta_max < 1");
        if (beta_grid_size < 1 || sqp_iters < 1 || grid_resolution < 2)
            throw std::invalid_argument("FilterConfig: counts out of range");
        for (std::size_t i = 0; i < beta_grid.size(); ++i) {
            if (!(beta_grid[i] > 0.0) || !(beta_grid[i] < 1.0) ||
                (i > 0 && !(beta_grid[i] > beta_grid[i - 1])))
                throw std::invalid_argument(
                    "FilterConfig: beta_grid must be strictly increasing within (0,1)");
        }
        if (!(robot_radius > 0.0) || safety_margin < 0.0)
            throw std::invalid_argument("FilterConfig: bad robot_radius/safety_margin");
    }
};

struct FilterDecision {
    ControlInput u;
    double beta_k = 0.0;
    bool feasible = false;
    std::vector<double> per_obstacle_h;  // exact current barrier values
    double beta_bar_u = 0.0;
    SolverStatus status = SolverStatus::Infeasible;
};

// Go-to-goal proportional-derivative control, clamped to the admissible box.
inline ControlInput nominal_control(const RobotState& s, const Vec2& goal, const Limits& lim,
                                    const FilterConfig& cfg) {
    return dynamics::clamp_control({cfg.kp * (goal - s.p) - cfg.kd * s.v}, lim);
}

namespace detail {

inline BarrierConfig per_obstacle_barrier(const FilterConfig& cfg, double r_safe) {
    BarrierConfig b = cfg.barrier;
    b.r_safe = r_safe;
    return b;
}

// Exact (hard-max Delta) barrier value; kUnsafeBarrier where undefined.
inline double barrier_exact(const BarrierConfig& b, const Vec2& p, const Vec2& p_obs,
                            const Vec2& v, const Vec2& v_obs) {
    switch (b.kind) {
        case BarrierKind::Distance:
            return barriers::h_dist(p, p_obs, b.r_safe);
        case BarrierKind::Cone: {
            const barriers::RelativeKinematics rel{p - p_obs, v - v_obs};
            if (norm_sq(rel.p_rel) <= b.r_safe * b.r_safe) return kUnsafeBarrier;
            return barriers::h_cone(rel, b.r_safe);
        }
        case BarrierKind::DynamicZone:
            return barriers::h_zone(p, p_obs, v, v_obs, b, /*smooth=*/false);
    }
    return kUnsafeBarrier;
}

// Smooth-surrogate barrier with gradients for the linearized subproblems.
inline barriers::ValueGrad barrier_grad(const BarrierConfig& b, const Vec2& p, const Vec2& p_obs,
                                        const Vec2& v, const Vec2& v_obs) {
    switch (b.kind) {
        case BarrierKind::Distance:
            return barriers::h_dist_grad(p, p_obs, b.r_safe);
        case BarrierKind::Cone: {
            if (norm_sq(p - p_obs) <= b.r_safe * b.r_safe)
                return {kUnsafeBarrier, Vec2{}, Vec2{}};
            return barriers::h_cone_grad(p, p_obs, v, v_obs, b.r_safe);
        }
        case BarrierKind::DynamicZone:
            return barriers::h_zone_grad(p, p_obs, v, v_obs, b);
    }
    return {kUnsafeBarrier, Vec2{}, Vec2{}};
}

// One obstacle's constraint data for the current step.
struct ObstacleTerm {
    const ObstaclePrediction* pred = nullptr;
    BarrierConfig barrier;
    double h_now = 0.0;
    double rhs = 0.0;       // (1-gamma) * h_now
    bool valid_now = true;  // false when the current cone barrier is undefined
};

inline ObstacleTerm make_term(const RobotState& s, const ObstaclePrediction& pred,
                              const FilterConfig& cfg) {
    ObstacleTerm t;
    t.pred = &pred;
    t.barrier = per_obstacle_barrier(cfg, pred.r_safe);
    t.h_now = barrier_exact(t.barrier, s.p, pred.now.p, s.v, pred.now.v);
    t.valid_now = t.h_now != kUnsafeBarrier;
    t.rhs = (1.0 - cfg.gamma) * t.h_now;
    return t;
}

inline std::vector<ObstacleTerm> build_terms(const RobotState& s,
                                             const std::vector<ObstaclePrediction>& preds,
                                             const FilterConfig& cfg) {
    std::vector<ObstacleTerm> terms;
    terms.reserve(preds.size());
    for (const auto& pred : preds) terms.push_back(make_term(s, pred, cfg));
    return terms;
}

// Exact constraint residual of one obstacle at control u: the aggregated
// next-step barrier value minus (1-gamma) h_now. Propagation uses the true
// (velocity-clamped) dynamics.
inline double term_residual(const ObstacleTerm& t, const RobotState& s, const ControlInput& u,
                            double beta, RiskMode mode, const Limits& lim) {
    if (!t.valid_now) return kUnsafeBarrier;
    const RobotState next = dynamics::step_robot(s, u, lim);
    if (mode == RiskMode::MeanPoint) {
        const Vec2 p_obs = t.pred->now.p + lim.dt * t.pred->now.v;
        return barrier_exact(t.barrier, next.p, p_obs, next.v, t.pred->now.v) - t.rhs;
    }
    const std::size_t n = t.pred->size();
    if (mode == RiskMode::WorstSample) {
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            worst = std::min(worst, barrier_exact(t.barrier, next.p, t.pred->samples[j], next.v,
                                                  t.pred->velocities[j]));
        return worst - t.rhs;
    }
    risk::WeightedDistribution dist;
    dist.values.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
        dist.values.push_back(barrier_exact(t.barrier, next.p, t.pred->samples[j], next.v,
                                            t.pred->velocities[j]));
    dist.probs = t.pred->probs;
    return risk::empirical_cvar(dist, risk::RiskLevel(beta)) - t.rhs;
}

inline bool all_feasible(const std::vector<ObstacleTerm>& terms, const RobotState& s,
                         const ControlInput& u, double beta, RiskMode mode, const Limits& lim,
                         double tol) {
    for (const auto& t : terms)
        if (term_residual(t, s, u, beta, mode, lim) < -tol) return false;
    return true;
}

// --- small exact QP machinery --------------------------------------------

struct HalfPlane {
    Vec2 a;
    double b;  // constraint a . u <= b
};

// Projection of `target` onto the intersection of half-planes (incremental
// Seidel scheme: when a constraint is violated, the optimum lies on its line;
// re-solve there as a 1-D clip against the earlier constraints).
inline std::optional<Vec2> project_halfplanes(const Vec2& target,
                                              const std::vector<HalfPlane>& hp) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    Vec2 u = target;
    for (std::size_t m = 0; m < hp.size(); ++m) {
        if (dot(hp[m].a, u) - hp[m].b <= 1e-12) continue;
        const double an2 = norm_sq(hp[m].a);
        if (an2 < 1e-24) return std::nullopt;  // zero-gradient violated cut
        const Vec2 on_line = target - hp[m].a * ((dot(hp[m].a, target) - hp[m].b) / an2);
        const Vec2 tangent = perp(hp[m].a) / std::sqrt(an2);
        double lo = -kInf, hi = kInf;
        for (std::size_t l = 0; l < m; ++l) {
            const double along = dot(hp[l].a, tangent);
            const double room = hp[l].b - dot(hp[l].a, on_line);
            if (std::abs(along) < 1e-14) {
                if (room < -1e-9) return std::nullopt;
                continue;
            }
            if (along > 0.0)
                hi = std::min(hi, room / along);
            else
                lo = std::max(lo, room / along);
        }
        if (lo > hi + 1e-12) return std::nullopt;
        u = on_line + clamp(0.0, lo, hi) * tangent;
    }
    return u;
}

// Linearized constraint of one obstacle: per-sample affine barrier models
// h_j(u) ~ value_j + grad_j . (u - u_ref).
struct LinearTerm {
    std::vector<double> value;
    std::vector<Vec2> grad;
    const std::vector<double>* probs = nullptr;
    double rhs = 0.0;
};

// Aggregated constraint value and a supergradient at u. For the CVaR mode the
// dual envelope weights make the aggregate a concave piecewise-linear function
// of u, so the pair (value, gradient) yields a valid outer cut.
inline std::pair<double, Vec2> aggregate_linear(const LinearTerm& lt, const Vec2& u,
                                                const Vec2& u_ref, double beta, RiskMode mode) {
    const std::size_t n = lt.value.size();
    std::vector<double> vals(n);
    for (std::size_t j = 0; j < n; ++j) vals[j] = lt.value[j] + dot(lt.grad[j], u - u_ref);
    if (n == 1) return {vals[0], lt.grad[0]};
    if (mode == RiskMode::WorstSample) {
        std::size_t arg = 0;
        for (std::size_t j = 1; j < n; ++j)
            if (vals[j] < vals[arg]) arg = j;
        return {vals[arg], lt.grad[arg]};
    }
    risk::WeightedDistribution dist;
    dist.values = std::move(vals);
    dist.probs = *lt.probs;
    const std::vector<double> q =
        risk::cvar_tail_weights(dist, risk::RiskLevel(beta));
    double g = 0.0;
    Vec2 grad;
    for (std::size_t j = 0; j < n; ++j) {
        if (q[j] == 0.0) continue;
        g += q[j] * dist.values[j];
        grad += q[j] * lt.grad[j];
    }
    return {g, grad};
}

// Convex subproblem: min ||u - u_nom||^2 over the box intersected with the
// linearized constraints, solved by cutting planes on the concave aggregates.
inline std::optional<Vec2> solve_subproblem(const std::vector<LinearTerm>& lts, const Vec2& u_nom,
                                            const Vec2& u_ref, double beta, RiskMode mode,
                                            const Limits& lim) {
    std::vector<HalfPlane> hp = {{{1.0, 0.0}, lim.a_max},
                                 {{-1.0, 0.0}, lim.a_max},
                                 {{0.0, 1.0}, lim.a_max},
                                 {{0.0, -1.0}, lim.a_max}};
    constexpr int kMaxCuts = 80;
    constexpr double kCutTol = 1e-9;
    Vec2 u{};
    for (int it = 0; it < kMaxCuts; ++it) {
        const auto proj = project_halfplanes(u_nom, hp);
        if (!proj) return std::nullopt;
        u = *proj;
        bool violated = false;
        for (const auto& lt : lts) {
            const auto [g_val, g_grad] = aggregate_linear(lt, u, u_ref, beta, mode);
            if (g_val >= lt.rhs - kCutTol) continue;
            if (norm_sq(g_grad) < 1e-24) return std::nullopt;  // flat and unsatisfied
            violated = true;
            hp.push_back({-g_grad, g_val - dot(g_grad, u) - lt.rhs});
        }
        if (!violated) return u;
    }
    return u;  // near-feasible; exact verification decides
}

inline std::vector<LinearTerm> linearize_terms(const std::vector<ObstacleTerm>& terms,
                                               const RobotState& s, const Vec2& u_lin,
                                               RiskMode mode, const Limits& lim) {
    // Affine (unclamped) propagation: p' = p + dt v + dt^2/2 u, v' = v + dt u.
    const Vec2 p_next = s.p + lim.dt * s.v + (0.5 * lim.dt * lim.dt) * u_lin;
    const Vec2 v_next = s.v + lim.dt * u_lin;
    const double wp = 0.5 * lim.dt * lim.dt;
    std::vector<LinearTerm> lts;
    lts.reserve(terms.size());
    for (const auto& t : terms) {
        LinearTerm lt;
        lt.rhs = t.rhs;
        lt.probs = &t.pred->probs;
        if (mode == RiskMode::MeanPoint) {
            const Vec2 p_obs = t.pred->now.p + lim.dt * t.pred->now.v;
            const auto g = barrier_grad(t.barrier, p_next, p_obs, v_next, t.pred->now.v);
            lt.value.push_back(g.value);
            lt.grad.push_back(wp * g.dp + lim.dt * g.dv);
        } else {
            const std::size_t n = t.pred->size();
            lt.value.reserve(n);
            lt.grad.reserve(n);
            for (std::size_t j = 0; j < n; ++j) {
                const auto g = barrier_grad(t.barrier, p_next, t.pred->samples[j], v_next,
                                            t.pred->velocities[j]);
                lt.value.push_back(g.value);
                lt.grad.push_back(wp * g.dp + lim.dt * g.dv);
            }
        }
        lts.push_back(std::move(lt));
    }
    return lts;
}

inline double objective(const Vec2& u, const Vec2& u_nom) { return norm_sq(u - u_nom); }

}  // namespace detail

// Exact CVaR-BF constraint residual for one obstacle: propagate the robot with
// u, evaluate the barrier over all L predicted obstacle states, and return
// CVaR_beta(h_{k+1}) - (1-gamma) h_now. Nonnegative iff the constraint holds.
inline double cvar_constraint_residual(const RobotState& s, const ControlInput& u,
                                       const ObstaclePrediction& pred, double beta,
                                       const FilterConfig& cfg, const Limits& lim) {
    const detail::ObstacleTerm term = detail::make_term(s, pred, cfg);
    return detail::term_residual(term, s, u, beta, RiskMode::Adaptive, lim);
}

// Independent feasibility oracle: exhaustive scan of an N x N lattice of the
// admissible acceleration box against the exact constraint residuals. Returns
// the feasible lattice point closest to u_nom, or nothing.
inline std::optional<ControlInput> brute_force_probe(const RobotState& s,
                                                     const std::vector<ObstaclePrediction>& preds,
                                                     double beta, const ControlInput& u_nom,
                                                     const FilterConfig& cfg, const Limits& lim,
                                                     int resolution = 0) {
    const int res = resolution > 0 ? resolution : cfg.grid_resolution;
    if (res < 2) throw std::invalid_argument("brute_force_probe: resolution must be >= 2");
    const auto terms = detail::build_terms(s, preds, cfg);
    for (const auto& t : terms)
        if (!t.valid_now) return std::nullopt;
    const RiskMode mode = cfg.risk_mode == RiskMode::Adaptive || cfg.risk_mode == RiskMode::Fixed
                              ? RiskMode::Adaptive
                              : cfg.risk_mode;
    std::optional<Vec2> best;
    double best_obj = std::numeric_limits<double>::infinity();
    const double step = 2.0 * lim.a_max / static_cast<double>(res - 1);
    for (int ix = 0; ix < res; ++ix) {
        for (int iy = 0; iy < res; ++iy) {
            const Vec2 u{-lim.a_max + step * ix, -lim.a_max + step * iy};
            const double obj = detail::objective(u, u_nom.a);
            if (obj >= best_obj) continue;
            if (detail::all_feasible(terms, s, {u}, beta, mode, lim, cfg.exact_tol)) {
                best = u;
                best_obj = obj;
            }
        }
    }
    if (!best) return std::nullopt;
    return ControlInput{*best};
}

// Minimally modifying safety filter at one risk level: min ||u - u_nom||^2
// subject to the CVaR-BF constraint of every obstacle and the box bounds.
// Sequential linearization around damped iterates (softplus Delta surrogate),
// each subproblem solved exactly as a convex cutting-plane QP; the result is
// only returned if it satisfies the exact hard-max constraints within
// exact_tol. If the SQP path fails, a lattice scan of exactly feasible points
// (polished by one more SQP pass) is tried before declaring infeasibility.
inline std::optional<ControlInput> solve_constrained(const RobotState& s,
                                                     const std::vector<ObstaclePrediction>& preds,
                                                     double beta, const ControlInput& u_nom,
                                                     const FilterConfig& cfg, const Limits& lim) {
    const auto terms = detail::build_terms(s, preds, cfg);
    for (const auto& t : terms)
        if (!t.valid_now) return std::nullopt;
    const RiskMode mode = cfg.risk_mode == RiskMode::Adaptive || cfg.risk_mode == RiskMode::Fixed
                              ? RiskMode::Adaptive
                              : cfg.risk_mode;
    const ControlInput u0 = dynamics::clamp_control(u_nom, lim);
    const auto feasible = [&](const ControlInput& u) {
        return detail::all_feasible(terms, s, u, beta, mode, lim, cfg.exact_tol);
    };
    if (feasible(u0)) return u0;

    const auto run_sqp = [&](Vec2 start) -> std::optional<Vec2> {
        Vec2 u = start;
        std::optional<Vec2> last_qp;
        for (int it = 0; it < cfg.sqp_iters; ++it) {
            const auto lts = detail::linearize_terms(terms, s, u, mode, lim);
            const auto sub = detail::solve_subproblem(lts, u0.a, u, beta, mode, lim);
            if (!sub) continue;
            last_qp = *sub;
            u = u + cfg.sqp_damping * (*sub - u);
        }
        if (last_qp && feasible({*last_qp})) return *last_qp;
        if (last_qp && feasible({u})) return u;
        return std::nullopt;
    };

    if (const auto direct = run_sqp(u0.a)) return ControlInput{*direct};

    if (!cfg.fallback_scan) return std::nullopt;
    // Fallback: exact-feasible lattice point nearest u_nom, then polish.
    const auto seed = brute_force_probe(s, preds, beta, u0, cfg, lim);
    if (!seed) return std::nullopt;
    Vec2 best = seed->a;
    if (const auto polished = run_sqp(best)) {
        if (detail::objective(*polished, u0.a) < detail::objective(best, u0.a)) best = *polished;
    }
    return ControlInput{best};
}

// Zone-expanded upper bound for the adaptive risk level. For each obstacle,
// the next-step distance-barrier distribution (under nominal control) and the
// dynamic risk offset feed the CVaR-matching search; the minimum across
// obstacles is kept. Methods without the dynamic zone keep beta_u.
inline double compute_beta_bar(const RobotState& s, const std::vector<ObstaclePrediction>& preds,
                               const std::vector<double>& prev_delta, const ControlInput& u_nom,
                               const FilterConfig& cfg, const Limits& lim) {
    if (cfg.risk_mode != RiskMode::Adaptive || cfg.barrier.kind != BarrierKind::DynamicZone ||
        preds.empty())
        return cfg.beta_u;
    if (prev_delta.size() != preds.size())
        throw std::invalid_argument("compute_beta_bar: one prev_delta entry per obstacle needed");
    const RobotState next = dynamics::step_robot(s, dynamics::clamp_control(u_nom, lim), lim);
    double beta_bar = cfg.beta_max;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto& pred = preds[i];
        const double r = pred.r_safe;
        risk::WeightedDistribution h_next, delta_next;
        const std::size_t n = pred.size();
        h_next.values.reserve(n);
        delta_next.values.reserve(n);
        for (std::size_t j = 0; j < n; ++j) {
            h_next.values.push_back(barriers::h_dist(next.p, pred.samples[j], r));
            delta_next.values.push_back(barriers::delta_factor(
                {next.p - pred.samples[j], next.v - pred.velocities[j]}));
        }
        h_next.probs = pred.probs;
        delta_next.probs = pred.probs;
        const double offset = risk::risk_offset(delta_next, prev_delta[i], cfg.gamma, r,
                                                risk::RiskLevel(cfg.beta_u));
        const double bi =
            offset <= 0.0
                ? cfg.beta_u
                : risk::upper_bound_search(h_next, risk::RiskLevel(cfg.beta_u), offset,
                                           cfg.beta_max, cfg.bisect_tol)
                      .beta;
        beta_bar = std::min(beta_bar, bi);
    }
    return clamp(beta_bar, cfg.beta_u, cfg.beta_max);
}

// Candidate risk levels for one step, capped at beta_bar. An explicit grid is
// filtered (keeping at least its smallest candidate); otherwise the grid is
// re-scaled to beta_bar each step.
inline std::vector<double> make_beta_grid(const FilterConfig& cfg, double beta_bar) {
    if (!cfg.beta_grid.empty()) {
        std::vector<double> grid;
        for (double b : cfg.beta_grid)
            if (b <= beta_bar + 1e-12) grid.push_back(b);
        if (grid.empty()) grid.push_back(cfg.beta_grid.front());
        return grid;
    }
    const int n = cfg.beta_grid_size;
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(n));
    if (n == 1 || beta_bar <= cfg.beta_min) {
        grid.push_back(std::min(cfg.beta_min, beta_bar));
        return grid;
    }
    for (int i = 0; i < n; ++i)
        grid.push_back(cfg.beta_min +
                       (beta_bar - cfg.beta_min) * static_cast<double>(i) /
                           static_cast<double>(n - 1));
    return grid;
}

// Full per-step decision: compute beta_bar, probe the candidate grid in
// ascending order, return the smallest feasible risk level's control. If no
// candidate is feasible the decision carries maximal per-axis braking and the
// Infeasible status.
inline FilterDecision select_beta(const RobotState& s, const std::vector<ObstaclePrediction>& preds,
                                  const std::vector<double>& prev_delta, const ControlInput& u_nom,
                                  const FilterConfig& cfg, const Limits& lim) {
    cfg.validate();
    lim.validate();
    FilterDecision d;
    const auto terms = detail::build_terms(s, preds, cfg);
    d.per_obstacle_h.reserve(terms.size());
    for (const auto& t : terms) d.per_obstacle_h.push_back(t.h_now);
    const ControlInput u0 = dynamics::clamp_control(u_nom, lim);

    std::vector<double> grid;
    switch (cfg.risk_mode) {
        case RiskMode::Adaptive:
            d.beta_bar_u = compute_beta_bar(s, preds, prev_delta, u_nom, cfg, lim);
            grid = make_beta_grid(cfg, d.beta_bar_u);
            break;
        case RiskMode::Fixed:
            d.beta_bar_u = cfg.fixed_beta;
            grid = {cfg.fixed_beta};
            break;
        case RiskMode::MeanPoint:
        case RiskMode::WorstSample:
            d.beta_bar_u = 0.0;
            grid = {cfg.beta_u};  // placeholder; the aggregate ignores beta
            break;
    }

    for (double beta : grid) {
        const auto u = solve_constrained(s, preds, beta, u0, cfg, lim);
        if (!u) continue;
        d.u = *u;
        d.feasible = true;
        const bool deterministic_mode =
            cfg.risk_mode == RiskMode::MeanPoint || cfg.risk_mode == RiskMode::WorstSample;
        d.beta_k = deterministic_mode ? 0.0 : beta;
        d.status = (u->a == u0.a) ? SolverStatus::NominalPass : SolverStatus::Filtered;
        return d;
    }
    d.u = dynamics::clamp_control({(-1.0 / lim.dt) * s.v}, lim);
    d.feasible = false;
    d.beta_k = cfg.risk_mode == RiskMode::Adaptive || cfg.risk_mode == RiskMode::Fixed
                   ? grid.back()
                   : 0.0;
    d.status = SolverStatus::Infeasible;
    return d;
}

// Stateful wrapper that carries the per-obstacle approach factor of the
// previous step (zero for newly sensed obstacles, per the k = 0 convention).
class SafetyFilter {
public:
    explicit SafetyFilter(FilterConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

    const FilterConfig& config() const { return cfg_; }

    FilterDecision decide(const RobotState& s, const std::vector<ObstaclePrediction>& preds,
                          const std::vector<int>& ids, const ControlInput& u_nom,
                          const Limits& lim) {
        if (ids.size() != preds.size())
            throw std::invalid_argument("SafetyFilter::decide: one id per prediction needed");
        std::vector<double> prev(preds.size(), 0.0);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const auto it = prev_delta_.find(ids[i]);
            if (it != prev_delta_.end()) prev[i] = it->second;
        }
        FilterDecision d = select_beta(s, preds, prev, u_nom, cfg_, lim);
        prev_delta_.clear();
        for (std::size_t i = 0; i < ids.size(); ++i)
            prev_delta_[ids[i]] = barriers::delta_factor(
                {s.p - preds[i].now.p, s.v - preds[i].now.v});
        return d;
    }

    void reset() { prev_delta_.clear(); }

private:
    FilterConfig cfg_;
    std::unordered_map<int, double> prev_delta_;
};

}  // namespace cvarnav::filter
