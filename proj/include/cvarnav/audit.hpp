#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cvarnav/filter.hpp"
#include "cvarnav/sim.hpp"

namespace cvarnav::audit {

using dynamics::ControlInput;
using dynamics::Limits;
using dynamics::ObstaclePrediction;
using dynamics::RobotState;

struct AuditSpec {
    int solver_scenes = 200;
    int minimality_scenes = 100;
    std::uint64_t base_seed = 2024;
    int oracle_resolution = 81;      // lattice for the solver agreement check
    int minimality_resolution = 41;  // lattice for the minimality check
    double sigma = 0.05;
    int L = 20;
    filter::FilterConfig filter;
    Limits limits;
};

struct RandomScene {
    RobotState s;
    std::vector<ObstaclePrediction> preds;
    std::vector<double> prev_delta;
    ControlInput u_nom;
};

// Random encounter: robot moving with obstacles placed within engagement
// range, predictions drawn through the regular sampler.
inline RandomScene make_scene(std::mt19937_64& rng, const AuditSpec& spec, int n_obstacles) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    constexpr double kTwoPi = 6.283185307179586;
    RandomScene scene;
    scene.s.p = {0.0, 0.0};
    scene.s.v = {(unit(rng) * 2.0 - 1.0) * spec.limits.v_max,
                 (unit(rng) * 2.0 - 1.0) * spec.limits.v_max};
    const double radii[] = {0.3, 0.4, 0.5};
    for (int i = 0; i < n_obstacles; ++i) {
        dynamics::ObstacleState o;
        const double ang = unit(rng) * kTwoPi;
        const double dist = 0.9 + unit(rng) * 2.6;
        o.p = {dist * std::cos(ang), dist * std::sin(ang)};
        o.v = {(unit(rng) * 2.0 - 1.0) * 1.2, (unit(rng) * 2.0 - 1.0) * 1.2};
        o.radius = radii[static_cast<int>(unit(rng) * 3.0) % 3];
        auto pred = dynamics::predict_obstacle(o, spec.limits, spec.sigma, spec.L, rng);
        pred.r_safe = spec.filter.robot_radius + o.radius + spec.filter.safety_margin;
        scene.preds.push_back(std::move(pred));
        scene.prev_delta.push_back(barriers::delta_factor({scene.s.p - o.p, scene.s.v - o.v}));
    }
    scene.u_nom = {{(unit(rng) * 2.0 - 1.0) * spec.limits.a_max,
                    (unit(rng) * 2.0 - 1.0) * spec.limits.a_max}};
    return scene;
}

struct AgreementStats {
    int scenes = 0;
    int agree = 0;
    int both_feasible = 0;
    int gap_ok = 0;  // both feasible and solver objective within one grid cell gap
};

// Cross-checks solve_constrained against the exhaustive lattice oracle on
// random single-obstacle scenes at the filter's beta_u.
inline AgreementStats solver_oracle_agreement(const AuditSpec& spec) {
    std::mt19937_64 rng(spec.base_seed);
    AgreementStats st;
    st.scenes = spec.solver_scenes;
    for (int i = 0; i < spec.solver_scenes; ++i) {
        const RandomScene scene = make_scene(rng, spec, 1);
        const double beta = spec.filter.beta_u;
        const auto solver =
            filter::solve_constrained(scene.s, scene.preds, beta, scene.u_nom, spec.filter,
                                      spec.limits);
        const auto oracle =
            filter::brute_force_probe(scene.s, scene.preds, beta, scene.u_nom, spec.filter,
                                      spec.limits, spec.oracle_resolution);
        if (solver.has_value() != oracle.has_value()) continue;
        ++st.agree;
        if (!solver) continue;
        ++st.both_feasible;
        const double obj_solver = norm_sq(solver->a - scene.u_nom.a);
        const double obj_oracle = norm_sq(oracle->a - scene.u_nom.a);
        // Moving one lattice cell from the oracle optimum changes the
        // objective by at most this much.
        const double cell = 2.0 * spec.limits.a_max / (spec.oracle_resolution - 1);
        const double diag = cell * std::sqrt(2.0);
        const double gap = 2.0 * diag * std::sqrt(obj_oracle) + diag * diag;
        if (obj_solver <= obj_oracle + gap + 1e-12) ++st.gap_ok;
    }
    return st;
}

struct MinimalityStats {
    int scenes = 0;
    int feasible_ok = 0;   // returned decision exactly satisfies its constraints
    int minimal_ok = 0;    // every smaller grid candidate is oracle-infeasible
    int bound_ok = 0;      // beta_k <= beta_bar_u
};

// Cross-checks select_beta's minimality claim against the lattice oracle on
// random multi-obstacle scenes.
inline MinimalityStats minimality_audit(const AuditSpec& spec) {
    std::mt19937_64 rng(sim::mix_seed(spec.base_seed, 0xA0D17ull));
    std::uniform_int_distribution<int> n_obstacles(1, 3);
    MinimalityStats st;
    st.scenes = spec.minimality_scenes;
    filter::FilterConfig cfg = spec.filter;
    cfg.grid_resolution = spec.minimality_resolution;
    for (int i = 0; i < spec.minimality_scenes; ++i) {
        const RandomScene scene = make_scene(rng, spec, n_obstacles(rng));
        const auto d =
            filter::select_beta(scene.s, scene.preds, scene.prev_delta, scene.u_nom, cfg,
                                spec.limits);
        if (d.beta_k <= d.beta_bar_u + 1e-12) ++st.bound_ok;

        bool feasible_ok = true;
        if (d.feasible) {
            for (const auto& pred : scene.preds) {
                if (filter::cvar_constraint_residual(scene.s, d.u, pred, d.beta_k, cfg,
                                                     spec.limits) < -cfg.exact_tol)
                    feasible_ok = false;
            }
        }
        if (feasible_ok) ++st.feasible_ok;

        const double beta_bar = filter::compute_beta_bar(scene.s, scene.preds, scene.prev_delta,
                                                         scene.u_nom, cfg, spec.limits);
        const auto grid = filter::make_beta_grid(cfg, beta_bar);
        bool minimal = true;
        for (double beta : grid) {
            if (d.feasible && beta >= d.beta_k - 1e-12) break;
            if (filter::brute_force_probe(scene.s, scene.preds, beta, scene.u_nom, cfg,
                                          spec.limits, spec.minimality_resolution))
                minimal = false;
        }
        if (minimal) ++st.minimal_ok;
    }
    return st;
}

}  // namespace cvarnav::audit
