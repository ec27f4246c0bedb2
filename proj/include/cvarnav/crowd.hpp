#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "cvarnav/dynamics.hpp"
#include "cvarnav/vec2.hpp"

namespace cvarnav::crowd {

// Social Force Model parameters (Helbing-style magnitudes). body_factor = 0
// disables the hard-contact compression term.
struct SfmParams {
    double tau = 0.5;          // relaxation time, s
    double A = 4.0;            // interaction strength, m/s^2
    double B = 0.3;            // interaction range, m
    double body_factor = 0.0;  // compression gain, m/s^2 per m of overlap
    double goal_tol = 0.3;     // arrival threshold for re-targeting, m

    void validate() const {
        if (!(tau > 0.0) || !(A > 0.0) || !(B > 0.0) || body_factor < 0.0)
            throw std::invalid_argument("SfmParams: tau, A, B must be > 0");
    }
};

// One uncooperative crowd member: avoids other members, never the robot.
struct CrowdMember {
    dynamics::ObstacleState state;
    Vec2 goal;
    double desired_speed = 1.0;  // m/s
    Vec2 vmax_axis{1.2, 1.2};    // drawn per-axis speed caps, m/s
    Vec2 home;                   // start position; swapped with goal on arrival
    bool active = true;
};

// Goal-relaxation force plus exponential repulsion from the other members.
// The robot never appears in the sum.
inline Vec2 sfm_acceleration(std::size_t i, const std::vector<CrowdMember>& crowd,
                             const SfmParams& params) {
    params.validate();
    if (i >= crowd.size()) throw std::invalid_argument("sfm_acceleration: index out of range");
    const CrowdMember& m = crowd[i];
    const Vec2 v_desired = m.desired_speed * normalized(m.goal - m.state.p);
    Vec2 acc = (v_desired - m.state.v) / params.tau;
    for (std::size_t j = 0; j < crowd.size(); ++j) {
        if (j == i || !crowd[j].active) continue;
        const Vec2 diff = m.state.p - crowd[j].state.p;
        const double d = norm(diff);
        // Coincident members repel along a deterministic fallback direction.
        const Vec2 n = d < 1e-9 ? Vec2{1.0, 0.0} : diff / d;
        const double reach = m.state.radius + crowd[j].state.radius;
        double push = params.A * std::exp((reach - d) / params.B);
        if (params.body_factor > 0.0 && d < reach) push += params.body_factor * (reach - d);
        acc += push * n;
    }
    return acc;
}

// Synchronous Euler step at the shared clock: all accelerations are computed
// from the pre-step snapshot, then applied. Per-axis speed capped at each
// member's drawn maximum. Members that reach their goal swap start and goal
// (circle-crossing policy) and keep moving.
inline std::vector<CrowdMember> step_crowd(const std::vector<CrowdMember>& crowd,
                                           const SfmParams& params, const dynamics::Limits& lim) {
    lim.validate();
    std::vector<Vec2> acc(crowd.size());
    for (std::size_t i = 0; i < crowd.size(); ++i)
        acc[i] = crowd[i].active ? sfm_acceleration(i, crowd, params) : Vec2{};
    std::vector<CrowdMember> next = crowd;
    for (std::size_t i = 0; i < next.size(); ++i) {
        CrowdMember& m = next[i];
        if (!m.active) continue;
        m.state.v += lim.dt * acc[i];
        m.state.v.x = clamp(m.state.v.x, -m.vmax_axis.x, m.vmax_axis.x);
        m.state.v.y = clamp(m.state.v.y, -m.vmax_axis.y, m.vmax_axis.y);
        m.state.p += lim.dt * m.state.v;
        if (norm(m.goal - m.state.p) < params.goal_tol) std::swap(m.goal, m.home);
    }
    return next;
}

}  // namespace cvarnav::crowd
