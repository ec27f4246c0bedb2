#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include "cvarnav/vec2.hpp"

namespace cvarnav::dynamics {

struct Limits {
    double a_max = 3.0;  // per-axis acceleration bound, m/s^2
    double v_max = 2.0;  // per-axis velocity bound, m/s
    double dt = 0.1;     // step, s

    void validate() const {
        if (!(a_max > 0.0) || !(v_max > 0.0) || !(dt > 0.0))
            throw std::invalid_argument("Limits: a_max, v_max, dt must all be > 0");
    }
};

struct RobotState {
    Vec2 p;  // position, m
    Vec2 v;  // velocity, m/s
};

struct ControlInput {
    Vec2 a;  // acceleration, m/s^2
};

struct ObstacleState {
    Vec2 p;
    Vec2 v;
    double radius = 0.3;  // m
};

// L weighted samples of one obstacle's next state. `now` carries the observed
// state the prediction was made from; `r_safe` is filled in by the caller
// (robot radius + obstacle radius + margin) before the prediction reaches the
// safety filter.
struct ObstaclePrediction {
    std::vector<Vec2> samples;     // predicted positions
    std::vector<Vec2> velocities;  // carried velocities (one per sample)
    std::vector<double> probs;
    ObstacleState now;
    double r_safe = 0.0;

    std::size_t size() const { return samples.size(); }
};

inline ControlInput clamp_control(const ControlInput& u, const Limits& lim) {
    return {{clamp(u.a.x, -lim.a_max, lim.a_max), clamp(u.a.y, -lim.a_max, lim.a_max)}};
}

inline bool admissible(const ControlInput& u, const Limits& lim) {
    return std::abs(u.a.x) <= lim.a_max + 1e-12 && std::abs(u.a.y) <= lim.a_max + 1e-12;
}

// Exact double-integrator update; velocity clamped per axis afterwards.
inline RobotState step_robot(const RobotState& s, const ControlInput& u, const Limits& lim) {
    lim.validate();
    if (!admissible(u, lim))
        throw std::invalid_argument("step_robot: control exceeds acceleration limits");
    RobotState n;
    n.p = s.p + lim.dt * s.v + (0.5 * lim.dt * lim.dt) * u.a;
    n.v = s.v + lim.dt * u.a;
    n.v.x = clamp(n.v.x, -lim.v_max, lim.v_max);
    n.v.y = clamp(n.v.y, -lim.v_max, lim.v_max);
    return n;
}

namespace detail {

// Zero-mean Gaussian draw rejection-truncated to |w| <= 3 sigma. Rejection
// rather than clipping: clipping would pile boundary atoms into the CVaR tail.
inline double truncated_gauss(std::mt19937_64& rng, double sigma) {
    std::normal_distribution<double> gauss(0.0, sigma);
    for (;;) {
        const double w = gauss(rng);
        if (std::abs(w) <= 3.0 * sigma) return w;
    }
}

}  // namespace detail

// Constant-velocity prediction of the next obstacle position with additive
// truncated Gaussian noise: p + v*dt + w, w per-axis N(0, sigma^2) within
// +-3 sigma. Uniform sample weights 1/L; velocities carried unchanged.
inline ObstaclePrediction predict_obstacle(const ObstacleState& o, const Limits& lim,
                                           double sigma, int L, std::mt19937_64& rng) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("predict_obstacle: sigma must be >= 0");
    if (L < 1) throw std::invalid_argument("predict_obstacle: L must be >= 1");
    lim.validate();
    const Vec2 nominal = o.p + lim.dt * o.v;
    ObstaclePrediction pred;
    pred.samples.reserve(static_cast<std::size_t>(L));
    for (int j = 0; j < L; ++j) {
        Vec2 s = nominal;
        if (sigma > 0.0) {
            s.x += detail::truncated_gauss(rng, sigma);
            s.y += detail::truncated_gauss(rng, sigma);
        }
        pred.samples.push_back(s);
    }
    pred.velocities.assign(static_cast<std::size_t>(L), o.v);
    pred.probs.assign(static_cast<std::size_t>(L), 1.0 / static_cast<double>(L));
    pred.now = o;
    return pred;
}

}  // namespace cvarnav::dynamics
