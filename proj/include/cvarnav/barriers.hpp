#pragma once

#include <cmath>
#include <stdexcept>

#include "cvarnav/vec2.hpp"

namespace cvarnav::barriers {

enum class BarrierKind { Distance, Cone, DynamicZone };

struct RelativeKinematics {
    Vec2 p_rel;  // robot position minus obstacle position, m
    Vec2 v_rel;  // robot velocity minus obstacle velocity, m/s
};

struct BarrierConfig {
    double r_safe = 0.7;         // minimal allowable separation, m
    double softplus_temp = 10.0; // smooth-max temperature for the solver variant
    BarrierKind kind = BarrierKind::DynamicZone;
};

// Below this, a relative norm is treated as degenerate: a stationary relative
// configuration has no approach direction, so Delta := 0 there.
constexpr double kDegenerateNorm = 1e-9;

// Squared-distance barrier: ||p - p_obs||^2 - r_safe^2, units m^2.
inline double h_dist(const Vec2& p, const Vec2& p_obs, double r_safe) {
    if (!(r_safe > 0.0)) throw std::invalid_argument("h_dist: r_safe must be > 0");
    return norm_sq(p - p_obs) - r_safe * r_safe;
}

namespace detail {

// x = -cos(angle between p_rel and v_rel); 0 when either norm is degenerate.
inline double approach_cos(const RelativeKinematics& rel) {
    const double pn = norm(rel.p_rel);
    const double vn = norm(rel.v_rel);
    if (pn < kDegenerateNorm || vn < kDegenerateNorm) return 0.0;
    return -dot(rel.p_rel, rel.v_rel) / (pn * vn);
}

// Overflow-safe softplus(z) = ln(1 + e^z).
inline double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace detail

// Approach factor Delta in [0,1]: nonnegative part of -cos(angle between
// relative position and relative velocity). Zero means moving apart.
inline double delta_factor(const RelativeKinematics& rel) {
    return std::max(0.0, detail::approach_cos(rel));
}

// Smooth surrogate of delta_factor used inside gradient-based solving:
// softplus(temp * x) / temp. Converges to the hard max as temp -> infinity.
inline double delta_softplus(const RelativeKinematics& rel, double temp) {
    if (!(temp > 0.0)) throw std::invalid_argument("delta_softplus: temp must be > 0");
    return detail::softplus(temp * detail::approach_cos(rel)) / temp;
}

// Collision-cone barrier: <p_rel, v_rel> + ||p_rel|| ||v_rel|| cos(phi),
// cos(phi) = sqrt(||p_rel||^2 - r_safe^2) / ||p_rel||. Positive iff the
// relative velocity points outside the collision cone. Undefined inside the
// safety radius; that is reported as an error so callers must treat the
// configuration as unsafe.
inline double h_cone(const RelativeKinematics& rel, double r_safe) {
    if (!(r_safe > 0.0)) throw std::invalid_argument("h_cone: r_safe must be > 0");
    const double pn2 = norm_sq(rel.p_rel);
    if (pn2 <= r_safe * r_safe)
        throw std::domain_error("h_cone: ||p_rel|| <= r_safe, cone undefined");
    return dot(rel.p_rel, rel.v_rel) + norm(rel.v_rel) * std::sqrt(pn2 - r_safe * r_safe);
}

// Dynamic zone barrier: h_dist minus the expansion r_safe^2 * Delta.
// The exact hard-max Delta is used for all reported values and bookkeeping;
// smooth=true selects the softplus surrogate for use inside the optimizer.
inline double h_zone(const Vec2& p, const Vec2& p_obs, const Vec2& v, const Vec2& v_obs,
                     const BarrierConfig& cfg, bool smooth = false) {
    const RelativeKinematics rel{p - p_obs, v - v_obs};
    const double d = smooth ? delta_softplus(rel, cfg.softplus_temp) : delta_factor(rel);
    return h_dist(p, p_obs, cfg.r_safe) - cfg.r_safe * cfg.r_safe * d;
}

// Barrier value with partial derivatives w.r.t. robot position and velocity.
struct ValueGrad {
    double value = 0.0;
    Vec2 dp;  // d value / d p
    Vec2 dv;  // d value / d v
};

inline ValueGrad h_dist_grad(const Vec2& p, const Vec2& p_obs, double r_safe) {
    ValueGrad g;
    g.value = h_dist(p, p_obs, r_safe);
    g.dp = 2.0 * (p - p_obs);
    return g;
}

// Softplus-Delta variant of the zone barrier with analytic gradients.
inline ValueGrad h_zone_grad(const Vec2& p, const Vec2& p_obs, const Vec2& v, const Vec2& v_obs,
                             const BarrierConfig& cfg) {
    const Vec2 p_rel = p - p_obs;
    const Vec2 v_rel = v - v_obs;
    const double r2 = cfg.r_safe * cfg.r_safe;
    ValueGrad g;
    g.dp = 2.0 * p_rel;

    const double pn = norm(p_rel);
    const double vn = norm(v_rel);
    if (pn < kDegenerateNorm || vn < kDegenerateNorm) {
        g.value = norm_sq(p_rel) - r2 * (1.0 + detail::softplus(0.0) / cfg.softplus_temp);
        return g;
    }
    const double pv = dot(p_rel, v_rel);
    const double x = -pv / (pn * vn);
    const double s = detail::softplus(cfg.softplus_temp * x) / cfg.softplus_temp;
    const double sprime = detail::sigmoid(cfg.softplus_temp * x);
    const Vec2 dx_dp = -v_rel / (pn * vn) + (pv / (pn * pn * pn * vn)) * p_rel;
    const Vec2 dx_dv = -p_rel / (pn * vn) + (pv / (pn * vn * vn * vn)) * v_rel;
    g.value = norm_sq(p_rel) - r2 * (1.0 + s);
    g.dp += (-r2 * sprime) * dx_dp;
    g.dv = (-r2 * sprime) * dx_dv;
    return g;
}

inline ValueGrad h_cone_grad(const Vec2& p, const Vec2& p_obs, const Vec2& v, const Vec2& v_obs,
                             double r_safe) {
    const Vec2 p_rel = p - p_obs;
    const Vec2 v_rel = v - v_obs;
    const double pn2 = norm_sq(p_rel);
    if (!(r_safe > 0.0)) throw std::invalid_argument("h_cone_grad: r_safe must be > 0");
    if (pn2 <= r_safe * r_safe)
        throw std::domain_error("h_cone_grad: ||p_rel|| <= r_safe, cone undefined");
    const double root = std::sqrt(pn2 - r_safe * r_safe);
    const double vn = norm(v_rel);
    ValueGrad g;
    g.value = dot(p_rel, v_rel) + vn * root;
    g.dp = v_rel + (vn / root) * p_rel;
    g.dv = vn < kDegenerateNorm ? p_rel : p_rel + (root / vn) * v_rel;
    return g;
}

}  // namespace cvarnav::barriers
