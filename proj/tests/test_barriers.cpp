#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "cvarnav/barriers.hpp"

using namespace cvarnav;
using barriers::BarrierConfig;
using barriers::RelativeKinematics;

namespace {

struct KinState {
    Vec2 p, p_obs, v, v_obs;
};

// Non-degenerate random kinematic state.
KinState random_state(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(-5.0, 5.0);
    std::uniform_real_distribution<double> vel(-2.0, 2.0);
    for (;;) {
        KinState s{{pos(rng), pos(rng)}, {pos(rng), pos(rng)}, {vel(rng), vel(rng)},
                   {vel(rng), vel(rng)}};
        if (norm(s.p - s.p_obs) > 1e-3 && norm(s.v - s.v_obs) > 1e-3) return s;
    }
}

}  // namespace

TEST_CASE("h_dist direct evaluations") {
    CHECK(barriers::h_dist({0, 0}, {3, 4}, 1.0) == 24.0);
    CHECK(barriers::h_dist({1, 1}, {1, 1}, 1.0) == -1.0);
    CHECK(barriers::h_dist({1, 0}, {0, 0}, 1.0) == 0.0);
    CHECK_THROWS_AS(barriers::h_dist({0, 0}, {1, 0}, 0.0), std::invalid_argument);
}

TEST_CASE("delta_factor geometry") {
    CHECK(barriers::delta_factor({{1, 0}, {1, 0}}) == 0.0);   // receding
    CHECK(barriers::delta_factor({{1, 0}, {-1, 0}}) == 1.0);  // head-on
    CHECK(barriers::delta_factor({{1, 0}, {-1, 1}}) ==
          Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-12));
    // Degenerate norms have no approach direction.
    CHECK(barriers::delta_factor({{0, 0}, {1, 0}}) == 0.0);
    CHECK(barriers::delta_factor({{1, 0}, {0, 0}}) == 0.0);
}

TEST_CASE("delta_factor range and sign split") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 5000; ++i) {
        const auto s = random_state(rng);
        const RelativeKinematics rel{s.p - s.p_obs, s.v - s.v_obs};
        const double d = barriers::delta_factor(rel);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
        if (dot(rel.p_rel, rel.v_rel) >= 0.0)
            CHECK(d == 0.0);
        else
            CHECK(d > 0.0);
    }
}

TEST_CASE("delta_softplus closed forms and limit") {
    // Orthogonal motion: x = 0.
    CHECK(barriers::delta_softplus({{1, 0}, {0, 1}}, 10.0) ==
          Catch::Approx(std::log(2.0) / 10.0).margin(1e-12));
    // Head-on: x = 1.
    CHECK(barriers::delta_softplus({{1, 0}, {-1, 0}}, 10.0) ==
          Catch::Approx(1.0 + std::log1p(std::exp(-10.0)) / 10.0).margin(1e-12));
    // Large temperature converges to the hard max.
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        const auto s = random_state(rng);
        const RelativeKinematics rel{s.p - s.p_obs, s.v - s.v_obs};
        CHECK(barriers::delta_softplus(rel, 1e6) ==
              Catch::Approx(barriers::delta_factor(rel)).margin(1e-5));
    }
    // Overflow-safe at extreme temperature times x.
    CHECK(std::isfinite(barriers::delta_softplus({{1, 0}, {-1, 0}}, 1e308)));
}

TEST_CASE("h_cone examples and sign convention") {
    const double want = -4.0 + 2.0 * std::sqrt(3.0);
    CHECK(barriers::h_cone({{2, 0}, {-2, 0}}, 1.0) == Catch::Approx(want).margin(1e-12));
    CHECK(barriers::h_cone({{2, 0}, {2, 0}}, 1.0) ==
          Catch::Approx(4.0 + 2.0 * std::sqrt(3.0)).margin(1e-12));
    CHECK(barriers::h_cone({{2, 3}, {0, 0}}, 1.0) == 0.0);
    CHECK_THROWS_AS(barriers::h_cone({{0.5, 0}, {1, 0}}, 1.0), std::domain_error);
    CHECK_THROWS_AS(barriers::h_cone({{1, 0}, {1, 0}}, 1.0), std::domain_error);

    // Receding directly: positive. Approaching near the radius: negative.
    CHECK(barriers::h_cone({{1.5, 0}, {1, 0}}, 1.0) > 0.0);
    CHECK(barriers::h_cone({{1.05, 0}, {-1, 0}}, 1.0) < 0.0);
}

TEST_CASE("h_zone examples") {
    BarrierConfig cfg;
    cfg.r_safe = 1.0;
    CHECK(barriers::h_zone({0, 0}, {2, 0}, {1, 0}, {-1, 0}, cfg) == Catch::Approx(2.0));
    // Receding motion reduces to h_dist exactly.
    CHECK(barriers::h_zone({0, 0}, {3, 0}, {-1, 0}, {1, 0}, cfg) ==
          barriers::h_dist({0, 0}, {3, 0}, 1.0));
    // Coincident positions: degenerate norm rule.
    CHECK(barriers::h_zone({1, 1}, {1, 1}, {1, 0}, {0, 0}, cfg) == -1.0);
}

TEST_CASE("shift identity and conservatism ordering") {
    std::mt19937_64 rng(9);
    BarrierConfig cfg;
    for (int i = 0; i < 100000; ++i) {
        const auto s = random_state(rng);
        cfg.r_safe = 0.3 + 0.7 * static_cast<double>(i % 10) / 10.0;
        const double hz = barriers::h_zone(s.p, s.p_obs, s.v, s.v_obs, cfg);
        const double hd = barriers::h_dist(s.p, s.p_obs, cfg.r_safe);
        const double delta = barriers::delta_factor({s.p - s.p_obs, s.v - s.v_obs});
        REQUIRE(hz == Catch::Approx(hd - delta * cfg.r_safe * cfg.r_safe).margin(1e-12));
        REQUIRE(hz <= hd + 1e-15);
    }
}

TEST_CASE("softplus zone gradient matches central differences") {
    std::mt19937_64 rng(13);
    BarrierConfig cfg;
    cfg.r_safe = 0.8;
    const double step = 1e-6;
    for (int checked = 0; checked < 1000; ++checked) {
        const auto s = random_state(rng);
        const auto g = barriers::h_zone_grad(s.p, s.p_obs, s.v, s.v_obs, cfg);
        CHECK(g.value ==
              Catch::Approx(barriers::h_zone(s.p, s.p_obs, s.v, s.v_obs, cfg, true))
                  .margin(1e-12));
        const double grads[4] = {g.dp.x, g.dp.y, g.dv.x, g.dv.y};
        for (int axis = 0; axis < 4; ++axis) {
            auto hi = s, lo = s;
            double* fields_hi[4] = {&hi.p.x, &hi.p.y, &hi.v.x, &hi.v.y};
            double* fields_lo[4] = {&lo.p.x, &lo.p.y, &lo.v.x, &lo.v.y};
            *fields_hi[axis] += step;
            *fields_lo[axis] -= step;
            const double fd = (barriers::h_zone(hi.p, hi.p_obs, hi.v, hi.v_obs, cfg, true) -
                               barriers::h_zone(lo.p, lo.p_obs, lo.v, lo.v_obs, cfg, true)) /
                              (2.0 * step);
            const double scale = std::max({1.0, std::abs(fd), std::abs(grads[axis])});
            REQUIRE(std::abs(grads[axis] - fd) / scale < 1e-5);
        }
    }
}

TEST_CASE("cone gradient matches central differences") {
    std::mt19937_64 rng(15);
    const double r_safe = 0.6;
    const double step = 1e-6;
    int checked = 0;
    while (checked < 500) {
        const auto s = random_state(rng);
        if (norm(s.p - s.p_obs) < r_safe + 0.05) continue;
        ++checked;
        const auto g = barriers::h_cone_grad(s.p, s.p_obs, s.v, s.v_obs, r_safe);
        const double grads[4] = {g.dp.x, g.dp.y, g.dv.x, g.dv.y};
        for (int axis = 0; axis < 4; ++axis) {
            auto hi = s, lo = s;
            double* fields_hi[4] = {&hi.p.x, &hi.p.y, &hi.v.x, &hi.v.y};
            double* fields_lo[4] = {&lo.p.x, &lo.p.y, &lo.v.x, &lo.v.y};
            *fields_hi[axis] += step;
            *fields_lo[axis] -= step;
            const double fd = (barriers::h_cone({hi.p - hi.p_obs, hi.v - hi.v_obs}, r_safe) -
                               barriers::h_cone({lo.p - lo.p_obs, lo.v - lo.v_obs}, r_safe)) /
                              (2.0 * step);
            const double scale = std::max({1.0, std::abs(fd), std::abs(grads[axis])});
            REQUIRE(std::abs(grads[axis] - fd) / scale < 1e-4);
        }
    }
}
