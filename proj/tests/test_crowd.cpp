#include <catch_amalgamated.hpp>

#include <cmath>

#include "cvarnav/crowd.hpp"
#include "cvarnav/sim.hpp"

using namespace cvarnav;
using crowd::CrowdMember;
using crowd::SfmParams;
using dynamics::Limits;

namespace {

CrowdMember member(Vec2 p, Vec2 v, Vec2 goal, double radius, double speed) {
    CrowdMember m;
    m.state.p = p;
    m.state.v = v;
    m.state.radius = radius;
    m.goal = goal;
    m.home = p;
    m.desired_speed = speed;
    m.vmax_axis = {1.2, 1.2};
    return m;
}

}  // namespace

TEST_CASE("sfm_acceleration lone member relaxation") {
    SfmParams params;
    std::vector<CrowdMember> c{member({0, 0}, {0, 0}, {10, 0}, 0.3, 1.0)};
    const Vec2 a = crowd::sfm_acceleration(0, c, params);
    CHECK(a.x == Catch::Approx(2.0).margin(1e-12));
    CHECK(a.y == Catch::Approx(0.0).margin(1e-12));

    // At the desired velocity the relaxation force vanishes.
    c[0].state.v = {1.0, 0.0};
    const Vec2 a2 = crowd::sfm_acceleration(0, c, params);
    CHECK(norm(a2) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("sfm_acceleration pairwise repulsion magnitude") {
    SfmParams params;
    params.A = 2.0;
    params.B = 0.3;
    std::vector<CrowdMember> c{member({0, 0}, {0, 0}, {0, 0}, 0.3, 1.0),
                               member({0.9, 0}, {0, 0}, {0.9, 0}, 0.3, 1.0)};
    // Remove the goal force by putting each member at its goal.
    const Vec2 a = crowd::sfm_acceleration(0, c, params);
    CHECK(a.x == Catch::Approx(-2.0 * std::exp(-1.0)).margin(1e-9));
    CHECK(a.y == Catch::Approx(0.0).margin(1e-12));
    const Vec2 b = crowd::sfm_acceleration(1, c, params);
    CHECK(b.x == Catch::Approx(2.0 * std::exp(-1.0)).margin(1e-9));
}

TEST_CASE("coincident members repel along the fallback direction") {
    SfmParams params;
    std::vector<CrowdMember> c{member({1, 1}, {0, 0}, {1, 1}, 0.3, 1.0),
                               member({1, 1}, {0, 0}, {1, 1}, 0.3, 1.0)};
    const Vec2 a = crowd::sfm_acceleration(0, c, params);
    CHECK(a.x > 0.0);
    CHECK(a.y == 0.0);
}

TEST_CASE("step_crowd empty and single member convergence") {
    SfmParams params;
    Limits lim;
    CHECK(crowd::step_crowd({}, params, lim).empty());

    std::vector<CrowdMember> c{member({0, 0}, {0, 0}, {50, 0}, 0.3, 1.0)};
    for (int k = 0; k < 100; ++k) c = crowd::step_crowd(c, params, lim);
    CHECK(std::abs(norm(c[0].state.v) - 1.0) < 0.01);
}

TEST_CASE("two head-on members pass without overlap") {
    SfmParams params;
    Limits lim;
    std::vector<CrowdMember> c{member({-2, 0.0}, {0, 0}, {2, 0.05}, 0.3, 1.0),
                               member({2, 0.05}, {0, 0}, {-2, 0.0}, 0.3, 1.0)};
    double min_dist = 1e9;
    for (int k = 0; k < 300; ++k) {
        c = crowd::step_crowd(c, params, lim);
        min_dist = std::min(min_dist, norm(c[0].state.p - c[1].state.p));
    }
    CHECK(min_dist > 0.8 * 0.6);
}

TEST_CASE("per-axis speed caps hold") {
    SfmParams params;
    Limits lim;
    auto a = member({-2, 0}, {0, 0}, {2, 0}, 0.3, 1.2);
    auto b = member({2, 0.01}, {0, 0}, {-2, 0}, 0.3, 1.2);
    a.vmax_axis = {0.6, 0.3};
    b.vmax_axis = {1.2, 0.9};
    std::vector<CrowdMember> c{a, b};
    for (int k = 0; k < 400; ++k) {
        c = crowd::step_crowd(c, params, lim);
        for (std::size_t i = 0; i < c.size(); ++i) {
            CHECK(std::abs(c[i].state.v.x) <= c[i].vmax_axis.x + 1e-12);
            CHECK(std::abs(c[i].state.v.y) <= c[i].vmax_axis.y + 1e-12);
        }
    }
}

TEST_CASE("goal arrival swaps start and goal") {
    SfmParams params;
    Limits lim;
    std::vector<CrowdMember> c{member({0, 0}, {1, 0}, {0.5, 0}, 0.3, 1.0)};
    bool swapped = false;
    for (int k = 0; k < 50 && !swapped; ++k) {
        c = crowd::step_crowd(c, params, lim);
        swapped = norm(c[0].goal - Vec2{0, 0}) < 1e-9;
    }
    CHECK(swapped);
}

TEST_CASE("crowd trajectories are identical with and without a robot") {
    // The SFM update never sees the robot; the crowd recorded inside a full
    // episode must be bit-identical to stepping the same crowd alone.
    sim::ScenarioConfig cfg;
    cfg.n_obstacles = 8;
    cfg.seed = 99;
    cfg.sigma = 0.05;
    cfg.record_crowd = true;
    const auto episode = sim::run_episode(cfg);
    REQUIRE(!episode.crowd_trace.empty());

    auto alone = sim::build_crowd(cfg);
    for (const auto& snapshot : episode.crowd_trace) {
        alone = crowd::step_crowd(alone, cfg.sfm, cfg.limits);
        REQUIRE(snapshot.size() == alone.size());
        for (std::size_t i = 0; i < alone.size(); ++i) {
            REQUIRE(snapshot[i].p.x == alone[i].state.p.x);
            REQUIRE(snapshot[i].p.y == alone[i].state.p.y);
            REQUIRE(snapshot[i].v.x == alone[i].state.v.x);
            REQUIRE(snapshot[i].v.y == alone[i].state.v.y);
        }
    }
}
