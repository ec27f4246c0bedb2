#include <catch_amalgamated.hpp>

#include <random>

#include "cvarnav/risk.hpp"
#include "oracles.hpp"

using namespace cvarnav;
using risk::RiskLevel;
using risk::WeightedDistribution;

namespace {
const WeightedDistribution kQuartet = WeightedDistribution::uniform({1.0, 2.0, 3.0, 4.0});
}

TEST_CASE("empirical_var on the uniform quartet") {
    CHECK(risk::empirical_var(kQuartet, RiskLevel(0.25)) == 2.0);
    CHECK(risk::empirical_var(kQuartet, RiskLevel(0.5)) == 3.0);
}

TEST_CASE("empirical_var degenerate distribution") {
    const auto d = WeightedDistribution{{7.5}, {1.0}};
    CHECK(risk::empirical_var(d, RiskLevel(0.1)) == 7.5);
    CHECK(risk::empirical_var(d, RiskLevel(0.9)) == 7.5);
}

TEST_CASE("empirical_var input validation") {
    CHECK_THROWS_AS(risk::empirical_var({{1.0}, {0.5}}, RiskLevel(0.5)), std::invalid_argument);
    CHECK_THROWS_AS(risk::empirical_var({{1.0, 2.0}, {0.5}}, RiskLevel(0.5)),
                    std::invalid_argument);
    CHECK_THROWS_AS(risk::empirical_var(kQuartet, RiskLevel(1.0)), std::invalid_argument);
    CHECK_THROWS_AS(RiskLevel(0.0), std::invalid_argument);
    CHECK_THROWS_AS(RiskLevel(1.5), std::invalid_argument);
}

TEST_CASE("empirical_cvar on the uniform quartet") {
    CHECK(risk::empirical_cvar(kQuartet, RiskLevel(0.5)) == Catch::Approx(1.5).margin(1e-12));
    CHECK(risk::empirical_cvar(kQuartet, RiskLevel(1.0)) == Catch::Approx(2.5).margin(1e-12));
}

TEST_CASE("empirical_cvar degenerate distribution") {
    const auto d = WeightedDistribution{{-3.25}, {1.0}};
    CHECK(risk::empirical_cvar(d, RiskLevel(0.2)) == -3.25);
    CHECK(risk::empirical_cvar(d, RiskLevel(1.0)) == -3.25);
}

TEST_CASE("cvar_certificate minimizers") {
    const auto [c1, z1] = risk::cvar_certificate(kQuartet, RiskLevel(0.5));
    CHECK(c1 == Catch::Approx(1.5).margin(1e-12));
    CHECK(z1 == -2.0);

    const auto [c2, z2] = risk::cvar_certificate({{5.0}, {1.0}}, RiskLevel(0.5));
    CHECK(c2 == 5.0);
    CHECK(z2 == -5.0);

    const auto [c3, z3] = risk::cvar_certificate({{0.0, 10.0}, {0.5, 0.5}}, RiskLevel(0.5));
    CHECK(c3 == Catch::Approx(0.0).margin(1e-12));
    CHECK(z3 == 0.0);
}

TEST_CASE("cvar_certificate matches empirical_cvar bit for bit") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 500; ++i) {
        const auto d = oracle::random_distribution(rng);
        const RiskLevel beta(oracle::random_beta(rng));
        CHECK(risk::cvar_certificate(d, beta).first == risk::empirical_cvar(d, beta));
    }
}

TEST_CASE("cvar matches the independent tail-mean oracle") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 2000; ++i) {
        const auto d = oracle::random_distribution(rng);
        const double beta = oracle::random_beta(rng);
        const double got = risk::empirical_cvar(d, RiskLevel(beta));
        const double want = oracle::cvar(d.values, d.probs, beta);
        CHECK(got == Catch::Approx(want).margin(1e-9));
    }
}

TEST_CASE("var matches the scan oracle") {
    std::mt19937_64 rng(19);
    for (int i = 0; i < 2000; ++i) {
        const auto d = oracle::random_distribution(rng);
        const double beta = oracle::random_beta(rng);
        CHECK(risk::empirical_var(d, RiskLevel(beta)) == oracle::var(d.values, d.probs, beta));
    }
}

TEST_CASE("cvar is monotone in beta and dominated by var") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 1000; ++i) {
        const auto d = oracle::random_distribution(rng);
        double b1 = oracle::random_beta(rng);
        double b2 = oracle::random_beta(rng);
        if (b1 > b2) std::swap(b1, b2);
        const double c1 = risk::empirical_cvar(d, RiskLevel(b1));
        const double c2 = risk::empirical_cvar(d, RiskLevel(b2));
        CHECK(c1 <= c2 + 1e-12);
        const double v = risk::empirical_var(d, RiskLevel(b1));
        CHECK(c1 <= v + 1e-12);
        CHECK(v <= *std::max_element(d.values.begin(), d.values.end()) + 1e-12);
    }
}

TEST_CASE("nonnegative cvar implies the chance constraint") {
    std::mt19937_64 rng(29);
    int hits = 0;
    for (int i = 0; i < 5000; ++i) {
        auto d = oracle::random_distribution(rng);
        // Shift some distributions near zero so the implication is exercised.
        if (i % 2 == 0) {
            const double m = d.mean();
            for (double& v : d.values) v -= m;
        }
        const double beta = oracle::random_beta(rng);
        if (risk::empirical_cvar(d, RiskLevel(beta)) < 0.0) continue;
        ++hits;
        CHECK(oracle::prob_geq_zero(d.values, d.probs) >= 1.0 - beta - 1e-12);
    }
    CHECK(hits > 100);
}

TEST_CASE("cvar translation equivariance") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> shift(-5.0, 5.0);
    for (int i = 0; i < 500; ++i) {
        const auto d = oracle::random_distribution(rng);
        const double beta = oracle::random_beta(rng);
        const double c = shift(rng);
        auto shifted = d;
        for (double& v : shifted.values) v += c;
        CHECK(risk::empirical_cvar(shifted, RiskLevel(beta)) ==
              Catch::Approx(risk::empirical_cvar(d, RiskLevel(beta)) + c).margin(1e-9));
    }
}

TEST_CASE("cvar difference bound on shared atoms") {
    // CVaR(X - Y) <= CVaR(X) - CVaR(Y) for distributions on the same atoms.
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> value(-10.0, 10.0);
    std::uniform_int_distribution<int> size_dist(1, 10);
    std::uniform_real_distribution<double> prob(0.05, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const int n = size_dist(rng);
        WeightedDistribution x, y, diff;
        double total = 0.0;
        for (int j = 0; j < n; ++j) {
            x.values.push_back(value(rng));
            y.values.push_back(value(rng));
            diff.values.push_back(x.values.back() - y.values.back());
            x.probs.push_back(prob(rng));
            total += x.probs.back();
        }
        for (double& p : x.probs) p /= total;
        y.probs = x.probs;
        diff.probs = x.probs;
        const double beta = oracle::random_beta(rng);
        CHECK(risk::empirical_cvar(diff, RiskLevel(beta)) <=
              risk::empirical_cvar(x, RiskLevel(beta)) -
                  risk::empirical_cvar(y, RiskLevel(beta)) + 1e-9);
    }
}

TEST_CASE("cvar_tail_weights reproduce the cvar value") {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 500; ++i) {
        const auto d = oracle::random_distribution(rng);
        const double beta = oracle::random_beta(rng);
        const auto q = risk::cvar_tail_weights(d, RiskLevel(beta));
        double total = 0.0, val = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) {
            CHECK(q[j] >= 0.0);
            CHECK(q[j] <= d.probs[j] / beta + 1e-12);
            total += q[j];
            val += q[j] * d.values[j];
        }
        CHECK(total == Catch::Approx(1.0).margin(1e-9));
        CHECK(val == Catch::Approx(risk::empirical_cvar(d, RiskLevel(beta))).margin(1e-9));
    }
}

TEST_CASE("risk_offset examples") {
    const auto half = WeightedDistribution::uniform({0.5, 0.5, 0.5});
    CHECK(risk::risk_offset(half, 0.5, 0.2, 1.0, RiskLevel(0.5)) ==
          Catch::Approx(0.1).margin(1e-12));
    const auto zero = WeightedDistribution::uniform({0.0, 0.0});
    CHECK(risk::risk_offset(zero, 0.0, 0.7, 2.0, RiskLevel(0.3)) == 0.0);
    const auto one = WeightedDistribution::uniform({1.0, 1.0});
    CHECK(risk::risk_offset(one, 0.0, 0.2, 0.6, RiskLevel(0.5)) ==
          Catch::Approx(0.36).margin(1e-12));
    CHECK_THROWS_AS(risk::risk_offset(one, 1.5, 0.2, 0.6, RiskLevel(0.5)),
                    std::invalid_argument);
    CHECK_THROWS_AS(risk::risk_offset(one, 0.0, 0.0, 0.6, RiskLevel(0.5)),
                    std::invalid_argument);
}

TEST_CASE("upper_bound_search identity, interior target, saturation") {
    const RiskLevel beta_u(0.5);
    CHECK(risk::upper_bound_search(kQuartet, beta_u, 0.0, 0.99, 1e-4).beta == 0.5);

    // CVaR_{0.75} = mean{1,2,3} = 2.0 = CVaR_{0.5} + 0.5.
    const double b = risk::upper_bound_search(kQuartet, beta_u, 0.5, 0.99, 1e-4).beta;
    CHECK(b == Catch::Approx(0.75).margin(1e-3));

    CHECK(risk::upper_bound_search(kQuartet, beta_u, 100.0, 0.99, 1e-4).beta == 0.99);
}

TEST_CASE("upper_bound_search hits the CVaR target within tolerance") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> offs(0.0, 3.0);
    for (int i = 0; i < 300; ++i) {
        const auto d = oracle::random_distribution(rng);
        const double delta = offs(rng);
        const auto b = risk::upper_bound_search(d, RiskLevel(0.5), delta, 0.99, 1e-4);
        CHECK(b.beta >= 0.5);
        CHECK(b.beta <= 0.99);
        const double achieved = risk::empirical_cvar(d, b);
        const double target = risk::empirical_cvar(d, RiskLevel(0.5)) + delta;
        if (b.beta < 0.99)
            CHECK(achieved == Catch::Approx(target).margin(2e-4));
        else
            CHECK(achieved <= target + 2e-4);
    }
}
