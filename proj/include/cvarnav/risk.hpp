#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cvarnav::risk {

// Finite set of real values with probabilities. Carrier for the sampled
// next-step barrier value, which becomes a random variable under obstacle
// prediction uncertainty.
struct WeightedDistribution {
    std::vector<double> values;
    std::vector<double> probs;

    void validate() const {
        if (values.empty() || values.size() != probs.size())
            throw std::invalid_argument(
                "WeightedDistribution: values/probs must have equal nonzero length");
        double sum = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!std::isfinite(values[i]))
                throw std::invalid_argument("WeightedDistribution: non-finite value");
            if (!std::isfinite(probs[i]) || probs[i] <= 0.0)
                throw std::invalid_argument("WeightedDistribution: probs must be > 0");
            sum += probs[i];
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("WeightedDistribution: probs must sum to 1");
    }

    static WeightedDistribution uniform(std::vector<double> vals) {
        WeightedDistribution d;
        d.probs.assign(vals.size(), vals.empty() ? 0.0 : 1.0 / static_cast<double>(vals.size()));
        d.values = std::move(vals);
        return d;
    }

    double mean() const {
        double m = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) m += probs[i] * values[i];
        return m;
    }
};

// Tail probability mass considered by VaR/CVaR. beta -> 0 is risk-averse,
// beta = 1 is the risk-neutral expectation case.
struct RiskLevel {
    double beta;
    explicit RiskLevel(double b) : beta(b) {
        if (!(b > 0.0) || !(b <= 1.0) || !std::isfinite(b))
            throw std::invalid_argument("RiskLevel: beta must be in (0,1]");
    }
};

namespace detail {

// Sorted ascending with equal values merged (removes tie order dependence).
inline void sorted_merged(const WeightedDistribution& d, std::vector<double>& v,
                          std::vector<double>& p) {
    const std::size_t n = d.values.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return d.values[a] < d.values[b]; });
    v.clear();
    p.clear();
    v.reserve(n);
    p.reserve(n);
    for (std::size_t i : idx) {
        if (!v.empty() && d.values[i] == v.back()) {
            p.back() += d.probs[i];
        } else {
            v.push_back(d.values[i]);
            p.push_back(d.probs[i]);
        }
    }
}

constexpr double kProbSlack = 1e-12;

}  // namespace detail

// beta-quantile: the largest sample value z such that P(X >= z) >= 1 - beta.
inline double empirical_var(const WeightedDistribution& dist, RiskLevel beta) {
    dist.validate();
    if (!(beta.beta < 1.0))
        throw std::invalid_argument("empirical_var: beta must be in (0,1)");
    std::vector<double> v, p;
    detail::sorted_merged(dist, v, p);
    const double need = 1.0 - beta.beta;
    double tail = 0.0;
    for (std::size_t i = v.size(); i-- > 0;) {
        tail += p[i];
        if (tail >= need - detail::kProbSlack) return v[i];
    }
    return v.front();  // total mass is 1 >= need, so this is unreachable
}

// Expected value in the worst (lowest-value) beta-tail, together with the
// minimizer zeta* of the Rockafellar-Uryasev objective
//   E[zeta + (-X - zeta)_+ / beta].
// The infimum is attained at an atom of the discrete loss, so scanning the
// candidates zeta = -value_i is exact; the scan keeps the first strict
// minimizer in ascending value order.
inline std::pair<double, double> cvar_certificate(const WeightedDistribution& dist,
                                                  RiskLevel beta) {
    dist.validate();
    std::vector<double> v, p;
    detail::sorted_merged(dist, v, p);
    if (beta.beta == 1.0) {
        double m = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) m += p[i] * v[i];
        return {m, -v.back()};
    }
    double prefix_p = 0.0;   // sum of probs below the candidate
    double prefix_pv = 0.0;  // prob-weighted value sum below the candidate
    double best = std::numeric_limits<double>::infinity();
    double best_zeta = -v.front();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double obj = -v[i] + (v[i] * prefix_p - prefix_pv) / beta.beta;
        if (obj < best) {
            best = obj;
            best_zeta = -v[i];
        }
        prefix_p += p[i];
        prefix_pv += p[i] * v[i];
    }
    return {-best, best_zeta};
}

inline double empirical_cvar(const WeightedDistribution& dist, RiskLevel beta) {
    return cvar_certificate(dist, beta).first;
}

// Minimizing envelope measure q of the dual form CVaR = min_q E_q[X] with
// 0 <= q_i <= p_i/beta, sum q = 1: fill the lowest atoms first, fractional at
// the boundary. Weights are per input atom (no tie merging; ties resolved by
// input order). Used to assemble CVaR supergradients in the solver.
inline std::vector<double> cvar_tail_weights(const WeightedDistribution& dist, RiskLevel beta) {
    dist.validate();
    const std::size_t n = dist.values.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return dist.values[a] < dist.values[b];
    });
    std::vector<double> q(n, 0.0);
    double remaining = beta.beta;
    for (std::size_t i : idx) {
        if (remaining <= 0.0) break;
        const double take = std::min(dist.probs[i], remaining);
        q[i] = take / beta.beta;
        remaining -= take;
    }
    return q;
}

// Dynamic risk offset created by the zone expansion between two steps:
//   (CVaR_beta(Delta_{k+1}) - (1-gamma) * Delta_k) * r_safe^2.
inline double risk_offset(const WeightedDistribution& delta_next, double delta_now,
                          double gamma, double r_safe, RiskLevel beta) {
    if (!(delta_now >= 0.0) || !(delta_now <= 1.0))
        throw std::invalid_argument("risk_offset: delta_now must be in [0,1]");
    if (!(gamma > 0.0) || !(gamma <= 1.0))
        throw std::invalid_argument("risk_offset: gamma must be in (0,1]");
    if (!(r_safe > 0.0)) throw std::invalid_argument("risk_offset: r_safe must be > 0");
    return (empirical_cvar(delta_next, beta) - (1.0 - gamma) * delta_now) * r_safe * r_safe;
}

// Largest risk level whose CVaR matches CVaR at beta_u plus the offset delta,
// found by bisection (CVaR is nondecreasing in beta). Saturates at beta_max
// when even that cannot reach the target; never returns below beta_u.
inline RiskLevel upper_bound_search(const WeightedDistribution& h_dist, RiskLevel beta_u,
                                    double delta, double beta_max, double tol) {
    if (!(delta >= 0.0)) throw std::invalid_argument("upper_bound_search: delta must be >= 0");
    if (!(beta_u.beta < beta_max) || !(beta_max < 1.0))
        throw std::invalid_argument("upper_bound_search: need beta_u < beta_max < 1");
    if (!(tol > 0.0)) throw std::invalid_argument("upper_bound_search: tol must be > 0");
    if (delta == 0.0) return beta_u;
    const double target = empirical_cvar(h_dist, beta_u) + delta;
    if (empirical_cvar(h_dist, RiskLevel(beta_max)) <= target) return RiskLevel(beta_max);
    double lo = beta_u.beta, hi = beta_max;
    for (int it = 0; it < 64; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gap = empirical_cvar(h_dist, RiskLevel(mid)) - target;
        if (std::abs(gap) <= tol) return RiskLevel(mid);
        (gap < 0.0 ? lo : hi) = mid;
    }
    return RiskLevel(0.5 * (lo + hi));
}

}  // namespace cvarnav::risk
