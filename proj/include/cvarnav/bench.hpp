#pragma once

#include <atomic>
#include <cstdint>
#include <cstring>
#include <exception>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "cvarnav/sim.hpp"

namespace cvarnav::bench {

using sim::EpisodeResult;
using sim::MethodSpec;
using sim::Outcome;
using sim::ScenarioConfig;

struct MetricsSummary {
    int m_t = 0;  // total test cases
    int m_s = 0;  // successful
    int m_f = 0;  // feasible at every step
    int m_c = 0;  // collisions
    double SR = 0.0;
    double FR = 0.0;
    double CR = 0.0;
    std::optional<double> ATL;  // mean trajectory length over successes, m
    std::optional<double> ATT;  // mean trajectory time over successes, s
};

struct SweepSpec {
    std::vector<int> obstacle_counts{5};
    std::vector<double> sigmas{0.05};
    std::vector<MethodSpec> methods{{}};
    int configs_per_cell = 40;
    std::uint64_t base_seed = 1;
    ScenarioConfig base;  // shared settings; count/sigma/seed/method filled per cell

    void validate() const {
        if (configs_per_cell < 1)
            throw std::invalid_argument("SweepSpec: configs_per_cell must be >= 1");
        if (obstacle_counts.empty() || sigmas.empty() || methods.empty())
            throw std::invalid_argument("SweepSpec: counts, sigmas, methods must be nonempty");
        for (const auto& m : methods) m.validate();
        base.validate();
    }
};

// Deterministic scenario expansion: one config per (count, sigma, index) with
// a seed hashed from (base_seed, count, sigma, index). Methods are applied on
// top by the runner, so every method sees the identical scenario set.
inline std::vector<ScenarioConfig> generate_scenarios(const SweepSpec& spec) {
    spec.validate();
    std::vector<ScenarioConfig> out;
    out.reserve(spec.obstacle_counts.size() * spec.sigmas.size() *
                static_cast<std::size_t>(spec.configs_per_cell));
    for (int count : spec.obstacle_counts) {
        for (double sigma : spec.sigmas) {
            std::uint64_t sigma_bits;
            static_assert(sizeof sigma_bits == sizeof sigma);
            std::memcpy(&sigma_bits, &sigma, sizeof sigma);
            for (int idx = 0; idx < spec.configs_per_cell; ++idx) {
                ScenarioConfig cfg = spec.base;
                cfg.n_obstacles = count;
                cfg.sigma = sigma;
                cfg.seed = sim::mix_seed(
                    sim::mix_seed(sim::mix_seed(spec.base_seed, static_cast<std::uint64_t>(count)),
                                  sigma_bits),
                    static_cast<std::uint64_t>(idx));
                out.push_back(cfg);
            }
        }
    }
    return out;
}

inline MetricsSummary compute_metrics(const std::vector<EpisodeResult>& results) {
    if (results.empty()) throw std::invalid_argument("compute_metrics: no results");
    MetricsSummary m;
    m.m_t = static_cast<int>(results.size());
    double len = 0.0, time = 0.0;
    for (const auto& r : results) {
        if (r.outcome == Outcome::Success) {
            ++m.m_s;
            len += r.trajectory_length;
            time += r.elapsed;
        }
        if (r.feasible_throughout) ++m.m_f;
        if (r.outcome == Outcome::Collision) ++m.m_c;
    }
    m.SR = static_cast<double>(m.m_s) / m.m_t;
    m.FR = static_cast<double>(m.m_f) / m.m_t;
    m.CR = static_cast<double>(m.m_c) / m.m_t;
    if (m.m_s > 0) {
        m.ATL = len / m.m_s;
        m.ATT = time / m.m_s;
    }
    return m;
}

struct CellResult {
    MethodSpec method;
    int n_obstacles = 0;
    double sigma = 0.0;
    MetricsSummary metrics;
};

struct EpisodeRow {
    MethodSpec method;
    int n_obstacles = 0;
    double sigma = 0.0;
    int index = 0;  // scenario index within the cell
    std::uint64_t seed = 0;
    EpisodeResult result;
};

struct BenchmarkResult {
    std::vector<CellResult> cells;
    std::vector<EpisodeRow> episodes;
};

// Runs every (scenario, method) pair over a worker pool and aggregates per
// cell. Episode order in the output is deterministic (slot per task); a
// throwing episode is logged and counted as Infeasible.
inline BenchmarkResult run_benchmark(const SweepSpec& spec, int jobs = 0) {
    spec.validate();
    const auto scenarios = generate_scenarios(spec);
    struct Task {
        ScenarioConfig cfg;
        std::size_t method_i, cell_i, episode_i;
        int index;
    };
    const std::size_t cells_per_method = spec.obstacle_counts.size() * spec.sigmas.size();
    std::vector<Task> tasks;
    tasks.reserve(scenarios.size() * spec.methods.size());
    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
        for (std::size_t si = 0; si < scenarios.size(); ++si) {
            Task task;
            task.cfg = scenarios[si];
            task.cfg.method = spec.methods[mi];
            task.method_i = mi;
            task.cell_i = mi * cells_per_method +
                          si / static_cast<std::size_t>(spec.configs_per_cell);
            task.index = static_cast<int>(si % static_cast<std::size_t>(spec.configs_per_cell));
            task.episode_i = mi * scenarios.size() + si;
            tasks.push_back(std::move(task));
        }
    }

    std::vector<EpisodeResult> results(tasks.size());
    std::atomic<std::size_t> cursor{0};
    const unsigned workers =
        jobs > 0 ? static_cast<unsigned>(jobs)
                 : std::max(1u, std::thread::hardware_concurrency());
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                results[i] = sim::run_episode(tasks[i].cfg);
            } catch (const std::exception& e) {
                std::cerr << "episode failed (method=" << sim::method_name(tasks[i].cfg.method)
                          << " seed=" << tasks[i].cfg.seed << "): " << e.what() << "\n";
                results[i] = EpisodeResult{};
                results[i].outcome = Outcome::Infeasible;
                results[i].feasible_throughout = false;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    BenchmarkResult out;
    std::vector<std::vector<EpisodeResult>> per_cell(spec.methods.size() * cells_per_method);
    out.episodes.reserve(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        per_cell[tasks[i].cell_i].push_back(results[i]);
        EpisodeRow row;
        row.method = tasks[i].cfg.method;
        row.n_obstacles = tasks[i].cfg.n_obstacles;
        row.sigma = tasks[i].cfg.sigma;
        row.index = tasks[i].index;
        row.seed = tasks[i].cfg.seed;
        row.result = std::move(results[i]);
        out.episodes.push_back(std::move(row));
    }
    std::size_t cell = 0;
    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
        for (int count : spec.obstacle_counts) {
            for (double sigma : spec.sigmas) {
                CellResult c;
                c.method = spec.methods[mi];
                c.n_obstacles = count;
                c.sigma = sigma;
                c.metrics = compute_metrics(per_cell[cell]);
                out.cells.push_back(std::move(c));
                ++cell;
            }
        }
    }
    return out;
}

}  // namespace cvarnav::bench
