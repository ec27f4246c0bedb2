#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

#include "cvarnav/bench.hpp"
#include "cvarnav/sim.hpp"

namespace cvarnav::io {

// Shortest round-trip decimal form; reproducible across runs of the same
// binary, which is what the byte-identical trace guarantee rests on.
inline std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

// One step per line; field names are part of the trace contract. h_min and
// dist_min are null when no obstacle exists to measure against.
inline void write_trace_jsonl(const sim::EpisodeResult& result, std::ostream& os) {
    for (const auto& r : result.trace) {
        double h_min = std::numeric_limits<double>::infinity();
        for (double h : r.h) h_min = std::min(h_min, h);
        os << "{\"k\":" << r.k << ",\"t\":" << format_double(r.t)
           << ",\"px\":" << format_double(r.p.x) << ",\"py\":" << format_double(r.p.y)
           << ",\"vx\":" << format_double(r.v.x) << ",\"vy\":" << format_double(r.v.y)
           << ",\"ax\":" << format_double(r.a.x) << ",\"ay\":" << format_double(r.a.y)
           << ",\"beta_k\":" << format_double(r.beta_k)
           << ",\"beta_bar_u\":" << format_double(r.beta_bar_u) << ",\"h_min\":"
           << (std::isinf(h_min) ? "null" : format_double(h_min)) << ",\"dist_min\":"
           << (std::isinf(r.dist_min) ? "null" : format_double(r.dist_min))
           << ",\"feasible\":" << (r.feasible ? "true" : "false") << "}\n";
    }
}

inline void write_episodes_jsonl(const bench::BenchmarkResult& result, std::ostream& os) {
    for (const auto& row : result.episodes) {
        const auto& r = row.result;
        os << "{\"method\":\"" << sim::method_name(row.method) << "\""
           << ",\"n_obstacles\":" << row.n_obstacles << ",\"sigma\":" << format_double(row.sigma)
           << ",\"index\":" << row.index << ",\"seed\":" << row.seed << ",\"outcome\":\""
           << sim::outcome_name(r.outcome) << "\""
           << ",\"length\":" << format_double(r.trajectory_length)
           << ",\"time\":" << format_double(r.elapsed) << ",\"min_separation\":"
           << (std::isinf(r.min_separation) ? "null" : format_double(r.min_separation))
           << ",\"feasible\":" << (r.feasible_throughout ? "true" : "false") << "}\n";
    }
}

// Summary table; ATL/ATT cells are empty when no episode succeeded.
inline void write_summary_csv(const bench::BenchmarkResult& result, std::ostream& os) {
    os << "method,n_obstacles,sigma,SR,FR,CR,ATL,ATT\n";
    for (const auto& c : result.cells) {
        const auto& m = c.metrics;
        os << sim::method_name(c.method) << ',' << c.n_obstacles << ','
           << format_double(c.sigma) << ',' << format_double(m.SR) << ','
           << format_double(m.FR) << ',' << format_double(m.CR) << ','
           << (m.ATL ? format_double(*m.ATL) : "") << ','
           << (m.ATT ? format_double(*m.ATT) : "") << "\n";
    }
}

}  // namespace cvarnav::io
