#pragma once

// Independent reference computations for the unit and acceptance tests.
// They deliberately avoid the library's own algorithms.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <variant>
#include <vector>

#include "redpatrol/graph.hpp"
#include "redpatrol/trace.hpp"

namespace redpatrol::testing {

inline PatrolGraph random_connected_graph(std::size_t n, std::size_t extra, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> weight(1.0, 20.0);
  std::vector<Edge> edges;
  std::set<std::pair<int, int>> used;
  for (std::size_t v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> parent(0, static_cast<int>(v) - 1);
    const int p = parent(rng);
    edges.push_back({p, static_cast<int>(v), std::round(weight(rng))});
    used.insert({p, static_cast<int>(v)});
  }
  std::uniform_int_distribution<int> any(0, static_cast<int>(n) - 1);
  for (std::size_t tries = 0; extra > 0 && tries < 200; ++tries) {
    int a = any(rng), b = any(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!used.insert({a, b}).second) continue;
    edges.push_back({a, b, std::round(weight(rng))});
    --extra;
  }
  return PatrolGraph(n, edges);
}

// Minimum over every simple path from a to b, by exhaustive DFS.
inline double enumerate_paths_distance(const PatrolGraph& g, VertexId a, VertexId b) {
  if (a == b) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> on_path(g.vertex_count(), false);
  std::function<void(VertexId, double)> dfs = [&](VertexId v, double len) {
    if (v == b) {
      best = std::min(best, len);
      return;
    }
    on_path[v] = true;
    for (const Edge& e : g.edges()) {
      VertexId next = -1;
      if (e.u == v) next = e.v;
      if (e.v == v) next = e.u;
      if (next >= 0 && !on_path[next]) dfs(next, len + e.weight);
    }
    on_path[v] = false;
  };
  dfs(a, 0.0);
  return best;
}

inline bool agent_at(const TraceFrame& frame, VertexId v) {
  for (const GraphPosition& p : frame.positions) {
    if (const auto* at = std::get_if<AtVertex>(&p); at != nullptr && at->v == v) return true;
  }
  return false;
}

// Success iff no agent stands on v in frames k .. k + tau_steps - 1.
inline bool brute_success(const PatrolTrace& trace, VertexId v, std::size_t k,
                          std::size_t tau_steps) {
  for (std::size_t j = k; j < k + tau_steps; ++j) {
    if (agent_at(trace.frames.at(j), v)) return false;
  }
  return true;
}

// First (frame, vertex) in scan order whose attack succeeds, frames 0..last.
inline std::optional<std::pair<std::size_t, VertexId>> brute_first_window(
    const PatrolTrace& trace, std::size_t last, std::size_t tau_steps) {
  for (std::size_t k = 0; k <= last; ++k) {
    for (std::size_t v = 0; v < trace.vertex_count; ++v) {
      if (brute_success(trace, static_cast<VertexId>(v), k, tau_steps)) {
        return std::make_pair(k, static_cast<VertexId>(v));
      }
    }
  }
  return std::nullopt;
}

// A trace with one parked agent whose visits are given directly as
// idleness rows; idleness 0 marks a visit.
inline PatrolTrace idleness_trace(const std::vector<std::vector<double>>& rows, double dt = 1.0) {
  PatrolTrace trace;
  trace.graph_hash = "test";
  trace.dt = dt;
  trace.vertex_count = rows.front().size();
  trace.agent_count = 1;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    trace.frames.push_back({static_cast<double>(k) * dt, {AtVertex{0}}, rows[k]});
  }
  return trace;
}

// Idleness rows for n vertices over `frames` frames where vertex v is
// visited exactly at the listed frames and accumulates otherwise.
inline std::vector<std::vector<double>> rows_from_visits(
    std::size_t n, std::size_t frames, const std::vector<std::vector<std::size_t>>& visits,
    double start_idleness = 50.0) {
  std::vector<std::vector<double>> rows(frames, std::vector<double>(n));
  for (std::size_t v = 0; v < n; ++v) {
    double idl = start_idleness;
    for (std::size_t k = 0; k < frames; ++k) {
      const auto& vv = visits.at(v);
      if (std::find(vv.begin(), vv.end(), k) != vv.end()) {
        idl = 0.0;
      } else if (k > 0) {
        idl += 1.0;
      }
      rows[k][v] = idl;
    }
  }
  return rows;
}

}  // namespace redpatrol::testing
