#include "redpatrol/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <utility>

#include <fmt/format.h>
#include <json.hpp>

#include "redpatrol/error.hpp"
#include "redpatrol/seed.hpp"

namespace redpatrol {

using nlohmann::json;

PatrolGraph::PatrolGraph(std::size_t vertex_count, std::vector<Edge> edges,
                         std::vector<std::array<double, 2>> coords)
    : vertex_count_(vertex_count),
      edges_(std::move(edges)),
      coords_(std::move(coords)),
      adjacency_(vertex_count) {
  if (vertex_count_ < 2) {
    throw ValidationError(
        fmt::format("graph needs at least 2 vertices, got {}", vertex_count_));
  }
  if (!coords_.empty() && coords_.size() != vertex_count_) {
    throw ValidationError(fmt::format("coords has {} entries for {} vertices",
                                      coords_.size(), vertex_count_));
  }

  std::set<std::pair<VertexId, VertexId>> seen;
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    if (!contains(e.u) || !contains(e.v)) {
      throw ValidationError(fmt::format("edge {} ({}, {}) references a vertex outside 0..{}",
                                        i, e.u, e.v, vertex_count_ - 1));
    }
    if (e.u == e.v) {
      throw ValidationError(fmt::format("edge {} is a self-loop on vertex {}", i, e.u));
    }
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw ValidationError(fmt::format("edge {} ({}, {}) has non-positive weight {}", i, e.u,
                                        e.v, e.weight));
    }
    auto key = std::minmax(e.u, e.v);
    if (!seen.insert(key).second) {
      throw ValidationError(fmt::format("edge {} ({}, {}) is a duplicate", i, e.u, e.v));
    }
    adjacency_[e.u].push_back({e.v, e.weight});
    adjacency_[e.v].push_back({e.u, e.weight});
  }
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.vertex < b.vertex; });
  }

  std::vector<bool> reached(vertex_count_, false);
  std::queue<VertexId> frontier;
  frontier.push(0);
  reached[0] = true;
  while (!frontier.empty()) {
    VertexId v = frontier.front();
    frontier.pop();
    for (const Neighbor& nb : adjacency_[v]) {
      if (!reached[nb.vertex]) {
        reached[nb.vertex] = true;
        frontier.push(nb.vertex);
      }
    }
  }
  auto it = std::find(reached.begin(), reached.end(), false);
  if (it != reached.end()) {
    throw ValidationError(fmt::format("graph is disconnected: vertex {} unreachable from 0",
                                      std::distance(reached.begin(), it)));
  }
}

std::optional<double> PatrolGraph::weight(VertexId u, VertexId v) const {
  if (!contains(u) || !contains(v)) return std::nullopt;
  const auto& list = adjacency_[u];
  auto it = std::lower_bound(list.begin(), list.end(), v,
                             [](const Neighbor& nb, VertexId id) { return nb.vertex < id; });
  if (it == list.end() || it->vertex != v) return std::nullopt;
  return it->weight;
}

std::string PatrolGraph::to_json() const {
  json j;
  j["vertices"] = vertex_count_;
  j["edges"] = json::array();
  for (const Edge& e : edges_) j["edges"].push_back({e.u, e.v, e.weight});
  if (!coords_.empty()) {
    j["coords"] = json::array();
    for (const auto& c : coords_) j["coords"].push_back({c[0], c[1]});
  }
  return j.dump();
}

std::string PatrolGraph::hash() const {
  // Coordinates are metadata and do not contribute.
  json j;
  j["vertices"] = vertex_count_;
  j["edges"] = json::array();
  for (const Edge& e : edges_) j["edges"].push_back({e.u, e.v, e.weight});
  return fmt::format("{:016x}", fnv1a(j.dump()));
}

PatrolGraph load_graph(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("graph: {}", e.what()));
  }
  if (!j.is_object()) throw ParseError("graph: top level must be a JSON object");
  if (!j.contains("vertices") || !j["vertices"].is_number_integer()) {
    throw ParseError("graph: 'vertices' must be an integer count");
  }
  if (j["vertices"].get<long long>() < 0) throw ParseError("graph: 'vertices' is negative");
  if (!j.contains("edges") || !j["edges"].is_array()) {
    throw ParseError("graph: 'edges' must be an array of [u, v, weight]");
  }

  std::vector<Edge> edges;
  std::size_t i = 0;
  for (const json& e : j["edges"]) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() ||
        !e[1].is_number_integer() || !e[2].is_number()) {
      throw ParseError(fmt::format("graph: edge {} is not [u, v, weight]", i));
    }
    edges.push_back({e[0].get<VertexId>(), e[1].get<VertexId>(), e[2].get<double>()});
    ++i;
  }

  std::vector<std::array<double, 2>> coords;
  if (j.contains("coords")) {
    if (!j["coords"].is_array()) throw ParseError("graph: 'coords' must be an array");
    i = 0;
    for (const json& c : j["coords"]) {
      if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number()) {
        throw ParseError(fmt::format("graph: coords entry {} is not [x, y]", i));
      }
      coords.push_back({c[0].get<double>(), c[1].get<double>()});
      ++i;
    }
  }
  return PatrolGraph(j["vertices"].get<std::size_t>(), std::move(edges), std::move(coords));
}

PatrolGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open graph file '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_graph(buffer.str());
}

void validate_position(const PatrolGraph& g, const GraphPosition& p) {
  if (const auto* at = std::get_if<AtVertex>(&p)) {
    if (!g.contains(at->v)) {
      throw ValidationError(fmt::format("position at unknown vertex {}", at->v));
    }
    return;
  }
  const auto& on = std::get<OnEdge>(p);
  auto w = g.weight(on.u, on.v);
  if (!w) throw ValidationError(fmt::format("position on non-edge ({}, {})", on.u, on.v));
  if (!(on.s > 0.0 && on.s < *w)) {
    throw ValidationError(fmt::format("position offset {} outside (0, {}) on edge ({}, {})",
                                      on.s, *w, on.u, on.v));
  }
}

DistanceMatrix all_pairs_shortest_paths(const PatrolGraph& g) {
  // Floyd-Warshall; patrol graphs have tens of vertices.
  const auto n = g.vertex_count();
  constexpr double inf = std::numeric_limits<double>::infinity();
  DistanceMatrix dm(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) dm.at(a, b) = (a == b) ? 0.0 : inf;
  }
  for (const Edge& e : g.edges()) {
    dm.at(e.u, e.v) = std::min(dm(e.u, e.v), e.weight);
    dm.at(e.v, e.u) = dm(e.u, e.v);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t a = 0; a < n; ++a) {
      const double dak = dm(a, k);
      if (dak == inf) continue;
      for (std::size_t b = 0; b < n; ++b) {
        const double via = dak + dm(k, b);
        if (via < dm(a, b)) dm.at(a, b) = via;
      }
    }
  }
  return dm;
}

double position_distance(const PatrolGraph& g, const DistanceMatrix& dm,
                         const GraphPosition& p, VertexId x) {
  if (const auto* at = std::get_if<AtVertex>(&p)) return dm(at->v, x);
  const auto& on = std::get<OnEdge>(p);
  const double w = *g.weight(on.u, on.v);
  return std::min(on.s + dm(on.u, x), (w - on.s) + dm(on.v, x));
}

std::vector<VertexId> shortest_route(const PatrolGraph& g, const DistanceMatrix& dm,
                                     VertexId a, VertexId b) {
  std::vector<VertexId> route{a};
  VertexId cur = a;
  while (cur != b) {
    const double remaining = dm(cur, b);
    const double tol = 1e-9 * std::max(1.0, remaining);
    VertexId next = -1;
    for (const Neighbor& nb : g.neighbors(cur)) {
      if (std::abs(nb.weight + dm(nb.vertex, b) - remaining) <= tol) {
        next = nb.vertex;
        break;
      }
    }
    route.push_back(next);
    cur = next;
  }
  return route;
}

}  // namespace redpatrol
