#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace redpatrol {

using VertexId = int;

struct Edge {
  VertexId u = 0;
  VertexId v = 0;
  double weight = 0.0;  // travel time, seconds

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
  VertexId vertex = 0;
  double weight = 0.0;
};

// Undirected, connected, positively weighted patrol graph over dense vertex
// ids 0..n-1. Immutable once constructed; the constructor validates.
class PatrolGraph {
 public:
  PatrolGraph(std::size_t vertex_count, std::vector<Edge> edges,
              std::vector<std::array<double, 2>> coords = {});

  std::size_t vertex_count() const { return vertex_count_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::array<double, 2>>& coords() const { return coords_; }

  // Sorted by vertex id.
  const std::vector<Neighbor>& neighbors(VertexId v) const { return adjacency_.at(v); }

  std::optional<double> weight(VertexId u, VertexId v) const;
  bool has_edge(VertexId u, VertexId v) const { return weight(u, v).has_value(); }
  bool contains(VertexId v) const {
    return v >= 0 && static_cast<std::size_t>(v) < vertex_count_;
  }

  // Stable content hash (hex) of the canonical JSON form.
  std::string hash() const;

  std::string to_json() const;

 private:
  std::size_t vertex_count_;
  std::vector<Edge> edges_;
  std::vector<std::array<double, 2>> coords_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

// Parses the JSON graph format: {"vertices": n, "edges": [[u, v, w], ...],
// "coords": [[x, y], ...]}. Throws ParseError or ValidationError.
PatrolGraph load_graph(std::string_view text);
PatrolGraph load_graph_file(const std::string& path);

struct AtVertex {
  VertexId v = 0;
  friend bool operator==(const AtVertex&, const AtVertex&) = default;
};

// Strictly inside edge (u, v); s is the travel time already covered from u.
struct OnEdge {
  VertexId u = 0;
  VertexId v = 0;
  double s = 0.0;
  friend bool operator==(const OnEdge&, const OnEdge&) = default;
};

using GraphPosition = std::variant<AtVertex, OnEdge>;

// Throws ValidationError if p is not a valid position on g.
void validate_position(const PatrolGraph& g, const GraphPosition& p);

// Shortest-path travel times between all vertex pairs.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(std::size_t n)
      : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double operator()(VertexId a, VertexId b) const {
    return data_[static_cast<std::size_t>(a) * n_ + static_cast<std::size_t>(b)];
  }
  double& at(VertexId a, VertexId b) {
    return data_[static_cast<std::size_t>(a) * n_ + static_cast<std::size_t>(b)];
  }

 private:
  std::size_t n_;
  std::vector<double> data_;
};

DistanceMatrix all_pairs_shortest_paths(const PatrolGraph& g);

// Travel time from an agent position to vertex x, following the graph
// metric in either direction along the current edge.
double position_distance(const PatrolGraph& g, const DistanceMatrix& dm,
                         const GraphPosition& p, VertexId x);

// Vertex sequence a..b along a shortest path; ties resolve to the lowest-id
// next hop so the route is deterministic.
std::vector<VertexId> shortest_route(const PatrolGraph& g, const DistanceMatrix& dm,
                                     VertexId a, VertexId b);

}  // namespace redpatrol
