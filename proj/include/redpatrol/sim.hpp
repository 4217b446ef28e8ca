#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "redpatrol/graph.hpp"
#include "redpatrol/trace.hpp"

namespace redpatrol {

// rand: random neighbor avoiding broadcast intentions.
// greedy: highest-idleness neighbor (adaptive, deterministic stand-in).
// cyclic: agents spaced along one nearest-neighbor tour (rigid stand-in).
enum class StrategyKind { Rand, Greedy, Cyclic };

std::string_view to_string(StrategyKind kind);
StrategyKind parse_strategy(std::string_view name);

using Rng = std::mt19937_64;

struct AgentState {
  int id = 0;
  GraphPosition position = AtVertex{0};
  VertexId target = 0;     // always adjacent to the last vertex visited
  VertexId intention = 0;  // broadcast; equals target
  std::size_t tour_index = 0;
};

struct WorldState {
  double time = 0.0;
  std::vector<AgentState> agents;
  std::vector<double> idleness;
};

struct SimConfig {
  StrategyKind strategy = StrategyKind::Rand;
  int agents = 1;
  double dt = 1.0;
  double duration = 0.0;
  std::uint64_t seed = 0;
  // Explicit start vertices; empty means seeded-random distinct vertices.
  // Ignored by the cyclic strategy, which spaces agents along its tour.
  std::vector<VertexId> placement;
};

void validate(const PatrolGraph& g, const SimConfig& cfg);

// Closed walk (first == last) through every vertex: nearest-neighbor stop
// order from vertex 0, consecutive stops joined by shortest routes.
std::vector<VertexId> cyclic_tour(const PatrolGraph& g, const DistanceMatrix& dm);
std::vector<VertexId> cyclic_tour(const PatrolGraph& g);

// Total travel time of a closed walk.
double tour_length(const PatrolGraph& g, const std::vector<VertexId>& walk);

// Next target for an agent standing on a vertex. Cyclic needs `tour`.
VertexId strategy_decide(StrategyKind kind, const AgentState& agent, const WorldState& world,
                         const PatrolGraph& g, const std::vector<VertexId>* tour, Rng& rng);

class Simulator {
 public:
  // Invoked on every decision with the world as the deciding agent saw it.
  using DecisionHook =
      std::function<void(const AgentState& agent, const WorldState& world, VertexId chosen)>;

  Simulator(const PatrolGraph& g, SimConfig cfg, DecisionHook hook = {});

  const WorldState& world() const { return world_; }
  std::size_t frame_count() const { return frame_; }
  TraceFrame frame() const;

  // Advances every agent by dt, lets arriving agents choose new targets in
  // id order, then updates idleness.
  void step();

 private:
  void decide(AgentState& agent);

  const PatrolGraph& graph_;
  SimConfig cfg_;
  std::vector<VertexId> tour_;
  Rng rng_;
  WorldState world_;
  std::size_t frame_ = 0;
  DecisionHook hook_;
};

// Frames at t = 0, dt, ..., duration. Deterministic in cfg (including seed).
PatrolTrace run(const PatrolGraph& g, const SimConfig& cfg);

}  // namespace redpatrol
