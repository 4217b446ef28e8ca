#include "redpatrol/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "redpatrol/error.hpp"

namespace redpatrol {

namespace {

constexpr VertexId kNoIntention = -1;

// Arrival tolerance so accumulated float steps do not leave a sliver of edge.
bool reaches(double covered, double weight) { return covered >= weight - 1e-9 * weight; }

}  // namespace

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Rand: return "rand";
    case StrategyKind::Greedy: return "greedy";
    case StrategyKind::Cyclic: return "cyclic";
  }
  return "unknown";
}

StrategyKind parse_strategy(std::string_view name) {
  if (name == "rand") return StrategyKind::Rand;
  if (name == "greedy") return StrategyKind::Greedy;
  if (name == "cyclic") return StrategyKind::Cyclic;
  throw ValidationError(
      fmt::format("unknown strategy '{}' (expected rand, greedy, cyclic)", name));
}

void validate(const PatrolGraph& g, const SimConfig& cfg) {
  if (cfg.agents < 1) throw ValidationError("agent count must be at least 1");
  if (static_cast<std::size_t>(cfg.agents) > g.vertex_count()) {
    throw ValidationError(fmt::format("{} agents exceed {} vertices", cfg.agents,
                                      g.vertex_count()));
  }
  if (!(cfg.dt > 0.0)) throw ValidationError("dt must be positive");
  if (!(cfg.duration > 0.0)) throw ValidationError("duration must be positive");
  try {
    steps_of(cfg.duration, cfg.dt);
  } catch (const RangeError& e) {
    throw ValidationError(e.what());
  }
  if (!cfg.placement.empty()) {
    if (cfg.placement.size() != static_cast<std::size_t>(cfg.agents)) {
      throw ValidationError(fmt::format("placement lists {} vertices for {} agents",
                                        cfg.placement.size(), cfg.agents));
    }
    for (VertexId v : cfg.placement) {
      if (!g.contains(v)) throw ValidationError(fmt::format("placement vertex {} unknown", v));
    }
  }
}

std::vector<VertexId> cyclic_tour(const PatrolGraph& g, const DistanceMatrix& dm) {
  const auto n = g.vertex_count();
  std::vector<bool> visited(n, false);
  std::vector<VertexId> stops{0};
  visited[0] = true;
  for (std::size_t added = 1; added < n; ++added) {
    const VertexId cur = stops.back();
    VertexId best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < n; ++x) {
      if (!visited[x] && dm(cur, x) < best_d) {
        best_d = dm(cur, x);
        best = static_cast<VertexId>(x);
      }
    }
    visited[best] = true;
    stops.push_back(best);
  }
  stops.push_back(0);

  std::vector<VertexId> walk{0};
  for (std::size_t i = 0; i + 1 < stops.size(); ++i) {
    auto leg = shortest_route(g, dm, stops[i], stops[i + 1]);
    walk.insert(walk.end(), leg.begin() + 1, leg.end());
  }
  return walk;
}

std::vector<VertexId> cyclic_tour(const PatrolGraph& g) {
  return cyclic_tour(g, all_pairs_shortest_paths(g));
}

double tour_length(const PatrolGraph& g, const std::vector<VertexId>& walk) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < walk.size(); ++i) total += *g.weight(walk[i], walk[i + 1]);
  return total;
}

VertexId strategy_decide(StrategyKind kind, const AgentState& agent, const WorldState& world,
                         const PatrolGraph& g, const std::vector<VertexId>* tour, Rng& rng) {
  const VertexId here = std::get<AtVertex>(agent.position).v;
  const auto& nbs = g.neighbors(here);

  switch (kind) {
    case StrategyKind::Rand: {
      std::vector<VertexId> free;
      for (const Neighbor& nb : nbs) {
        bool intended = false;
        for (const AgentState& other : world.agents) {
          if (other.id != agent.id && other.intention == nb.vertex) {
            intended = true;
            break;
          }
        }
        if (!intended) free.push_back(nb.vertex);
      }
      if (free.empty()) {
        for (const Neighbor& nb : nbs) free.push_back(nb.vertex);
      }
      std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
      return free[pick(rng)];
    }
    case StrategyKind::Greedy: {
      VertexId best = nbs.front().vertex;
      for (const Neighbor& nb : nbs) {
        if (world.idleness[nb.vertex] > world.idleness[best]) best = nb.vertex;
      }
      return best;
    }
    case StrategyKind::Cyclic: {
      // The closing vertex repeats the first, so the cycle has size()-1 stops.
      const std::size_t cycle = tour->size() - 1;
      return (*tour)[(agent.tour_index + 1) % cycle];
    }
  }
  return here;
}

Simulator::Simulator(const PatrolGraph& g, SimConfig cfg, DecisionHook hook)
    : graph_(g), cfg_(std::move(cfg)), rng_(cfg_.seed), hook_(std::move(hook)) {
  validate(graph_, cfg_);
  const auto n = graph_.vertex_count();
  world_.idleness.assign(n, 0.0);
  world_.agents.resize(static_cast<std::size_t>(cfg_.agents));

  std::vector<VertexId> start(static_cast<std::size_t>(cfg_.agents));
  if (cfg_.strategy == StrategyKind::Cyclic) {
    tour_ = cyclic_tour(graph_);
    const std::size_t cycle = tour_.size() - 1;
    std::vector<double> offset(cycle, 0.0);
    for (std::size_t i = 1; i < cycle; ++i) {
      offset[i] = offset[i - 1] + *graph_.weight(tour_[i - 1], tour_[i]);
    }
    const double length = tour_length(graph_, tour_);
    for (int a = 0; a < cfg_.agents; ++a) {
      const double want = length * a / cfg_.agents;
      std::size_t best = 0;
      for (std::size_t i = 1; i < cycle; ++i) {
        if (std::abs(offset[i] - want) < std::abs(offset[best] - want)) best = i;
      }
      world_.agents[a].tour_index = best;
      start[a] = tour_[best];
    }
  } else if (!cfg_.placement.empty()) {
    start = cfg_.placement;
  } else {
    std::vector<VertexId> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng_);
    std::copy_n(all.begin(), cfg_.agents, start.begin());
  }

  for (int a = 0; a < cfg_.agents; ++a) {
    AgentState& agent = world_.agents[a];
    agent.id = a;
    agent.position = AtVertex{start[a]};
    agent.target = agent.intention = kNoIntention;
  }
  for (AgentState& agent : world_.agents) decide(agent);
}

void Simulator::decide(AgentState& agent) {
  const VertexId next = strategy_decide(cfg_.strategy, agent, world_, graph_, &tour_, rng_);
  if (hook_) hook_(agent, world_, next);
  if (cfg_.strategy == StrategyKind::Cyclic) {
    agent.tour_index = (agent.tour_index + 1) % (tour_.size() - 1);
  }
  agent.target = agent.intention = next;
}

void Simulator::step() {
  const double dt = cfg_.dt;
  std::vector<bool> arrived(world_.agents.size(), false);

  for (std::size_t a = 0; a < world_.agents.size(); ++a) {
    AgentState& agent = world_.agents[a];
    double covered = dt;
    VertexId from = 0;
    if (const auto* at = std::get_if<AtVertex>(&agent.position)) {
      from = at->v;
    } else {
      const auto& on = std::get<OnEdge>(agent.position);
      from = on.u;
      covered += on.s;
    }
    const double w = *graph_.weight(from, agent.target);
    if (reaches(covered, w)) {
      agent.position = AtVertex{agent.target};
      arrived[a] = true;
    } else {
      agent.position = OnEdge{from, agent.target, covered};
    }
  }

  // Reached targets are no longer intentions.
  for (std::size_t a = 0; a < world_.agents.size(); ++a) {
    if (arrived[a]) world_.agents[a].intention = kNoIntention;
  }
  for (std::size_t a = 0; a < world_.agents.size(); ++a) {
    if (arrived[a]) decide(world_.agents[a]);
  }

  ++frame_;
  world_.time = static_cast<double>(frame_) * dt;
  std::vector<bool> occupied(world_.idleness.size(), false);
  for (const AgentState& agent : world_.agents) {
    if (const auto* at = std::get_if<AtVertex>(&agent.position)) occupied[at->v] = true;
  }
  for (std::size_t v = 0; v < occupied.size(); ++v) {
    world_.idleness[v] = occupied[v] ? 0.0 : world_.idleness[v] + dt;
  }
}

TraceFrame Simulator::frame() const {
  TraceFrame f;
  f.t = world_.time;
  f.idleness = world_.idleness;
  f.positions.reserve(world_.agents.size());
  for (const AgentState& agent : world_.agents) f.positions.push_back(agent.position);
  return f;
}

PatrolTrace run(const PatrolGraph& g, const SimConfig& cfg) {
  Simulator sim(g, cfg);
  const std::size_t steps = steps_of(cfg.duration, cfg.dt);
  PatrolTrace trace;
  trace.graph_hash = g.hash();
  trace.dt = cfg.dt;
  trace.vertex_count = g.vertex_count();
  trace.agent_count = static_cast<std::size_t>(cfg.agents);
  trace.frames.reserve(steps + 1);
  trace.frames.push_back(sim.frame());
  for (std::size_t k = 0; k < steps; ++k) {
    sim.step();
    trace.frames.push_back(sim.frame());
  }
  return trace;
}

}  // namespace redpatrol
