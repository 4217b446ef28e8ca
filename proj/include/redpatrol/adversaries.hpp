#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string_view>
#include <vector>

#include "redpatrol/graph.hpp"
#include "redpatrol/scenario.hpp"
#include "redpatrol/tcml.hpp"
#include "redpatrol/trace.hpp"

namespace redpatrol {

enum class AdversaryKind { Random, Deterministic, FullKnowledge, Probabilistic, Tcml };

std::string_view to_string(AdversaryKind kind);
AdversaryKind parse_adversary(std::string_view name);
const std::vector<AdversaryKind>& all_adversaries();

// Attacks a uniformly drawn vertex at a uniformly drawn grid time in
// [0, T - tau]. Both draws happen at construction.
class RandomAdversary final : public Adversary {
 public:
  RandomAdversary(std::size_t vertices, const ScenarioParams& params, std::uint64_t seed);
  AdversaryDecision observe(const TraceFrame& frame) override;

  VertexId planned_vertex() const { return vertex_; }
  std::size_t planned_frame() const { return launch_frame_; }

 private:
  VertexId vertex_ = 0;
  std::size_t launch_frame_ = 0;
  std::size_t frame_ = 0;
};

// Attacks the first vertex seen being left (idleness 0 -> positive),
// lowest id among simultaneous departures.
class DeterministicAdversary final : public Adversary {
 public:
  explicit DeterministicAdversary(const ScenarioParams& params) : params_(params) {}
  AdversaryDecision observe(const TraceFrame& frame) override;

 private:
  ScenarioParams params_;
  std::vector<double> prev_idleness_;
  std::size_t frame_ = 0;
  bool done_ = false;
};

// Reads the recorded future: attacks at the first grid time (then lowest
// vertex id) where an attack would succeed. Theoretical upper bound.
class FullKnowledgeAdversary final : public Adversary {
 public:
  FullKnowledgeAdversary(const PatrolTrace& trace, const ScenarioParams& params);
  AdversaryDecision observe(const TraceFrame& frame) override;

  std::optional<std::pair<std::size_t, VertexId>> plan() const { return plan_; }

 private:
  std::optional<std::pair<std::size_t, VertexId>> plan_;  // (frame, vertex)
  std::size_t frame_ = 0;
};

struct ProbabilisticConfig {
  double idleness_bin_fraction = 0.5;  // bin width as a fraction of tau
  double idleness_cap_fraction = 4.0;  // last bin starts at this many tau
  double distance_bin_width = 0.25;
  double distance_cap = 2.0;
  std::size_t min_samples = 5;
  double success_threshold = 0.5;
  ArmingConfig arming;
};

// Frequency model over discretized (idleness, distance-metric) states per
// vertex, trained with the same delayed labels as the TCML adversary and
// gated by the same arming rule.
class ProbabilisticAdversary final : public Adversary {
 public:
  ProbabilisticAdversary(const PatrolGraph& g, const DistanceMatrix& dm, ScenarioParams params,
                         ProbabilisticConfig config = {});

  AdversaryDecision observe(const TraceFrame& frame) override;

  struct BinCounts {
    std::size_t samples = 0;
    std::size_t successes = 0;
    double rate() const {
      return samples == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(samples);
    }
  };

  std::size_t idleness_bin(double idleness) const;
  std::size_t distance_bin(double distance) const;
  std::size_t bins_per_vertex() const { return idleness_bins_ * distance_bins_; }
  const BinCounts& counts(VertexId v, std::size_t bin) const;
  // Bin index of (vertex, frame) as observed.
  std::size_t observed_bin(std::size_t frame, VertexId v) const {
    return observed_bins_.at(frame).at(static_cast<std::size_t>(v));
  }
  const ArmingState& arming() const { return arming_; }

 private:
  const PatrolGraph& graph_;
  const DistanceMatrix& dm_;
  ScenarioParams scenario_;
  ProbabilisticConfig config_;
  std::size_t idleness_bins_;
  std::size_t distance_bins_;
  ObservationBuffer buffer_;
  std::vector<std::vector<std::size_t>> observed_bins_;  // [frame][vertex]
  std::vector<BinCounts> counts_;                         // [vertex * bins + bin]
  ArmingState arming_;
  std::size_t frame_ = 0;
};

struct AdversaryConfig {
  TcmlConfig tcml;
  ProbabilisticConfig probabilistic;
};

// Builds a single-use adversary for one scenario over `trace` (the full
// trace is only read by the full-knowledge model).
std::unique_ptr<Adversary> make_adversary(AdversaryKind kind, const PatrolGraph& g,
                                          const DistanceMatrix& dm, const PatrolTrace& trace,
                                          const ScenarioParams& params,
                                          const AdversaryConfig& config, std::uint64_t seed);

AttackRecord run_adversary(AdversaryKind kind, const PatrolGraph& g, const DistanceMatrix& dm,
                           const PatrolTrace& trace, const ScenarioParams& params,
                           const AdversaryConfig& config, std::uint64_t seed);

}  // namespace redpatrol
