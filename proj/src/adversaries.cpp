#include "redpatrol/adversaries.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "redpatrol/error.hpp"

namespace redpatrol {

std::string_view to_string(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::Random: return "random";
    case AdversaryKind::Deterministic: return "deterministic";
    case AdversaryKind::FullKnowledge: return "full-knowledge";
    case AdversaryKind::Probabilistic: return "probabilistic";
    case AdversaryKind::Tcml: return "tcml";
  }
  return "unknown";
}

AdversaryKind parse_adversary(std::string_view name) {
  for (AdversaryKind kind : all_adversaries()) {
    if (to_string(kind) == name) return kind;
  }
  throw ValidationError(fmt::format(
      "unknown adversary '{}' (expected random, deterministic, full-knowledge, "
      "probabilistic, tcml)",
      name));
}

const std::vector<AdversaryKind>& all_adversaries() {
  static const std::vector<AdversaryKind> kinds{
      AdversaryKind::Random, AdversaryKind::Deterministic, AdversaryKind::FullKnowledge,
      AdversaryKind::Probabilistic, AdversaryKind::Tcml};
  return kinds;
}

RandomAdversary::RandomAdversary(std::size_t vertices, const ScenarioParams& params,
                                 std::uint64_t seed) {
  validate(params);
  std::mt19937_64 rng(seed);
  const std::size_t last = steps_of(params.horizon, params.dt) - steps_of(params.tau, params.dt);
  std::uniform_int_distribution<VertexId> pick_vertex(0, static_cast<VertexId>(vertices) - 1);
  std::uniform_int_distribution<std::size_t> pick_frame(0, last);
  vertex_ = pick_vertex(rng);
  launch_frame_ = pick_frame(rng);
}

AdversaryDecision RandomAdversary::observe(const TraceFrame&) {
  if (frame_++ == launch_frame_) return Attack{vertex_};
  return Wait{};
}

AdversaryDecision DeterministicAdversary::observe(const TraceFrame& frame) {
  const double t_elapsed = static_cast<double>(frame_++) * params_.dt;
  AdversaryDecision decision = Wait{};
  if (!done_ && !prev_idleness_.empty()) {
    for (std::size_t v = 0; v < frame.idleness.size(); ++v) {
      if (is_visit(prev_idleness_[v]) && !is_visit(frame.idleness[v])) {
        done_ = true;
        if (t_elapsed <= params_.last_launch() + 1e-9 * params_.dt) {
          decision = Attack{static_cast<VertexId>(v)};
        }
        break;
      }
    }
  }
  prev_idleness_ = frame.idleness;
  return decision;
}

FullKnowledgeAdversary::FullKnowledgeAdversary(const PatrolTrace& trace,
                                               const ScenarioParams& params) {
  validate(params);
  const std::size_t tau_steps = steps_of(params.tau, params.dt);
  const std::size_t last = steps_of(params.horizon, params.dt) - tau_steps;
  if (trace.frames.size() < last + tau_steps) {
    throw RangeError("full-knowledge adversary needs the trace through T - dt");
  }
  const std::size_t n = trace.vertex_count;
  const std::size_t span = last + tau_steps;
  // next_visit[v] after the backward sweep below holds the first visit at or
  // after the current frame, or `span` when there is none in range.
  std::vector<std::vector<std::size_t>> next(span + 1, std::vector<std::size_t>(n, span));
  for (std::size_t k = span; k-- > 0;) {
    for (std::size_t v = 0; v < n; ++v) {
      next[k][v] = is_visit(trace.frames[k].idleness[v]) ? k : next[k + 1][v];
    }
  }
  for (std::size_t k = 0; k <= last && !plan_; ++k) {
    for (std::size_t v = 0; v < n; ++v) {
      if (next[k][v] >= k + tau_steps) {
        plan_ = std::make_pair(k, static_cast<VertexId>(v));
        break;
      }
    }
  }
}

AdversaryDecision FullKnowledgeAdversary::observe(const TraceFrame&) {
  const std::size_t k = frame_++;
  if (plan_ && plan_->first == k) return Attack{plan_->second};
  return Wait{};
}

ProbabilisticAdversary::ProbabilisticAdversary(const PatrolGraph& g, const DistanceMatrix& dm,
                                               ScenarioParams params,
                                               ProbabilisticConfig config)
    : graph_(g),
      dm_(dm),
      scenario_(params),
      config_(config),
      idleness_bins_(static_cast<std::size_t>(
                         std::lround(config.idleness_cap_fraction / config.idleness_bin_fraction)) +
                     1),
      distance_bins_(
          static_cast<std::size_t>(std::lround(config.distance_cap / config.distance_bin_width)) +
          1),
      buffer_(g.vertex_count(), params.dt, params.tau),
      counts_(g.vertex_count() * idleness_bins_ * distance_bins_) {
  validate(scenario_);
  arming_.config = config_.arming;
  arming_.config.attack_threshold = config_.success_threshold;
}

std::size_t ProbabilisticAdversary::idleness_bin(double idleness) const {
  const double width = config_.idleness_bin_fraction * scenario_.tau;
  const auto bin = static_cast<std::size_t>(std::max(0.0, std::floor(idleness / width)));
  return std::min(bin, idleness_bins_ - 1);
}

std::size_t ProbabilisticAdversary::distance_bin(double distance) const {
  const auto bin =
      static_cast<std::size_t>(std::max(0.0, std::floor(distance / config_.distance_bin_width)));
  return std::min(bin, distance_bins_ - 1);
}

const ProbabilisticAdversary::BinCounts& ProbabilisticAdversary::counts(VertexId v,
                                                                        std::size_t bin) const {
  return counts_.at(static_cast<std::size_t>(v) * bins_per_vertex() + bin);
}

AdversaryDecision ProbabilisticAdversary::observe(const TraceFrame& frame) {
  const double t_elapsed = static_cast<double>(frame_++) * scenario_.dt;
  const std::size_t n = graph_.vertex_count();

  FeatureFrame features =
      compute_features(graph_, dm_, frame, nullptr, scenario_.dt, std::nullopt);
  std::vector<std::size_t> bins(n);
  for (std::size_t v = 0; v < n; ++v) {
    bins[v] = idleness_bin(frame.idleness[v]) * distance_bins_ +
              distance_bin(features.vertices[v].distance);
  }
  observed_bins_.push_back(bins);
  buffer_.push(std::move(features), frame.idleness);

  for (const LabeledEntry& e : buffer_.advance_labels(t_elapsed)) {
    auto& c = counts_[static_cast<std::size_t>(e.vertex) * bins_per_vertex() +
                      observed_bins_[e.frame][static_cast<std::size_t>(e.vertex)]];
    ++c.samples;
    if (e.success) ++c.successes;
  }

  // Score each vertex by the success rate of its current state, when that
  // state has enough labeled history to be trusted.
  std::vector<double> score(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    const BinCounts& c = counts_[v * bins_per_vertex() + bins[v]];
    if (c.samples >= config_.min_samples) score[v] = c.rate();
  }
  update_arming(arming_, score, t_elapsed, scenario_.horizon, scenario_.tau, scenario_.dt);

  const bool in_time = t_elapsed <= scenario_.last_launch() + 1e-9 * scenario_.dt;
  if (!arming_.armed || !in_time) return Wait{};
  const auto best = std::max_element(score.begin(), score.end());
  if (*best <= config_.success_threshold) return Wait{};
  return Attack{static_cast<VertexId>(std::distance(score.begin(), best))};
}

std::unique_ptr<Adversary> make_adversary(AdversaryKind kind, const PatrolGraph& g,
                                          const DistanceMatrix& dm, const PatrolTrace& trace,
                                          const ScenarioParams& params,
                                          const AdversaryConfig& config, std::uint64_t seed) {
  switch (kind) {
    case AdversaryKind::Random:
      return std::make_unique<RandomAdversary>(g.vertex_count(), params, seed);
    case AdversaryKind::Deterministic:
      return std::make_unique<DeterministicAdversary>(params);
    case AdversaryKind::FullKnowledge:
      return std::make_unique<FullKnowledgeAdversary>(trace, params);
    case AdversaryKind::Probabilistic:
      return std::make_unique<ProbabilisticAdversary>(g, dm, params, config.probabilistic);
    case AdversaryKind::Tcml:
      return std::make_unique<TcmlAdversary>(g, dm, params, config.tcml, seed);
  }
  throw ValidationError("unknown adversary kind");
}

AttackRecord run_adversary(AdversaryKind kind, const PatrolGraph& g, const DistanceMatrix& dm,
                           const PatrolTrace& trace, const ScenarioParams& params,
                           const AdversaryConfig& config, std::uint64_t seed) {
  if (trace.vertex_count != g.vertex_count()) {
    throw ValidationError(fmt::format("trace has {} vertices, graph has {}", trace.vertex_count,
                                      g.vertex_count()));
  }
  auto adversary = make_adversary(kind, g, dm, trace, params, config, seed);
  return run_scenario(*adversary, trace, params);
}

}  // namespace redpatrol
