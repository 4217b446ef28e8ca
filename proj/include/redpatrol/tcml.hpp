#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "redpatrol/graph.hpp"
#include "redpatrol/network.hpp"
#include "redpatrol/scenario.hpp"
#include "redpatrol/trace.hpp"

namespace redpatrol {

// Per-vertex (d, v, i) from a frame and its predecessor. Agent distances
// are clamped to at least dt; v is 0 without a previous frame. When
// `time_scale` is set, times are measured in units of it: d and v are
// multiplied by it and i is divided by it.
FeatureFrame compute_features(const PatrolGraph& g, const DistanceMatrix& dm,
                              const TraceFrame& frame, const TraceFrame* prev, double dt,
                              std::optional<double> time_scale);

struct LabeledEntry {
  std::size_t frame = 0;
  VertexId vertex = 0;
  bool success = false;

  friend bool operator==(const LabeledEntry&, const LabeledEntry&) = default;
};

// Every observation of the scenario so far, with labels filled in once tau
// has elapsed after the frame. Visits are read from the idleness channel.
class ObservationBuffer {
 public:
  ObservationBuffer(std::size_t vertices, double dt, double tau);

  // Frame k is assumed to be at scenario time k * dt.
  void push(FeatureFrame features, std::span<const double> idleness);

  // Labels every frame with time <= t_elapsed - tau. Returns what is new.
  std::vector<LabeledEntry> advance_labels(double t_elapsed);

  std::size_t size() const { return features_.size(); }
  std::size_t labeled() const { return labels_.size(); }
  std::size_t vertex_count() const { return vertices_; }

  const FeatureFrame& features(std::size_t k) const { return features_.at(k); }
  // `length` frames ending at (and including) frame `last`.
  std::span<const FeatureFrame> window(std::size_t last, std::size_t length) const;
  // 1.0 / 0.0 per vertex; only for k < labeled().
  std::span<const double> labels(std::size_t k) const { return labels_.at(k); }
  std::optional<bool> label(std::size_t k, VertexId x) const;

 private:
  std::size_t vertices_;
  double dt_;
  std::size_t tau_steps_;
  std::vector<FeatureFrame> features_;
  std::vector<std::vector<double>> labels_;
  std::vector<std::deque<std::size_t>> pending_visits_;  // per vertex, ascending
};

struct ArmingConfig {
  std::size_t buffer_depth = 100;  // K
  double threshold = 0.999;
  double attack_threshold = 0.5;
};

struct ArmingState {
  ArmingConfig config;
  std::deque<std::vector<double>> outputs;
  std::size_t positive = 0;  // buffered vectors whose max exceeds attack_threshold
  bool armed = false;
  double p_hat = 0.0;
  double launch_probability = 0.0;
};

// Probability of at least one predicted attack in `steps` independent
// timesteps: 1 - (1 - p_hat)^steps.
double launch_probability(double p_hat, long steps);

// max(0, floor((T - tau - t_elapsed) / dt)).
long remaining_attack_steps(double t_elapsed, double horizon, double tau, double dt);

void update_arming(ArmingState& state, std::span<const double> output, double t_elapsed,
                   double horizon, double tau, double dt);

struct TcmlConfig {
  double learning_rate = 0.001;
  std::size_t minibatch = 4;
  std::size_t hidden = 6;
  double slope = 0.3;
  double l1 = 0.1;
  std::size_t window = 10;  // t_obs, frames
  std::size_t output_buffer = 100;
  double arming_threshold = 0.999;
  double attack_threshold = 0.5;
  bool scale_features = true;
  // D2 starts as the identity instead of Glorot, so each vertex's output
  // initially depends only on its own D1 value.
  bool identity_d2 = true;
};

// Replaces the network's prediction; used to test the decision logic.
using Predictor = std::function<std::vector<double>(std::span<const FeatureFrame> window)>;

// Learns online from scratch while it watches, arms once past T/2 when the
// chance of it attacking in the remaining time drops below the threshold,
// then attacks the most promising vertex predicted to succeed.
class TcmlAdversary final : public Adversary {
 public:
  TcmlAdversary(const PatrolGraph& g, const DistanceMatrix& dm, ScenarioParams params,
                TcmlConfig config, std::uint64_t seed, Predictor predictor = {});

  AdversaryDecision observe(const TraceFrame& frame) override;

  const NetworkParams& network() const { return params_; }
  const ObservationBuffer& buffer() const { return buffer_; }
  const ArmingState& arming() const { return arming_; }
  std::size_t training_steps() const { return training_steps_; }
  double last_loss() const { return last_loss_; }

 private:
  void train();

  const PatrolGraph& graph_;
  const DistanceMatrix& dm_;
  ScenarioParams scenario_;
  TcmlConfig config_;
  std::mt19937_64 rng_;
  Predictor predictor_;
  NetworkParams params_;
  AdamState adam_;
  ObservationBuffer buffer_;
  ArmingState arming_;
  std::optional<TraceFrame> prev_;
  std::size_t frames_seen_ = 0;
  std::size_t training_steps_ = 0;
  double last_loss_ = 0.0;
};

}  // namespace redpatrol
