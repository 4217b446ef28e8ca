#include "redpatrol/tcml.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "redpatrol/error.hpp"

namespace redpatrol {

FeatureFrame compute_features(const PatrolGraph& g, const DistanceMatrix& dm,
                              const TraceFrame& frame, const TraceFrame* prev, double dt,
                              std::optional<double> time_scale) {
  const std::size_t n = g.vertex_count();
  if (frame.idleness.size() != n) {
    throw ShapeError(fmt::format("frame has {} idleness values for {} vertices",
                                 frame.idleness.size(), n));
  }
  if (prev != nullptr && prev->positions.size() != frame.positions.size()) {
    throw ShapeError("agent count changed between frames");
  }
  FeatureFrame out;
  out.vertices.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    VertexFeatures& f = out.vertices[x];
    for (std::size_t a = 0; a < frame.positions.size(); ++a) {
      const double now =
          std::max(position_distance(g, dm, frame.positions[a], static_cast<VertexId>(x)), dt);
      f.distance += 1.0 / now;
      if (prev != nullptr) {
        const double before = std::max(
            position_distance(g, dm, prev->positions[a], static_cast<VertexId>(x)), dt);
        f.velocity += ((before - now) / dt) / now;
      }
    }
    f.idleness = frame.idleness[x];
    if (time_scale) {
      f.distance *= *time_scale;
      f.velocity *= *time_scale;
      f.idleness /= *time_scale;
    }
  }
  return out;
}

ObservationBuffer::ObservationBuffer(std::size_t vertices, double dt, double tau)
    : vertices_(vertices),
      dt_(dt),
      tau_steps_(steps_of(tau, dt)),
      pending_visits_(vertices) {
  if (tau_steps_ == 0) throw ValidationError("tau must be at least one timestep");
}

void ObservationBuffer::push(FeatureFrame features, std::span<const double> idleness) {
  if (features.vertices.size() != vertices_ || idleness.size() != vertices_) {
    throw ShapeError("observation does not match the buffer's vertex count");
  }
  const std::size_t k = features_.size();
  for (std::size_t x = 0; x < vertices_; ++x) {
    if (is_visit(idleness[x])) pending_visits_[x].push_back(k);
  }
  features_.push_back(std::move(features));
}

std::vector<LabeledEntry> ObservationBuffer::advance_labels(double t_elapsed) {
  std::vector<LabeledEntry> fresh;
  const double frontier = (t_elapsed - static_cast<double>(tau_steps_) * dt_) / dt_;
  if (frontier < -1e-9) return fresh;
  const auto last = static_cast<std::size_t>(std::floor(frontier + 1e-9));
  for (std::size_t k = labels_.size(); k <= last; ++k) {
    if (k + tau_steps_ > features_.size()) {
      throw std::logic_error(
          fmt::format("labeling frame {} needs {} frames, only {} observed", k,
                      k + tau_steps_, features_.size()));
    }
    std::vector<double> row(vertices_);
    for (std::size_t x = 0; x < vertices_; ++x) {
      auto& visits = pending_visits_[x];
      while (!visits.empty() && visits.front() < k) visits.pop_front();
      const bool success = visits.empty() || visits.front() >= k + tau_steps_;
      row[x] = success ? 1.0 : 0.0;
      fresh.push_back({k, static_cast<VertexId>(x), success});
    }
    labels_.push_back(std::move(row));
  }
  return fresh;
}

std::span<const FeatureFrame> ObservationBuffer::window(std::size_t last,
                                                        std::size_t length) const {
  if (length == 0 || last >= features_.size() || last + 1 < length) {
    throw RangeError(fmt::format("window of {} frames ending at {} not available", length,
                                 last));
  }
  return std::span<const FeatureFrame>(features_).subspan(last + 1 - length, length);
}

std::optional<bool> ObservationBuffer::label(std::size_t k, VertexId x) const {
  if (k >= labels_.size()) return std::nullopt;
  return labels_[k].at(static_cast<std::size_t>(x)) > 0.5;
}

double launch_probability(double p_hat, long steps) {
  if (steps <= 0) return 0.0;
  return 1.0 - std::pow(1.0 - p_hat, static_cast<double>(steps));
}

long remaining_attack_steps(double t_elapsed, double horizon, double tau, double dt) {
  const double steps = std::floor((horizon - tau - t_elapsed) / dt + 1e-9);
  return std::max(0L, static_cast<long>(steps));
}

void update_arming(ArmingState& state, std::span<const double> output, double t_elapsed,
                   double horizon, double tau, double dt) {
  const double thr = state.config.attack_threshold;
  auto predicts_attack = [thr](const std::vector<double>& v) {
    return !v.empty() && *std::max_element(v.begin(), v.end()) > thr;
  };

  state.outputs.emplace_back(output.begin(), output.end());
  if (predicts_attack(state.outputs.back())) ++state.positive;
  while (state.outputs.size() > state.config.buffer_depth) {
    if (predicts_attack(state.outputs.front())) --state.positive;
    state.outputs.pop_front();
  }

  state.p_hat = static_cast<double>(state.positive) / static_cast<double>(state.outputs.size());
  state.launch_probability =
      launch_probability(state.p_hat, remaining_attack_steps(t_elapsed, horizon, tau, dt));
  if (!state.armed && t_elapsed >= horizon / 2.0 &&
      state.launch_probability < state.config.threshold) {
    state.armed = true;
  }
}

TcmlAdversary::TcmlAdversary(const PatrolGraph& g, const DistanceMatrix& dm,
                             ScenarioParams params, TcmlConfig config, std::uint64_t seed,
                             Predictor predictor)
    : graph_(g),
      dm_(dm),
      scenario_(params),
      config_(config),
      rng_(seed),
      predictor_(std::move(predictor)),
      params_(NetworkSpec{g.vertex_count(), config.window, config.hidden, config.slope,
                          config.l1}),
      buffer_(g.vertex_count(), params.dt, params.tau) {
  validate(scenario_);
  if (config_.window == 0 || config_.minibatch == 0 || config_.hidden == 0 ||
      config_.output_buffer == 0) {
    throw ValidationError("TCML window, minibatch, hidden size and output buffer must be > 0");
  }
  params_ = NetworkParams::glorot(params_.spec(), rng_);
  if (config_.identity_d2) {
    const std::size_t n = graph_.vertex_count();
    auto w = params_.d2_w();
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t x = 0; x < n; ++x) w[x * n + x] = 1.0;
  }
  adam_.learning_rate = config_.learning_rate;
  arming_.config = {config_.output_buffer, config_.arming_threshold, config_.attack_threshold};
}

void TcmlAdversary::train() {
  const std::size_t labeled = buffer_.labeled();
  if (labeled < config_.window) return;
  const std::size_t windows = labeled - config_.window + 1;
  if (windows < config_.minibatch) return;

  std::uniform_int_distribution<std::size_t> pick(config_.window - 1, labeled - 1);
  std::vector<Sample> batch;
  batch.reserve(config_.minibatch);
  for (std::size_t b = 0; b < config_.minibatch; ++b) {
    const std::size_t last = pick(rng_);
    batch.push_back({buffer_.window(last, config_.window), buffer_.labels(last)});
  }
  auto result = loss_and_gradients(params_, batch);
  adam_step(params_, result.gradients, adam_);
  last_loss_ = result.loss;
  ++training_steps_;
}

AdversaryDecision TcmlAdversary::observe(const TraceFrame& frame) {
  const double t_elapsed = static_cast<double>(frames_seen_) * scenario_.dt;
  ++frames_seen_;

  std::optional<double> scale;
  if (config_.scale_features) scale = scenario_.tau;
  buffer_.push(compute_features(graph_, dm_, frame, prev_ ? &*prev_ : nullptr, scenario_.dt,
                                scale),
               frame.idleness);
  prev_ = frame;

  buffer_.advance_labels(t_elapsed);
  train();

  if (buffer_.size() < config_.window) return Wait{};
  const auto window = buffer_.window(buffer_.size() - 1, config_.window);
  const std::vector<double> prediction = predictor_ ? predictor_(window) : forward(params_, window);
  if (prediction.size() != graph_.vertex_count()) {
    throw ShapeError("predictor output length differs from vertex count");
  }
  update_arming(arming_, prediction, t_elapsed, scenario_.horizon, scenario_.tau, scenario_.dt);

  const bool in_time = t_elapsed <= scenario_.last_launch() + 1e-9 * scenario_.dt;
  if (!arming_.armed || !in_time) return Wait{};
  const auto best = std::max_element(prediction.begin(), prediction.end());
  if (*best <= config_.attack_threshold) return Wait{};
  return Attack{static_cast<VertexId>(std::distance(prediction.begin(), best))};
}

}  // namespace redpatrol
