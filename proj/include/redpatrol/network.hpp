#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace redpatrol {

// Per-vertex network inputs at one timestep.
struct VertexFeatures {
  double distance = 0.0;  // d: sum of reciprocal agent distances
  double velocity = 0.0;  // v: sum of approach speed over distance
  double idleness = 0.0;  // i: idleness, optionally scaled by 1/tau

  friend bool operator==(const VertexFeatures&, const VertexFeatures&) = default;
};

struct FeatureFrame {
  std::vector<VertexFeatures> vertices;

  friend bool operator==(const FeatureFrame&, const FeatureFrame&) = default;
};

struct NetworkSpec {
  std::size_t vertices = 0;
  std::size_t window = 10;  // t_obs, frames per prediction
  std::size_t hidden = 6;
  double slope = 0.3;       // leakyReLU negative slope
  double l1 = 0.1;          // D2 weight penalty, divided by the D2 weight count

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// All weights in one flat vector so the optimizer and gradient checks can
// treat them uniformly. Layout, in order:
//   d0 hidden weights [hidden x 3], d0 hidden bias [hidden],
//   d0 output weights [hidden], d0 output bias [1],
//   d1 weights [window], d1 bias [1],
//   d2 weights [vertices x vertices] (row = output vertex), d2 bias [vertices].
class NetworkParams {
 public:
  explicit NetworkParams(NetworkSpec spec);

  static NetworkParams zeros(const NetworkSpec& spec) { return NetworkParams(spec); }
  // Uniform in +-sqrt(6 / (fan_in + fan_out)) per layer, zero biases.
  static NetworkParams glorot(const NetworkSpec& spec, std::mt19937_64& rng);

  const NetworkSpec& spec() const { return spec_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  std::span<double> d0_hidden_w() { return slice(0, spec_.hidden * 3); }
  std::span<double> d0_hidden_b() { return slice(off_d0hb_, spec_.hidden); }
  std::span<double> d0_out_w() { return slice(off_d0ow_, spec_.hidden); }
  double& d0_out_b() { return values_[off_d0ob_]; }
  std::span<double> d1_w() { return slice(off_d1w_, spec_.window); }
  double& d1_b() { return values_[off_d1b_]; }
  std::span<double> d2_w() { return slice(off_d2w_, spec_.vertices * spec_.vertices); }
  std::span<double> d2_b() { return slice(off_d2b_, spec_.vertices); }

  std::span<const double> d0_hidden_w() const { return slice(0, spec_.hidden * 3); }
  std::span<const double> d0_hidden_b() const { return slice(off_d0hb_, spec_.hidden); }
  std::span<const double> d0_out_w() const { return slice(off_d0ow_, spec_.hidden); }
  double d0_out_b() const { return values_[off_d0ob_]; }
  std::span<const double> d1_w() const { return slice(off_d1w_, spec_.window); }
  double d1_b() const { return values_[off_d1b_]; }
  std::span<const double> d2_w() const {
    return slice(off_d2w_, spec_.vertices * spec_.vertices);
  }
  std::span<const double> d2_b() const { return slice(off_d2b_, spec_.vertices); }

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;

 private:
  std::span<double> slice(std::size_t off, std::size_t len) {
    return std::span<double>(values_).subspan(off, len);
  }
  std::span<const double> slice(std::size_t off, std::size_t len) const {
    return std::span<const double>(values_).subspan(off, len);
  }

  NetworkSpec spec_;
  std::size_t off_d0hb_, off_d0ow_, off_d0ob_, off_d1w_, off_d1b_, off_d2w_, off_d2b_;
  std::vector<double> values_;
};

// Success prediction in (0, 1) per vertex from `window` consecutive frames,
// oldest first. Throws ShapeError on mismatched sizes.
std::vector<double> forward(const NetworkParams& params, std::span<const FeatureFrame> window);

struct Sample {
  std::span<const FeatureFrame> window;
  std::span<const double> labels;  // 1 = attack would succeed, per vertex
};

struct LossAndGradients {
  double loss = 0.0;
  NetworkParams gradients;
};

// Mean binary cross-entropy over batch and vertices plus the D2 l1 penalty,
// with exact gradients. Predictions are clamped to [1e-7, 1 - 1e-7].
LossAndGradients loss_and_gradients(const NetworkParams& params, std::span<const Sample> batch);

struct AdamState {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<double> m;
  std::vector<double> v;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

void adam_step(NetworkParams& params, const NetworkParams& gradients, AdamState& state);

}  // namespace redpatrol
