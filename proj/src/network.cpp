#include "redpatrol/network.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "redpatrol/error.hpp"

namespace redpatrol {

namespace {

constexpr double kProbClamp = 1e-7;

inline double leaky(double z, double slope) { return z > 0.0 ? z : slope * z; }
inline double leaky_grad(double z, double slope) { return z > 0.0 ? 1.0 : slope; }
inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Intermediate activations of one window, kept for the backward pass.
struct Activations {
  std::size_t n = 0, window = 0, hidden = 0;
  std::vector<double> z1;   // [n][window][hidden] d0 hidden pre-activation
  std::vector<double> z2;   // [n][window] d0 output pre-activation
  std::vector<double> s;    // [n][window] d0 output
  std::vector<double> z3;   // [n] d1 pre-activation
  std::vector<double> u;    // [n] d1 output
  std::vector<double> p;    // [n] sigmoid output
};

void check_window(const NetworkParams& params, std::span<const FeatureFrame> window) {
  const auto& spec = params.spec();
  if (window.size() != spec.window) {
    throw ShapeError(fmt::format("window has {} frames, network expects {}", window.size(),
                                 spec.window));
  }
  for (const FeatureFrame& f : window) {
    if (f.vertices.size() != spec.vertices) {
      throw ShapeError(fmt::format("frame has {} vertices, network expects {}",
                                   f.vertices.size(), spec.vertices));
    }
  }
}

void run_forward(const NetworkParams& params, std::span<const FeatureFrame> window,
                 Activations& act) {
  const auto& spec = params.spec();
  const std::size_t n = spec.vertices, t_obs = spec.window, h = spec.hidden;
  act.n = n;
  act.window = t_obs;
  act.hidden = h;
  act.z1.resize(n * t_obs * h);
  act.z2.resize(n * t_obs);
  act.s.resize(n * t_obs);
  act.z3.resize(n);
  act.u.resize(n);
  act.p.resize(n);

  const auto w0 = params.d0_hidden_w();
  const auto b0 = params.d0_hidden_b();
  const auto w0o = params.d0_out_w();
  const double b0o = params.d0_out_b();
  const auto w1 = params.d1_w();
  const double b1 = params.d1_b();

  for (std::size_t x = 0; x < n; ++x) {
    double z3 = b1;
    for (std::size_t j = 0; j < t_obs; ++j) {
      const VertexFeatures& f = window[j].vertices[x];
      double* z1 = &act.z1[(x * t_obs + j) * h];
      double z2 = b0o;
      for (std::size_t k = 0; k < h; ++k) {
        z1[k] = w0[3 * k] * f.distance + w0[3 * k + 1] * f.velocity +
                w0[3 * k + 2] * f.idleness + b0[k];
        z2 += w0o[k] * leaky(z1[k], spec.slope);
      }
      act.z2[x * t_obs + j] = z2;
      const double s = leaky(z2, spec.slope);
      act.s[x * t_obs + j] = s;
      z3 += w1[j] * s;
    }
    act.z3[x] = z3;
    act.u[x] = leaky(z3, spec.slope);
  }

  const auto w2 = params.d2_w();
  const auto b2 = params.d2_b();
  for (std::size_t y = 0; y < n; ++y) {
    double z4 = b2[y];
    for (std::size_t x = 0; x < n; ++x) z4 += w2[y * n + x] * act.u[x];
    act.p[y] = sigmoid(z4);
  }
}

std::size_t parameter_count(const NetworkSpec& spec) {
  return spec.hidden * 3 + spec.hidden + spec.hidden + 1 + spec.window + 1 +
         spec.vertices * spec.vertices + spec.vertices;
}

}  // namespace

NetworkParams::NetworkParams(NetworkSpec spec)
    : spec_(spec), values_(parameter_count(spec), 0.0) {
  off_d0hb_ = spec_.hidden * 3;
  off_d0ow_ = off_d0hb_ + spec_.hidden;
  off_d0ob_ = off_d0ow_ + spec_.hidden;
  off_d1w_ = off_d0ob_ + 1;
  off_d1b_ = off_d1w_ + spec_.window;
  off_d2w_ = off_d1b_ + 1;
  off_d2b_ = off_d2w_ + spec_.vertices * spec_.vertices;
}

NetworkParams NetworkParams::glorot(const NetworkSpec& spec, std::mt19937_64& rng) {
  NetworkParams params(spec);
  auto fill = [&rng](std::span<double> w, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& x : w) x = dist(rng);
  };
  fill(params.d0_hidden_w(), 3, spec.hidden);
  fill(params.d0_out_w(), spec.hidden, 1);
  fill(params.d1_w(), spec.window, 1);
  fill(params.d2_w(), spec.vertices, spec.vertices);
  return params;
}

std::vector<double> forward(const NetworkParams& params, std::span<const FeatureFrame> window) {
  check_window(params, window);
  Activations act;
  run_forward(params, window, act);
  return act.p;
}

LossAndGradients loss_and_gradients(const NetworkParams& params, std::span<const Sample> batch) {
  const auto& spec = params.spec();
  const std::size_t n = spec.vertices, t_obs = spec.window, h = spec.hidden;
  if (batch.empty()) throw ShapeError("empty minibatch");

  LossAndGradients out{0.0, NetworkParams::zeros(spec)};
  NetworkParams& g = out.gradients;
  auto gw0 = g.d0_hidden_w();
  auto gb0 = g.d0_hidden_b();
  auto gw0o = g.d0_out_w();
  auto gw1 = g.d1_w();
  auto gw2 = g.d2_w();
  auto gb2 = g.d2_b();

  const auto w0o = params.d0_out_w();
  const auto w1 = params.d1_w();
  const auto w2 = params.d2_w();

  const double scale = 1.0 / static_cast<double>(batch.size() * n);
  Activations act;
  std::vector<double> dz4(n), du(n);

  for (const Sample& sample : batch) {
    check_window(params, sample.window);
    if (sample.labels.size() != n) {
      throw ShapeError(fmt::format("{} labels for {} vertices", sample.labels.size(), n));
    }
    run_forward(params, sample.window, act);

    for (std::size_t y = 0; y < n; ++y) {
      const double label = sample.labels[y];
      const double raw = act.p[y];
      const double p = std::clamp(raw, kProbClamp, 1.0 - kProbClamp);
      out.loss -= scale * (label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
      // d(BCE)/dz through the sigmoid is p - label; zero where the clamp is active.
      dz4[y] = (p == raw) ? scale * (raw - label) : 0.0;
    }

    std::fill(du.begin(), du.end(), 0.0);
    for (std::size_t y = 0; y < n; ++y) {
      gb2[y] += dz4[y];
      for (std::size_t x = 0; x < n; ++x) {
        gw2[y * n + x] += dz4[y] * act.u[x];
        du[x] += dz4[y] * w2[y * n + x];
      }
    }

    for (std::size_t x = 0; x < n; ++x) {
      const double dz3 = du[x] * leaky_grad(act.z3[x], spec.slope);
      if (dz3 == 0.0) continue;
      g.d1_b() += dz3;
      for (std::size_t j = 0; j < t_obs; ++j) {
        const std::size_t xj = x * t_obs + j;
        gw1[j] += dz3 * act.s[xj];
        const double dz2 = dz3 * w1[j] * leaky_grad(act.z2[xj], spec.slope);
        g.d0_out_b() += dz2;
        const VertexFeatures& f = sample.window[j].vertices[x];
        const double* z1 = &act.z1[xj * h];
        for (std::size_t k = 0; k < h; ++k) {
          gw0o[k] += dz2 * leaky(z1[k], spec.slope);
          const double dz1 = dz2 * w0o[k] * leaky_grad(z1[k], spec.slope);
          gw0[3 * k] += dz1 * f.distance;
          gw0[3 * k + 1] += dz1 * f.velocity;
          gw0[3 * k + 2] += dz1 * f.idleness;
          gb0[k] += dz1;
        }
      }
    }
  }

  if (spec.l1 != 0.0) {
    const double factor = spec.l1 / static_cast<double>(n * n);
    double penalty = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) {
      penalty += std::abs(w2[i]);
      if (w2[i] > 0.0) gw2[i] += factor;
      if (w2[i] < 0.0) gw2[i] -= factor;
    }
    out.loss += factor * penalty;
  }
  return out;
}

void adam_step(NetworkParams& params, const NetworkParams& gradients, AdamState& state) {
  auto p = params.values();
  const auto g = gradients.values();
  if (g.size() != p.size()) throw ShapeError("gradient and parameter sizes differ");
  if (state.m.empty()) {
    state.m.assign(p.size(), 0.0);
    state.v.assign(p.size(), 0.0);
  }
  if (state.m.size() != p.size() || state.v.size() != p.size()) {
    throw ShapeError("Adam moments and parameter sizes differ");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < p.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g[i] * g[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    p[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

}  // namespace redpatrol
