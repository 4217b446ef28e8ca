#pragma once

// Straight-line reference network and finite-difference gradient check.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "redpatrol/network.hpp"

namespace redpatrol::testing {

inline std::vector<FeatureFrame> random_window(std::size_t n, std::size_t t_obs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(0.01, 1.0), v(-0.5, 0.5), i(0.0, 4.0);
  std::vector<FeatureFrame> w(t_obs);
  for (auto& f : w) {
    f.vertices.resize(n);
    for (auto& x : f.vertices) x = {d(rng), v(rng), i(rng)};
  }
  return w;
}

inline NetworkParams random_params(const NetworkSpec& spec, std::mt19937_64& rng) {
  NetworkParams p(spec);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& x : p.values()) x = u(rng);
  return p;
}

inline std::vector<double> random_labels(std::size_t n, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::vector<double> y(n);
  for (double& v : y) v = coin(rng) ? 1.0 : 0.0;
  return y;
}

// Straight-line recomputation of the network, written independently from
// the layout description.
inline std::vector<double> oracle_forward(const NetworkParams& p, const std::vector<FeatureFrame>& w) {
  const NetworkSpec& s = p.spec();
  auto act = [&](double z) { return z >= 0 ? z : s.slope * z; };
  std::vector<double> per_vertex(s.vertices);
  for (std::size_t x = 0; x < s.vertices; ++x) {
    std::vector<double> d0_out(s.window);
    for (std::size_t t = 0; t < s.window; ++t) {
      const double in[3] = {w[t].vertices[x].distance, w[t].vertices[x].velocity,
                            w[t].vertices[x].idleness};
      double out = p.d0_out_b();
      for (std::size_t k = 0; k < s.hidden; ++k) {
        double z = p.d0_hidden_b()[k];
        for (std::size_t c = 0; c < 3; ++c) z += p.d0_hidden_w()[k * 3 + c] * in[c];
        out += p.d0_out_w()[k] * act(z);
      }
      d0_out[t] = act(out);
    }
    double z = p.d1_b();
    for (std::size_t t = 0; t < s.window; ++t) z += p.d1_w()[t] * d0_out[t];
    per_vertex[x] = act(z);
  }
  std::vector<double> out(s.vertices);
  for (std::size_t y = 0; y < s.vertices; ++y) {
    double z = p.d2_b()[y];
    for (std::size_t x = 0; x < s.vertices; ++x) z += p.d2_w()[y * s.vertices + x] * per_vertex[x];
    out[y] = 1.0 / (1.0 + std::exp(-z));
  }
  return out;
}

inline double oracle_loss(const NetworkParams& p, const std::vector<std::vector<FeatureFrame>>& windows,
                   const std::vector<std::vector<double>>& labels) {
  double bce = 0.0;
  std::size_t count = 0;
  for (std::size_t b = 0; b < windows.size(); ++b) {
    const auto out = oracle_forward(p, windows[b]);
    for (std::size_t x = 0; x < out.size(); ++x, ++count) {
      const double q = std::clamp(out[x], 1e-7, 1.0 - 1e-7);
      bce -= labels[b][x] * std::log(q) + (1.0 - labels[b][x]) * std::log(1.0 - q);
    }
  }
  double l1 = 0.0;
  for (double w : p.d2_w()) l1 += std::abs(w);
  const double n = static_cast<double>(p.spec().vertices);
  return bce / static_cast<double>(count) + p.spec().l1 / (n * n) * l1;
}

// Central differences on the oracle loss; the gradient check compares
// against this, never against the implementation's own loss.
inline double max_gradient_error(std::mt19937_64& rng, std::size_t n, std::size_t t_obs,
                          std::size_t batch_size) {
  const NetworkSpec spec{n, t_obs, 6, 0.3, 0.1};
  NetworkParams p = random_params(spec, rng);
  std::vector<std::vector<FeatureFrame>> windows;
  std::vector<std::vector<double>> labels;
  for (std::size_t b = 0; b < batch_size; ++b) {
    windows.push_back(random_window(n, t_obs, rng));
    labels.push_back(random_labels(n, rng));
  }
  std::vector<Sample> batch;
  for (std::size_t b = 0; b < batch_size; ++b) batch.push_back({windows[b], labels[b]});
  const auto analytic = loss_and_gradients(p, batch).gradients;

  constexpr double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < p.values().size(); ++i) {
    const double keep = p.values()[i];
    p.values()[i] = keep + h;
    const double up = oracle_loss(p, windows, labels);
    p.values()[i] = keep - h;
    const double down = oracle_loss(p, windows, labels);
    p.values()[i] = keep;
    const double numeric = (up - down) / (2 * h);
    const double a = analytic.values()[i];
    const double scale = std::max({std::abs(a), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(a - numeric) / scale);
  }
  return worst;
}

}  // namespace redpatrol::testing
