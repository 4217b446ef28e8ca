#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "redpatrol/adversaries.hpp"
#include "redpatrol/error.hpp"
#include "redpatrol/maps.hpp"
#include "redpatrol/sim.hpp"
#include "redpatrol/tcml.hpp"
#include "support.hpp"

namespace redpatrol {
namespace {

TraceFrame frame_with(std::vector<GraphPosition> positions, std::size_t n) {
  return {0.0, std::move(positions), std::vector<double>(n, 1.0)};
}

TEST(Features, DistanceMetric) {
  const PatrolGraph g(3, {{0, 1, 4}, {1, 2, 2}});
  const DistanceMatrix dm = all_pairs_shortest_paths(g);
  auto f = compute_features(g, dm, frame_with({AtVertex{0}}, 3), nullptr, 1.0, std::nullopt);
  EXPECT_DOUBLE_EQ(f.vertices[1].distance, 0.25);
  EXPECT_EQ(f.vertices[1].velocity, 0.0);
  // Agents at distances 2 and 4 from vertex 1.
  f = compute_features(g, dm, frame_with({AtVertex{2}, AtVertex{0}}, 3), nullptr, 1.0,
                       std::nullopt);
  EXPECT_DOUBLE_EQ(f.vertices[1].distance, 0.5 + 0.25);
  // An agent on its vertex is clamped to distance dt.
  EXPECT_DOUBLE_EQ(f.vertices[0].distance, 1.0 + 1.0 / 6.0);
}

TEST(Features, VelocityMetric) {
  const PatrolGraph g(2, {{0, 1, 5}});
  const DistanceMatrix dm = all_pairs_shortest_paths(g);
  const TraceFrame far = frame_with({AtVertex{0}}, 2);
  const TraceFrame near = frame_with({OnEdge{0, 1, 1}}, 2);
  EXPECT_DOUBLE_EQ(compute_features(g, dm, near, &far, 1.0, std::nullopt).vertices[1].velocity,
                   0.25);
  EXPECT_DOUBLE_EQ(compute_features(g, dm, far, &near, 1.0, std::nullopt).vertices[1].velocity,
                   -0.2);
}

TEST(Features, TimeScaling) {
  const PatrolGraph g(2, {{0, 1, 5}});
  const DistanceMatrix dm = all_pairs_shortest_paths(g);
  const TraceFrame far{0.0, {AtVertex{0}}, {0.0, 45.0}};
  const TraceFrame near{1.0, {OnEdge{0, 1, 1}}, {1.0, 46.0}};
  const auto raw = compute_features(g, dm, near, &far, 1.0, std::nullopt);
  const auto scaled = compute_features(g, dm, near, &far, 1.0, 90.0);
  EXPECT_DOUBLE_EQ(raw.vertices[1].idleness, 46.0);
  EXPECT_DOUBLE_EQ(scaled.vertices[1].idleness, 46.0 / 90.0);
  EXPECT_DOUBLE_EQ(scaled.vertices[1].distance, 90.0 * 0.25);
  EXPECT_DOUBLE_EQ(scaled.vertices[1].velocity, 90.0 * 0.25);
}

TEST(Features, InvariantsOnSimulatedFrames) {
  const PatrolGraph g = *builtin_map("corridor12");
  const DistanceMatrix dm = all_pairs_shortest_paths(g);
  const PatrolTrace trace = run(g, {StrategyKind::Rand, 3, 1.0, 300, 2, {}});
  for (std::size_t k = 1; k < trace.size(); ++k) {
    const auto f = compute_features(g, dm, trace.frames[k], &trace.frames[k - 1], 1.0, 90.0);
    for (const auto& v : f.vertices) {
      EXPECT_GT(v.distance, 0.0);
      EXPECT_GE(v.idleness, 0.0);
      EXPECT_TRUE(std::isfinite(v.velocity));
    }
  }
}

// Buffer fed from an idleness-only trace.
ObservationBuffer fill_buffer(const PatrolTrace& trace, double tau, std::size_t frames) {
  ObservationBuffer buffer(trace.vertex_count, trace.dt, tau);
  for (std::size_t k = 0; k < frames; ++k) {
    FeatureFrame f;
    f.vertices.resize(trace.vertex_count);
    buffer.push(f, trace.frames[k].idleness);
    buffer.advance_labels(static_cast<double>(k) * trace.dt);
  }
  return buffer;
}

TEST(ObservationBufferTest, LabelFrontier) {
  const PatrolTrace trace =
      testing::idleness_trace(testing::rows_from_visits(2, 20, {{4, 9}, {}}));
  ObservationBuffer buffer(2, 1.0, 3.0);
  for (std::size_t k = 0; k < 20; ++k) {
    FeatureFrame f;
    f.vertices.resize(2);
    buffer.push(f, trace.frames[k].idleness);
    const auto fresh = buffer.advance_labels(static_cast<double>(k));
    if (k < 3) {
      EXPECT_TRUE(fresh.empty());
      EXPECT_EQ(buffer.labeled(), 0u);
    } else {
      ASSERT_EQ(fresh.size(), 2u);
      EXPECT_EQ(fresh[0].frame, k - 3);
      EXPECT_EQ(buffer.labeled(), k - 2);
    }
  }
  // Vertex 0 is visited at frames 4 and 9: attacks at 2..4 and 7..9 fail.
  for (std::size_t k = 0; k < buffer.labeled(); ++k) {
    const bool fails = (k >= 2 && k <= 4) || (k >= 7 && k <= 9);
    EXPECT_EQ(*buffer.label(k, 0), !fails) << k;
    EXPECT_TRUE(*buffer.label(k, 1));
  }
  EXPECT_FALSE(buffer.label(buffer.labeled(), 0).has_value());
}

TEST(ObservationBufferTest, LabelsMatchAttackOutcome) {
  const PatrolGraph g = *builtin_map("grid5x4");
  const PatrolTrace full = run(g, {StrategyKind::Rand, 2, 1.0, 1200, 3, {}});
  const PatrolTrace trace = extract_window(full, 600, 600);
  const ObservationBuffer buffer = fill_buffer(trace, 45.0, trace.size());
  EXPECT_EQ(buffer.labeled(), trace.size() - 45);
  for (std::size_t k = 0; k < buffer.labeled(); ++k) {
    for (VertexId v = 0; v < 20; ++v) {
      ASSERT_EQ(*buffer.label(k, v), testing::brute_success(trace, v, k, 45));
    }
  }
}

TEST(ObservationBufferTest, WindowAccess) {
  ObservationBuffer buffer(1, 1.0, 2.0);
  for (int k = 0; k < 5; ++k) {
    FeatureFrame f{{{static_cast<double>(k), 0, 0}}};
    buffer.push(f, std::vector<double>{1.0});
  }
  const auto w = buffer.window(3, 2);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0].vertices[0].distance, 2.0);
  EXPECT_EQ(w[1].vertices[0].distance, 3.0);
  EXPECT_THROW(buffer.window(0, 2), std::exception);
  EXPECT_THROW(buffer.window(5, 1), std::exception);
  EXPECT_THROW(buffer.push(FeatureFrame{}, std::vector<double>{1.0}), ShapeError);
}

TEST(Arming, LaunchProbabilityValues) {
  EXPECT_EQ(launch_probability(0.0, 100), 0.0);
  EXPECT_EQ(launch_probability(1.0, 1), 1.0);
  EXPECT_EQ(launch_probability(1.0, 0), 0.0);
  EXPECT_NEAR(launch_probability(0.01, 100), 0.6340, 1e-4);
  EXPECT_NEAR(launch_probability(0.01, 100), 1.0 - std::pow(0.99, 100), 1e-15);
}

TEST(Arming, RemainingSteps) {
  EXPECT_EQ(remaining_attack_steps(0, 1200, 90, 1), 1110);
  EXPECT_EQ(remaining_attack_steps(1110, 1200, 90, 1), 0);
  EXPECT_EQ(remaining_attack_steps(1150, 1200, 90, 1), 0);
  EXPECT_EQ(remaining_attack_steps(0, 1200, 90, 4), 277);
}

TEST(Arming, GateAndMonotonicity) {
  ArmingState state;
  const std::vector<double> quiet{0.1, 0.2};
  for (int t = 0; t < 600; ++t) {
    update_arming(state, quiet, t, 1200, 90, 1);
    EXPECT_FALSE(state.armed) << t;
  }
  update_arming(state, quiet, 600, 1200, 90, 1);
  EXPECT_TRUE(state.armed);
  EXPECT_EQ(state.p_hat, 0.0);
  const std::vector<double> loud{0.9, 0.2};
  for (int t = 601; t < 800; ++t) {
    update_arming(state, loud, t, 1200, 90, 1);
    EXPECT_TRUE(state.armed);
  }
  EXPECT_EQ(state.outputs.size(), 100u);
  EXPECT_EQ(state.p_hat, 1.0);
}

TEST(Arming, AlwaysConfidentArmsOnlyAtTheLastLaunchTime) {
  ArmingState state;
  const std::vector<double> loud{0.9};
  for (int t = 0; t < 1110; ++t) {
    update_arming(state, loud, t, 1200, 90, 1);
    EXPECT_FALSE(state.armed);
  }
  update_arming(state, loud, 1110, 1200, 90, 1);
  EXPECT_TRUE(state.armed);
}

TEST(TcmlAdversaryTest, StubbedPredictorAttacksVertexTwoAtFirstArmedFrame) {
  const PatrolGraph g = *builtin_map("grid5x4");
  const DistanceMatrix dm = all_pairs_shortest_paths(g);
  const PatrolTrace full = run(g, {StrategyKind::Rand, 2, 1.0, 2000, 1, {}});
  const PatrolTrace trace = extract_window(full, 600, 1290);
  const ScenarioParams params{1200, 90, 1};

  // Vertex 2 is predicted to succeed on every 50th frame only, so p-hat
  // settles at 2/100 once the output buffer is full.
  std::size_t calls = 0;
  const std::size_t window = TcmlConfig{}.window;
  auto stub = [&](std::span<const FeatureFrame>) {
    const std::size_t frame = window - 1 + calls++;
    std::vector<double> out(20, 0.1);
    if (frame % 50 == 0) out[2] = 1.0;
    return out;
  };
  TcmlAdversary adv(g, dm, params, TcmlConfig{}, 5, stub);

  // Independent schedule: the first frame past T/2 where 1-(1-0.02)^R
  // drops below 0.999, then the next frame predicting an attack.
  std::size_t armed_at = 0;
  for (std::size_t k = 600;; ++k) {
    const double r = std::floor(1110.0 - static_cast<double>(k));
    if (1.0 - std::pow(0.98, r) < 0.999) {
      armed_at = k;
      break;
    }
  }
  std::size_t attack_at = armed_at;
  while (attack_at % 50 != 0) ++attack_at;

  const AttackRecord record = run_scenario(adv, trace, params);
  EXPECT_TRUE(record.launched);
  EXPECT_EQ(record.vertex, 2);
  EXPECT_EQ(record.t, static_cast<double>(attack_at));
  EXPECT_TRUE(adv.arming().armed);
  EXPECT_NEAR(adv.arming().p_hat, 0.02, 1e-12);
  EXPECT_GT(armed_at, 600u);
}

TEST(TcmlAdversaryTest, ConstantStubAttacksAtLastLaunchTime) {
  const PatrolGraph g = *builtin_map("grid5x4");
  const DistanceMatrix dm = all_pairs_shortest_paths(g);
  const PatrolTrace trace =
      extract_window(run(g, {StrategyKind::Rand, 2, 1.0, 1500, 1, {}}), 600, 390);
  const ScenarioParams params{300, 90, 1};
  auto stub = [](std::span<const FeatureFrame>) {
    std::vector<double> out(20, 0.0);
    out[2] = 1.0;
    return out;
  };
  TcmlAdversary adv(g, dm, params, TcmlConfig{}, 5, stub);
  const AttackRecord record = run_scenario(adv, trace, params);
  EXPECT_EQ(record.vertex, 2);
  EXPECT_EQ(record.t, 210.0);
}

TEST(TcmlAdversaryTest, QuietStubNeverAttacks) {
  const PatrolGraph g = *builtin_map("grid5x4");
  const DistanceMatrix dm = all_pairs_shortest_paths(g);
  const PatrolTrace trace =
      extract_window(run(g, {StrategyKind::Rand, 2, 1.0, 1500, 1, {}}), 600, 390);
  const ScenarioParams params{300, 90, 1};
  auto stub = [](std::span<const FeatureFrame>) { return std::vector<double>(20, 0.5); };
  TcmlAdversary adv(g, dm, params, TcmlConfig{}, 5, stub);
  EXPECT_EQ(run_scenario(adv, trace, params), AttackRecord::not_launched());
}

TEST(TcmlAdversaryTest, TrainsOnlineAndKeepsLabelsSound) {
  const PatrolGraph g = *builtin_map("grid5x4");
  const DistanceMatrix dm = all_pairs_shortest_paths(g);
  const PatrolTrace trace =
      extract_window(run(g, {StrategyKind::Rand, 2, 1.0, 1500, 4, {}}), 600, 390);
  const ScenarioParams params{300, 90, 1};
  TcmlAdversary adv(g, dm, params, TcmlConfig{}, 9);
  std::size_t k = 0;
  for (; k <= 300; ++k) {
    const auto d = adv.observe(trace.frames[k]);
    if (k < 150 || k > 210) {
      EXPECT_TRUE(std::holds_alternative<Wait>(d)) << k;
    }
  }
  // Four windows of 10 need 13 labeled frames, first available at frame 102.
  EXPECT_EQ(adv.training_steps(), 301u - 102u);
  EXPECT_TRUE(std::isfinite(adv.last_loss()));
  for (std::size_t f = 0; f < adv.buffer().labeled(); ++f) {
    for (VertexId v = 0; v < 20; ++v) {
      ASSERT_EQ(*adv.buffer().label(f, v), testing::brute_success(trace, v, f, 90));
    }
  }
}

TEST(TcmlAdversaryTest, SeededDeterminism) {
  const PatrolGraph g = *builtin_map("grid5x4");
  const DistanceMatrix dm = all_pairs_shortest_paths(g);
  const PatrolTrace trace =
      extract_window(run(g, {StrategyKind::Rand, 2, 1.0, 2000, 6, {}}), 600, 1290);
  const ScenarioParams params{1200, 90, 1};
  const AdversaryConfig cfg;
  const auto a = run_adversary(AdversaryKind::Tcml, g, dm, trace, params, cfg, 77);
  const auto b = run_adversary(AdversaryKind::Tcml, g, dm, trace, params, cfg, 77);
  EXPECT_EQ(a, b);
  TcmlAdversary x(g, dm, params, cfg.tcml, 77), y(g, dm, params, cfg.tcml, 78);
  TcmlAdversary z(g, dm, params, cfg.tcml, 77);
  for (std::size_t k = 0; k < 200; ++k) {
    x.observe(trace.frames[k]);
    y.observe(trace.frames[k]);
    z.observe(trace.frames[k]);
  }
  EXPECT_EQ(x.network(), z.network());
  EXPECT_NE(x.network(), y.network());
}

TEST(TcmlAdversaryTest, InitialD2) {
  const PatrolGraph g = *builtin_map("corridor12");
  const DistanceMatrix dm = all_pairs_shortest_paths(g);
  const ScenarioParams params{300, 30, 1};
  TcmlConfig cfg;
  TcmlAdversary identity(g, dm, params, cfg, 1);
  const auto w = identity.network().d2_w();
  for (std::size_t y = 0; y < 12; ++y) {
    for (std::size_t x = 0; x < 12; ++x) EXPECT_EQ(w[y * 12 + x], x == y ? 1.0 : 0.0);
  }
  cfg.identity_d2 = false;
  TcmlAdversary glorot(g, dm, params, cfg, 1);
  std::size_t off_diagonal_nonzero = 0;
  const auto wg = glorot.network().d2_w();
  for (std::size_t i = 0; i < wg.size(); ++i) {
    if (i % 13 != 0 && wg[i] != 0.0) ++off_diagonal_nonzero;
  }
  EXPECT_EQ(off_diagonal_nonzero, 132u);
}

double mean_abs_d2_after(double lambda, std::uint64_t seed, const PatrolGraph& g,
                         const DistanceMatrix& dm, const PatrolTrace& trace) {
  TcmlConfig cfg;
  cfg.l1 = lambda;
  const ScenarioParams params{3000, 30, 1};
  TcmlAdversary adv(g, dm, params, cfg, seed);
  for (std::size_t k = 0; adv.training_steps() < 1000; ++k) adv.observe(trace.frames.at(k));
  const auto w = adv.network().d2_w();
  double total = 0.0;
  for (double x : w) total += std::abs(x);
  return total / static_cast<double>(w.size());
}

TEST(TcmlAdversaryTest, L1ShrinksD2Weights) {
  const PatrolGraph g = *builtin_map("grid5x4");
  const DistanceMatrix dm = all_pairs_shortest_paths(g);
  const PatrolTrace trace =
      extract_window(run(g, {StrategyKind::Rand, 2, 1.0, 2000, 8, {}}), 600, 1200);
  double with = 0.0, without = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    with += mean_abs_d2_after(0.1, seed, g, dm, trace);
    without += mean_abs_d2_after(0.0, seed, g, dm, trace);
  }
  EXPECT_LT(with, without);
}

TEST(TcmlAdversaryTest, RejectsBadConfig) {
  const PatrolGraph g = *builtin_map("grid5x4");
  const DistanceMatrix dm = all_pairs_shortest_paths(g);
  TcmlConfig cfg;
  cfg.window = 0;
  EXPECT_THROW(TcmlAdversary(g, dm, {300, 90, 1}, cfg, 1), ValidationError);
  EXPECT_THROW(TcmlAdversary(g, dm, {300, 300, 1}, TcmlConfig{}, 1), ValidationError);
}

}  // namespace
}  // namespace redpatrol
