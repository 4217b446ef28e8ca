#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "redpatrol/adversaries.hpp"
#include "redpatrol/sim.hpp"
#include "redpatrol/stats.hpp"

namespace redpatrol {

struct ExperimentSpec {
  std::vector<std::string> maps{"grid5x4"};
  std::vector<StrategyKind> strategies{StrategyKind::Rand};
  std::vector<int> agents{2};
  std::vector<double> horizons{300.0, 1200.0, 3600.0};
  std::vector<double> taus{30.0, 90.0, 180.0};
  std::vector<AdversaryKind> adversaries = all_adversaries();
  std::size_t runs = 50;
  double warmup = 600.0;
  double dt = 1.0;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::string cache_dir;  // empty: no on-disk trace cache
  AdversaryConfig adversary;
};

// Parses the JSON spec file format; absent keys keep their defaults.
ExperimentSpec parse_experiment_spec(std::string_view json_text);
void apply_adversary_config(std::string_view json_text, AdversaryConfig& config);

struct CellKey {
  std::string map;
  StrategyKind strategy = StrategyKind::Rand;
  int agents = 1;
  double horizon = 0.0;
  double tau = 0.0;

  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct ResultRow {
  CellKey cell;
  AdversaryKind adversary = AdversaryKind::Random;
  std::size_t runs = 0;
  std::size_t successes = 0;
  std::size_t failures = 0;
  std::size_t not_launched = 0;
  double p = 0.0;
  Interval ci;
  // Per-run records in run order; not serialized.
  std::vector<AttackRecord> records;
};

// Seeds derived from (base seed, cell parameters, run index) only.
std::uint64_t trace_seed(std::uint64_t base, std::string_view map, StrategyKind strategy,
                         int agents, std::size_t run);
std::uint64_t adversary_seed(std::uint64_t base, const CellKey& cell, AdversaryKind adversary,
                             std::size_t run);

// The warm-up-trimmed window for one run: T + tau seconds starting after
// the warm-up. Uses the spec's cache directory when set.
PatrolTrace run_window(const ExperimentSpec& spec, const PatrolGraph& g, const CellKey& cell,
                       std::size_t run);

// Content-addressed trace generation: returns the cached file when present,
// otherwise simulates and stores it.
PatrolTrace cached_simulation(const PatrolGraph& g, const SimConfig& cfg,
                              const std::string& cache_dir);
std::string trace_cache_key(const PatrolGraph& g, const SimConfig& cfg);

void validate(const ExperimentSpec& spec);
std::vector<ResultRow> run_sweep(const ExperimentSpec& spec);

std::string results_csv_header();
std::string to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_csv(std::string_view text);

struct ReportRow {
  std::string group;
  AdversaryKind adversary = AdversaryKind::Random;
  std::size_t runs = 0;
  std::size_t successes = 0;
  double p = 0.0;
  Interval ci;
};

struct ReportTable {
  std::string group_by;
  std::vector<std::string> groups;  // display order
  std::vector<AdversaryKind> adversaries;
  std::vector<ReportRow> rows;
};

// Pools rows sharing a group value per adversary; group_by is one of map,
// strategy, agents (or n_agents), horizon, tau.
ReportTable aggregate(const std::vector<ResultRow>& rows, std::string_view group_by);
std::string report_csv(const ReportTable& table);
std::string report_text(const ReportTable& table);

}  // namespace redpatrol
