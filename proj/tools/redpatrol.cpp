// redpatrol: patrol simulation and adversary evaluation from the command line.
//
//   redpatrol simulate --map grid5x4 --strategy rand --agents 2 --duration 4200 --seed 7 --out t.jsonl
//   redpatrol attack --trace t.jsonl --adversary tcml --horizon 1200 --tau 90 --seed 3
//   redpatrol sweep spec.json --out results.csv
//   redpatrol report --group-by n_agents results.csv

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "redpatrol/adversaries.hpp"
#include "redpatrol/error.hpp"
#include "redpatrol/harness.hpp"
#include "redpatrol/maps.hpp"
#include "redpatrol/sim.hpp"

namespace {

using namespace redpatrol;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", out_path));
  out << text;
}

PatrolGraph graph_for_trace(const PatrolTrace& trace, const std::string& map) {
  if (!map.empty()) return resolve_map(map);
  for (const auto& name : builtin_map_names()) {
    auto g = builtin_map(name);
    if (g->hash() == trace.graph_hash) return *std::move(g);
  }
  throw ValidationError(fmt::format(
      "trace graph {} is not a builtin map; pass --map with the graph file", trace.graph_hash));
}

struct CommonOptions {
  std::uint64_t seed = 0;
  std::string out;
  std::string config;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--seed", opts.seed, "RNG seed");
  cmd->add_option("--out", opts.out, "Output file (default: stdout)");
  cmd->add_option("--config", opts.config, "JSON configuration file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot patrol simulator and adversary red-team harness"};
  app.require_subcommand(1);

  CommonOptions sim_common;
  std::string sim_map, sim_strategy = "rand";
  int sim_agents = 1;
  double sim_duration = 0.0, sim_dt = 1.0;
  std::vector<VertexId> sim_placement;
  auto* simulate = app.add_subcommand("simulate", "Simulate a patrol team and write a trace");
  add_common(simulate, sim_common);
  simulate->add_option("--map", sim_map, "Builtin map name or graph JSON file")->required();
  simulate->add_option("--strategy", sim_strategy, "rand | greedy | cyclic");
  simulate->add_option("--agents", sim_agents, "Team size");
  simulate->add_option("--duration", sim_duration, "Seconds to simulate")->required();
  simulate->add_option("--dt", sim_dt, "Timestep, seconds");
  simulate->add_option("--placement", sim_placement, "Start vertices, one per agent");

  CommonOptions atk_common;
  std::string atk_trace, atk_map, atk_adversary = "tcml";
  double atk_horizon = 1200.0, atk_tau = 90.0;
  std::optional<double> atk_start;
  bool atk_no_scaling = false;
  auto* attack = app.add_subcommand("attack", "Run one adversary against a recorded trace");
  add_common(attack, atk_common);
  attack->add_option("--trace", atk_trace, "Trace file (JSON lines)")->required();
  attack->add_option("--map", atk_map, "Graph (default: builtin map matching the trace)");
  attack->add_option("--adversary", atk_adversary,
                     "random | deterministic | full-knowledge | probabilistic | tcml");
  attack->add_option("--horizon", atk_horizon, "Time horizon T, seconds");
  attack->add_option("--tau", atk_tau, "Attack duration, seconds");
  attack->add_option("--start", atk_start, "Scenario start time within the trace");
  attack->add_flag("--no-feature-scaling", atk_no_scaling, "Feed TCML unscaled distance, velocity and idleness");

  CommonOptions sweep_common;
  std::string sweep_spec;
  std::optional<std::size_t> sweep_threads;
  auto* sweep = app.add_subcommand("sweep", "Run an experiment sweep and write results CSV");
  add_common(sweep, sweep_common);
  sweep->add_option("spec", sweep_spec, "Experiment spec (JSON); same as --config");
  sweep->add_option("--threads", sweep_threads, "Worker threads");

  CommonOptions report_common;
  std::string report_results, report_group = "horizon";
  auto* report = app.add_subcommand("report", "Aggregate results CSV into a table");
  add_common(report, report_common);
  report->add_option("results", report_results, "Results CSV")->required();
  report->add_option("--group-by", report_group, "map | strategy | agents | n_agents | horizon | tau");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      const PatrolGraph g = resolve_map(sim_map);
      SimConfig cfg;
      if (!sim_common.config.empty()) {
        const auto j = nlohmann::json::parse(read_file(sim_common.config));
        sim_strategy = j.value("strategy", sim_strategy);
        cfg.placement = j.value("placement", cfg.placement);
      }
      cfg.strategy = parse_strategy(sim_strategy);
      cfg.agents = sim_agents;
      cfg.duration = sim_duration;
      cfg.dt = sim_dt;
      cfg.seed = sim_common.seed;
      if (!sim_placement.empty()) cfg.placement = sim_placement;
      emit(sim_common.out, write_trace(run(g, cfg)));
      return 0;
    }

    if (*attack) {
      PatrolTrace trace = load_trace_file(atk_trace);
      const PatrolGraph g = graph_for_trace(trace, atk_map);
      const DistanceMatrix dm = all_pairs_shortest_paths(g);
      const ScenarioParams params{atk_horizon, atk_tau, trace.dt};
      validate(params);
      const double start = atk_start.value_or(trace.t0());
      const double available = trace.t_end() - start;
      if (available + 1e-9 < atk_horizon) {
        throw RangeError(fmt::format("trace covers {} s from {}, horizon needs {} s", available,
                                     start, atk_horizon));
      }
      const double length = std::min(available, atk_horizon + atk_tau);
      trace = extract_window(trace, start, std::floor(length / trace.dt + 1e-9) * trace.dt);
      AdversaryConfig config;
      if (!atk_common.config.empty()) apply_adversary_config(read_file(atk_common.config), config);
      if (atk_no_scaling) config.tcml.scale_features = false;
      const AdversaryKind kind = parse_adversary(atk_adversary);
      const AttackRecord record =
          run_adversary(kind, g, dm, trace, params, config, atk_common.seed);
      auto j = nlohmann::json::parse(to_json(record));
      j["adversary"] = std::string(to_string(kind));
      j["horizon"] = atk_horizon;
      j["tau"] = atk_tau;
      emit(atk_common.out, j.dump() + "\n");
      return 0;
    }

    if (*sweep) {
      std::string spec_path = sweep_spec.empty() ? sweep_common.config : sweep_spec;
      if (spec_path.empty()) throw ValidationError("sweep needs a spec file (positional or --config)");
      ExperimentSpec spec = parse_experiment_spec(read_file(spec_path));
      if (sweep->count("--seed") > 0) spec.seed = sweep_common.seed;
      if (sweep_threads) spec.threads = *sweep_threads;
      emit(sweep_common.out, to_csv(run_sweep(spec)));
      return 0;
    }

    if (*report) {
      const auto rows = parse_results_csv(read_file(report_results));
      const ReportTable table = aggregate(rows, report_group);
      std::cout << report_text(table);
      if (!report_common.out.empty()) emit(report_common.out, report_csv(table));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
