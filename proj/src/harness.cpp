#include "redpatrol/harness.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "redpatrol/error.hpp"
#include "redpatrol/maps.hpp"
#include "redpatrol/seed.hpp"

namespace redpatrol {

using nlohmann::json;

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(fmt::format("spec: field '{}' has the wrong type", key));
  }
}

std::string format_number(double x) { return fmt::format("{}", x); }

std::string group_value(const ResultRow& row, std::string_view group_by) {
  if (group_by == "map") return row.cell.map;
  if (group_by == "strategy") return std::string(to_string(row.cell.strategy));
  if (group_by == "agents" || group_by == "n_agents") return std::to_string(row.cell.agents);
  if (group_by == "horizon") return format_number(row.cell.horizon);
  if (group_by == "tau") return format_number(row.cell.tau);
  throw ValidationError(fmt::format(
      "unknown group-by '{}' (expected map, strategy, agents, n_agents, horizon, tau)",
      group_by));
}

bool numeric_group(std::string_view group_by) {
  return group_by == "agents" || group_by == "n_agents" || group_by == "horizon" ||
         group_by == "tau";
}

double max_of(const std::vector<double>& xs) { return *std::max_element(xs.begin(), xs.end()); }

SimConfig sim_config_for(const ExperimentSpec& spec, const std::string& map,
                         StrategyKind strategy, int agents, std::size_t run) {
  SimConfig cfg;
  cfg.strategy = strategy;
  cfg.agents = agents;
  cfg.dt = spec.dt;
  cfg.duration = spec.warmup + max_of(spec.horizons) + max_of(spec.taus);
  cfg.seed = trace_seed(spec.seed, map, strategy, agents, run);
  return cfg;
}

}  // namespace

void apply_adversary_config(std::string_view json_text, AdversaryConfig& config) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("config: {}", e.what()));
  }
  if (j.contains("tcml")) {
    const json& t = j["tcml"];
    TcmlConfig& c = config.tcml;
    read_if(t, "learning_rate", c.learning_rate);
    read_if(t, "minibatch", c.minibatch);
    read_if(t, "hidden", c.hidden);
    read_if(t, "slope", c.slope);
    read_if(t, "l1", c.l1);
    read_if(t, "window", c.window);
    read_if(t, "output_buffer", c.output_buffer);
    read_if(t, "arming_threshold", c.arming_threshold);
    read_if(t, "attack_threshold", c.attack_threshold);
    read_if(t, "scale_features", c.scale_features);
    read_if(t, "identity_d2", c.identity_d2);
  }
  if (j.contains("probabilistic")) {
    const json& p = j["probabilistic"];
    ProbabilisticConfig& c = config.probabilistic;
    read_if(p, "idleness_bin_fraction", c.idleness_bin_fraction);
    read_if(p, "idleness_cap_fraction", c.idleness_cap_fraction);
    read_if(p, "distance_bin_width", c.distance_bin_width);
    read_if(p, "distance_cap", c.distance_cap);
    read_if(p, "min_samples", c.min_samples);
    read_if(p, "success_threshold", c.success_threshold);
    read_if(p, "output_buffer", c.arming.buffer_depth);
    read_if(p, "arming_threshold", c.arming.threshold);
  }
}

ExperimentSpec parse_experiment_spec(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("spec: {}", e.what()));
  }
  if (!j.is_object()) throw ParseError("spec: top level must be a JSON object");
  ExperimentSpec spec;
  read_if(j, "maps", spec.maps);
  if (j.contains("strategies")) {
    std::vector<std::string> names;
    read_if(j, "strategies", names);
    spec.strategies.clear();
    for (const auto& s : names) spec.strategies.push_back(parse_strategy(s));
  }
  read_if(j, "agents", spec.agents);
  read_if(j, "horizons", spec.horizons);
  read_if(j, "taus", spec.taus);
  if (j.contains("adversaries")) {
    std::vector<std::string> names;
    read_if(j, "adversaries", names);
    spec.adversaries.clear();
    for (const auto& s : names) spec.adversaries.push_back(parse_adversary(s));
  }
  read_if(j, "runs", spec.runs);
  read_if(j, "warmup", spec.warmup);
  read_if(j, "dt", spec.dt);
  read_if(j, "seed", spec.seed);
  read_if(j, "threads", spec.threads);
  read_if(j, "cache_dir", spec.cache_dir);
  apply_adversary_config(json_text, spec.adversary);
  validate(spec);
  return spec;
}

void validate(const ExperimentSpec& spec) {
  if (spec.maps.empty() || spec.strategies.empty() || spec.agents.empty() ||
      spec.horizons.empty() || spec.taus.empty() || spec.adversaries.empty()) {
    throw ValidationError("spec: every sweep list must be non-empty");
  }
  if (spec.runs == 0) throw ValidationError("spec: runs must be at least 1");
  if (spec.warmup < 0.0) throw ValidationError("spec: warmup must be non-negative");
  try {
    steps_of(spec.warmup, spec.dt);
  } catch (const RangeError& e) {
    throw ValidationError(fmt::format("spec: warmup: {}", e.what()));
  }
  for (double T : spec.horizons) {
    for (double tau : spec.taus) validate(ScenarioParams{T, tau, spec.dt});
  }
  for (const auto& map : spec.maps) {
    const PatrolGraph g = resolve_map(map);
    for (int a : spec.agents) {
      if (a < 1 || static_cast<std::size_t>(a) > g.vertex_count()) {
        throw ValidationError(fmt::format("spec: team size {} invalid for map '{}' ({} vertices)",
                                          a, map, g.vertex_count()));
      }
    }
  }
}

std::uint64_t trace_seed(std::uint64_t base, std::string_view map, StrategyKind strategy,
                         int agents, std::size_t run) {
  std::uint64_t h = hash_combine(base, std::string_view("trace"));
  h = hash_combine(h, map);
  h = hash_combine(h, to_string(strategy));
  h = hash_combine(h, static_cast<std::uint64_t>(agents));
  return hash_combine(h, static_cast<std::uint64_t>(run));
}

std::uint64_t adversary_seed(std::uint64_t base, const CellKey& cell, AdversaryKind adversary,
                             std::size_t run) {
  std::uint64_t h = hash_combine(base, std::string_view("adversary"));
  h = hash_combine(h, cell.map);
  h = hash_combine(h, to_string(cell.strategy));
  h = hash_combine(h, static_cast<std::uint64_t>(cell.agents));
  h = hash_combine(h, format_number(cell.horizon));
  h = hash_combine(h, format_number(cell.tau));
  h = hash_combine(h, to_string(adversary));
  return hash_combine(h, static_cast<std::uint64_t>(run));
}

std::string trace_cache_key(const PatrolGraph& g, const SimConfig& cfg) {
  std::uint64_t h = fnv1a(g.hash());
  h = hash_combine(h, to_string(cfg.strategy));
  h = hash_combine(h, static_cast<std::uint64_t>(cfg.agents));
  h = hash_combine(h, format_number(cfg.duration));
  h = hash_combine(h, format_number(cfg.dt));
  h = hash_combine(h, cfg.seed);
  for (VertexId v : cfg.placement) h = hash_combine(h, static_cast<std::uint64_t>(v));
  return fmt::format("{:016x}", h);
}

PatrolTrace cached_simulation(const PatrolGraph& g, const SimConfig& cfg,
                              const std::string& cache_dir) {
  if (cache_dir.empty()) return run(g, cfg);
  namespace fs = std::filesystem;
  const fs::path path = fs::path(cache_dir) / (trace_cache_key(g, cfg) + ".jsonl");
  if (fs::exists(path)) return load_trace_file(path.string());
  PatrolTrace trace = run(g, cfg);
  fs::create_directories(cache_dir);
  // Write-then-rename so concurrent runs never observe a partial file.
  const fs::path tmp = path.string() + fmt::format(".tmp{}",
      std::hash<std::thread::id>{}(std::this_thread::get_id()));
  save_trace_file(tmp.string(), trace);
  fs::rename(tmp, path);
  return trace;
}

PatrolTrace run_window(const ExperimentSpec& spec, const PatrolGraph& g, const CellKey& cell,
                       std::size_t run) {
  const SimConfig cfg = sim_config_for(spec, cell.map, cell.strategy, cell.agents, run);
  const PatrolTrace full = cached_simulation(g, cfg, spec.cache_dir);
  return extract_window(full, spec.warmup, cell.horizon + cell.tau);
}

std::vector<ResultRow> run_sweep(const ExperimentSpec& spec) {
  validate(spec);

  struct Work {
    std::size_t map_index;
    StrategyKind strategy;
    int agents;
    std::size_t run;
  };
  std::vector<PatrolGraph> graphs;
  std::vector<DistanceMatrix> distances;
  for (const auto& m : spec.maps) {
    graphs.push_back(resolve_map(m));
    distances.push_back(all_pairs_shortest_paths(graphs.back()));
  }
  std::vector<Work> work;
  for (std::size_t m = 0; m < spec.maps.size(); ++m) {
    for (StrategyKind s : spec.strategies) {
      for (int a : spec.agents) {
        for (std::size_t r = 0; r < spec.runs; ++r) work.push_back({m, s, a, r});
      }
    }
  }

  const std::size_t per_item = spec.horizons.size() * spec.taus.size() * spec.adversaries.size();
  std::vector<std::vector<AttackRecord>> records(work.size());

  auto process = [&](std::size_t i) {
    const Work& w = work[i];
    const PatrolGraph& g = graphs[w.map_index];
    const DistanceMatrix& dm = distances[w.map_index];
    const std::string& map = spec.maps[w.map_index];
    const SimConfig cfg = sim_config_for(spec, map, w.strategy, w.agents, w.run);
    const PatrolTrace full = cached_simulation(g, cfg, spec.cache_dir);
    auto& out = records[i];
    out.reserve(per_item);
    for (double T : spec.horizons) {
      for (double tau : spec.taus) {
        const CellKey cell{map, w.strategy, w.agents, T, tau};
        const PatrolTrace window = extract_window(full, spec.warmup, T + tau);
        const ScenarioParams params{T, tau, spec.dt};
        for (AdversaryKind kind : spec.adversaries) {
          out.push_back(run_adversary(kind, g, dm, window, params, spec.adversary,
                                      adversary_seed(spec.seed, cell, kind, w.run)));
        }
      }
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, spec.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < work.size(); ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < work.size(); i = next++) {
          try {
            process(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<ResultRow> rows;
  std::size_t i = 0;
  for (std::size_t m = 0; m < spec.maps.size(); ++m) {
    for (StrategyKind s : spec.strategies) {
      for (int a : spec.agents) {
        const std::size_t first_item = i;
        std::size_t slot = 0;
        for (double T : spec.horizons) {
          for (double tau : spec.taus) {
            for (AdversaryKind kind : spec.adversaries) {
              ResultRow row;
              row.cell = {spec.maps[m], s, a, T, tau};
              row.adversary = kind;
              row.runs = spec.runs;
              for (std::size_t r = 0; r < spec.runs; ++r) {
                const AttackRecord& rec = records[first_item + r][slot];
                row.records.push_back(rec);
                if (rec.outcome == Outcome::Success) ++row.successes;
                else if (rec.outcome == Outcome::Failure) ++row.failures;
                else ++row.not_launched;
              }
              row.p = static_cast<double>(row.successes) / static_cast<double>(row.runs);
              row.ci = wilson_interval(row.successes, row.runs);
              rows.push_back(std::move(row));
              ++slot;
            }
          }
        }
        i += spec.runs;
      }
    }
  }
  return rows;
}

std::string results_csv_header() {
  return "map,strategy,agents,horizon,tau,adversary,runs,successes,failures,not_launched,p,"
         "ci_lo,ci_hi";
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out = results_csv_header() + "\n";
  for (const ResultRow& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{:.6f},{:.6f},{:.6f}\n", r.cell.map,
                       to_string(r.cell.strategy), r.cell.agents, format_number(r.cell.horizon),
                       format_number(r.cell.tau), to_string(r.adversary), r.runs, r.successes,
                       r.failures, r.not_launched, r.p, r.ci.lo, r.ci.hi);
  }
  return out;
}

std::vector<ResultRow> parse_results_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != results_csv_header()) {
        throw ParseError("results: unexpected CSV header (expected " + results_csv_header() +
                         ")");
      }
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 13) {
      throw ParseError(fmt::format("results line {}: expected 13 fields, got {}", line_no,
                                   f.size()));
    }
    try {
      ResultRow r;
      r.cell.map = f[0];
      r.cell.strategy = parse_strategy(f[1]);
      r.cell.agents = std::stoi(f[2]);
      r.cell.horizon = std::stod(f[3]);
      r.cell.tau = std::stod(f[4]);
      r.adversary = parse_adversary(f[5]);
      r.runs = std::stoul(f[6]);
      r.successes = std::stoul(f[7]);
      r.failures = std::stoul(f[8]);
      r.not_launched = std::stoul(f[9]);
      r.p = std::stod(f[10]);
      r.ci = {std::stod(f[11]), std::stod(f[12])};
      if (r.successes + r.failures + r.not_launched != r.runs) {
        throw ValidationError("counts do not sum to runs");
      }
      rows.push_back(std::move(r));
    } catch (const std::logic_error& e) {
      throw ParseError(fmt::format("results line {}: {}", line_no, e.what()));
    } catch (const std::runtime_error& e) {
      throw ParseError(fmt::format("results line {}: {}", line_no, e.what()));
    }
  }
  return rows;
}

ReportTable aggregate(const std::vector<ResultRow>& rows, std::string_view group_by) {
  if (rows.empty()) throw ValidationError("report: no result rows");
  ReportTable table;
  table.group_by = std::string(group_by);

  std::map<std::pair<std::string, AdversaryKind>, std::pair<std::size_t, std::size_t>> pooled;
  for (const ResultRow& r : rows) {
    const std::string g = group_value(r, group_by);
    if (std::find(table.groups.begin(), table.groups.end(), g) == table.groups.end()) {
      table.groups.push_back(g);
    }
    if (std::find(table.adversaries.begin(), table.adversaries.end(), r.adversary) ==
        table.adversaries.end()) {
      table.adversaries.push_back(r.adversary);
    }
    auto& acc = pooled[{g, r.adversary}];
    acc.first += r.successes;
    acc.second += r.runs;
  }
  if (numeric_group(group_by)) {
    std::stable_sort(table.groups.begin(), table.groups.end(),
                     [](const std::string& a, const std::string& b) {
                       return std::stod(a) < std::stod(b);
                     });
  }
  std::sort(table.adversaries.begin(), table.adversaries.end());

  for (const auto& g : table.groups) {
    for (AdversaryKind kind : table.adversaries) {
      auto it = pooled.find({g, kind});
      if (it == pooled.end()) continue;
      ReportRow row;
      row.group = g;
      row.adversary = kind;
      row.successes = it->second.first;
      row.runs = it->second.second;
      row.p = static_cast<double>(row.successes) / static_cast<double>(row.runs);
      row.ci = wilson_interval(row.successes, row.runs);
      table.rows.push_back(row);
    }
  }
  return table;
}

std::string report_csv(const ReportTable& table) {
  std::string out = fmt::format("{},adversary,runs,successes,p,ci_lo,ci_hi\n", table.group_by);
  for (const ReportRow& r : table.rows) {
    out += fmt::format("{},{},{},{},{:.6f},{:.6f},{:.6f}\n", r.group, to_string(r.adversary),
                       r.runs, r.successes, r.p, r.ci.lo, r.ci.hi);
  }
  return out;
}

std::string report_text(const ReportTable& table) {
  constexpr int group_width = 12;
  constexpr int cell_width = 22;
  std::string out = fmt::format("Success probabilities by {}\n", table.group_by);
  out += fmt::format("{:<{}}", table.group_by, group_width);
  for (AdversaryKind kind : table.adversaries) {
    out += fmt::format("{:<{}}", to_string(kind), cell_width);
  }
  out += '\n';
  for (const auto& g : table.groups) {
    out += fmt::format("{:<{}}", g, group_width);
    for (AdversaryKind kind : table.adversaries) {
      auto it = std::find_if(table.rows.begin(), table.rows.end(), [&](const ReportRow& r) {
        return r.group == g && r.adversary == kind;
      });
      const std::string cell = it == table.rows.end()
                                   ? "-"
                                   : fmt::format("{:.2f} [{:.2f},{:.2f}]", it->p, it->ci.lo,
                                                 it->ci.hi);
      out += fmt::format("{:<{}}", cell, cell_width);
    }
    out += '\n';
  }
  return out;
}

}  // namespace redpatrol
