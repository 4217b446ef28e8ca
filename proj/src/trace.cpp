#include "redpatrol/trace.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "redpatrol/error.hpp"

namespace redpatrol {

using nlohmann::json;

namespace {

bool same_time(double a, double b, double dt) { return std::abs(a - b) <= 1e-6 * dt; }

json position_to_json(const GraphPosition& p) {
  if (const auto* at = std::get_if<AtVertex>(&p)) return json::array({at->v});
  const auto& on = std::get<OnEdge>(p);
  return json::array({on.u, on.v, on.s});
}

GraphPosition position_from_json(const json& j, std::size_t line) {
  if (j.is_array() && j.size() == 1 && j[0].is_number_integer()) {
    return AtVertex{j[0].get<VertexId>()};
  }
  if (j.is_array() && j.size() == 3 && j[0].is_number_integer() && j[1].is_number_integer() &&
      j[2].is_number()) {
    return OnEdge{j[0].get<VertexId>(), j[1].get<VertexId>(), j[2].get<double>()};
  }
  throw ParseError(fmt::format("trace line {}: position must be [v] or [u, v, s]", line));
}

template <typename T>
T require(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key)) throw ParseError(fmt::format("trace line {}: missing '{}'", line, key));
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    throw ParseError(fmt::format("trace line {}: field '{}' has the wrong type", line, key));
  }
}

}  // namespace

std::size_t PatrolTrace::frame_index(double t) const {
  if (frames.empty()) throw RangeError("empty trace");
  const double k = std::round((t - t0()) / dt);
  if (k < 0 || k >= static_cast<double>(frames.size())) {
    throw RangeError(fmt::format("time {} outside trace [{}, {}]", t, t0(), t_end()));
  }
  const auto idx = static_cast<std::size_t>(k);
  if (!same_time(frames[idx].t, t, dt)) {
    throw RangeError(fmt::format("time {} is not on the trace grid (dt = {})", t, dt));
  }
  return idx;
}

std::size_t steps_of(double duration, double dt) {
  const double k = std::round(duration / dt);
  if (k < 0 || std::abs(k * dt - duration) > 1e-9 * std::max(1.0, std::abs(duration))) {
    throw RangeError(fmt::format("duration {} is not a non-negative multiple of dt = {}",
                                 duration, dt));
  }
  return static_cast<std::size_t>(k);
}

void validate_trace(const PatrolTrace& trace) {
  if (!(trace.dt > 0.0)) throw ValidationError("trace dt must be positive");
  for (std::size_t k = 0; k < trace.frames.size(); ++k) {
    const TraceFrame& f = trace.frames[k];
    if (f.idleness.size() != trace.vertex_count || f.positions.size() != trace.agent_count) {
      throw MismatchError(fmt::format("frame {} sizes disagree with header", k));
    }
    if (!same_time(f.t, trace.t0() + static_cast<double>(k) * trace.dt, trace.dt)) {
      throw ValidationError(fmt::format("frame {} time {} breaks the dt grid", k, f.t));
    }
  }
}

void write_trace(std::ostream& out, const PatrolTrace& trace) {
  json header;
  header["graph_hash"] = trace.graph_hash;
  header["dt"] = trace.dt;
  header["n"] = trace.vertex_count;
  header["agents"] = trace.agent_count;
  out << header.dump() << '\n';
  for (const TraceFrame& f : trace.frames) {
    json line;
    line["t"] = f.t;
    json pos = json::array();
    for (const auto& p : f.positions) pos.push_back(position_to_json(p));
    line["pos"] = std::move(pos);
    line["idl"] = f.idleness;
    out << line.dump() << '\n';
  }
}

std::string write_trace(const PatrolTrace& trace) {
  std::ostringstream out;
  write_trace(out, trace);
  return out.str();
}

PatrolTrace parse_trace(std::istream& in) {
  PatrolTrace trace;
  std::string text;
  std::size_t line_no = 0;
  bool have_header = false;

  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(fmt::format("trace line {}: {}", line_no, e.what()));
    }
    if (!j.is_object()) throw ParseError(fmt::format("trace line {}: not an object", line_no));

    if (!have_header) {
      trace.graph_hash = require<std::string>(j, "graph_hash", line_no);
      trace.dt = require<double>(j, "dt", line_no);
      trace.vertex_count = require<std::size_t>(j, "n", line_no);
      trace.agent_count = require<std::size_t>(j, "agents", line_no);
      if (!(trace.dt > 0.0)) throw ParseError(fmt::format("trace line {}: dt <= 0", line_no));
      have_header = true;
      continue;
    }

    TraceFrame frame;
    frame.t = require<double>(j, "t", line_no);
    if (!j.contains("pos") || !j["pos"].is_array()) {
      throw ParseError(fmt::format("trace line {}: 'pos' must be an array", line_no));
    }
    for (const json& p : j["pos"]) frame.positions.push_back(position_from_json(p, line_no));
    frame.idleness = require<std::vector<double>>(j, "idl", line_no);

    if (frame.positions.size() != trace.agent_count) {
      throw MismatchError(fmt::format("trace line {}: {} positions, header declares {} agents",
                                      line_no, frame.positions.size(), trace.agent_count));
    }
    if (frame.idleness.size() != trace.vertex_count) {
      throw MismatchError(fmt::format("trace line {}: {} idleness values, header declares n = {}",
                                      line_no, frame.idleness.size(), trace.vertex_count));
    }
    if (!trace.frames.empty()) {
      const double expected =
          trace.t0() + static_cast<double>(trace.frames.size()) * trace.dt;
      if (frame.t <= trace.frames.back().t) {
        throw ParseError(fmt::format("trace line {}: time {} does not increase", line_no,
                                     frame.t));
      }
      if (!same_time(frame.t, expected, trace.dt)) {
        throw ParseError(fmt::format("trace line {}: time {} leaves a gap (expected {})",
                                     line_no, frame.t, expected));
      }
    }
    trace.frames.push_back(std::move(frame));
  }
  if (!have_header) throw ParseError("trace: missing header line");
  return trace;
}

PatrolTrace parse_trace(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trace(in);
}

PatrolTrace load_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open trace file '{}'", path));
  return parse_trace(in);
}

void save_trace_file(const std::string& path, const PatrolTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write trace file '{}'", path));
  write_trace(out, trace);
}

PatrolTrace extract_window(const PatrolTrace& trace, double start, double length) {
  const std::size_t first = trace.frame_index(start);
  const std::size_t steps = steps_of(length, trace.dt);
  if (first + steps >= trace.frames.size()) {
    throw RangeError(fmt::format("window [{}, {}] exceeds trace end {}", start, start + length,
                                 trace.t_end()));
  }
  PatrolTrace out;
  out.graph_hash = trace.graph_hash;
  out.dt = trace.dt;
  out.vertex_count = trace.vertex_count;
  out.agent_count = trace.agent_count;
  out.frames.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    TraceFrame f = trace.frames[first + k];
    f.t = static_cast<double>(k) * trace.dt;
    out.frames.push_back(std::move(f));
  }
  return out;
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Success: return "success";
    case Outcome::Failure: return "failure";
    case Outcome::NotLaunched: return "not_launched";
  }
  return "unknown";
}

Outcome attack_outcome(const PatrolTrace& trace, VertexId v, double t, double tau) {
  if (v < 0 || static_cast<std::size_t>(v) >= trace.vertex_count) {
    throw RangeError(fmt::format("attack on unknown vertex {}", v));
  }
  const std::size_t first = trace.frame_index(t);
  const std::size_t steps = steps_of(tau, trace.dt);
  if (steps == 0) throw RangeError("attack duration must be positive");
  if (first + steps >= trace.frames.size()) {
    throw RangeError(fmt::format("attack interval [{}, {}) runs past trace end {}", t, t + tau,
                                 trace.t_end()));
  }
  for (std::size_t k = first; k < first + steps; ++k) {
    if (is_visit(trace.frames[k].idleness[v])) return Outcome::Failure;
  }
  return Outcome::Success;
}

std::string to_json(const AttackRecord& record) {
  json j;
  j["launched"] = record.launched;
  j["vertex"] = record.vertex ? json(*record.vertex) : json(nullptr);
  j["t"] = record.t ? json(*record.t) : json(nullptr);
  j["outcome"] = std::string(to_string(record.outcome));
  return j.dump();
}

}  // namespace redpatrol
