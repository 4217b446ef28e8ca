#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "redpatrol/graph.hpp"

namespace redpatrol {

// One observation of the patrol team: every agent position and every
// vertex idleness at time t.
struct TraceFrame {
  double t = 0.0;
  std::vector<GraphPosition> positions;
  std::vector<double> idleness;

  friend bool operator==(const TraceFrame&, const TraceFrame&) = default;
};

// A visit is an idleness reset. This is the only visit signal adversaries
// and the outcome oracle use, so simulated and recorded traces behave alike.
inline bool is_visit(double idleness) { return idleness <= 0.0; }

// Frames at t0 + k*dt with no gaps.
struct PatrolTrace {
  std::string graph_hash;
  double dt = 1.0;
  std::size_t vertex_count = 0;
  std::size_t agent_count = 0;
  std::vector<TraceFrame> frames;

  double t0() const { return frames.empty() ? 0.0 : frames.front().t; }
  double t_end() const { return frames.empty() ? 0.0 : frames.back().t; }
  std::size_t size() const { return frames.size(); }

  // Index of the frame at absolute time t. Throws RangeError when t is off
  // the dt grid or outside the trace.
  std::size_t frame_index(double t) const;

  friend bool operator==(const PatrolTrace&, const PatrolTrace&) = default;
};

// Checks the no-gap time grid and per-frame vector lengths.
void validate_trace(const PatrolTrace& trace);

// Line-oriented JSON: a header line followed by one line per frame.
std::string write_trace(const PatrolTrace& trace);
void write_trace(std::ostream& out, const PatrolTrace& trace);
PatrolTrace parse_trace(std::string_view text);
PatrolTrace parse_trace(std::istream& in);
PatrolTrace load_trace_file(const std::string& path);
void save_trace_file(const std::string& path, const PatrolTrace& trace);

// Frames with start <= t <= start + length, re-timed so the window starts at
// t = 0. Idleness values are carried over unchanged.
PatrolTrace extract_window(const PatrolTrace& trace, double start, double length);

enum class Outcome { Success, Failure, NotLaunched };

std::string_view to_string(Outcome outcome);

// Success iff no frame with t <= frame time < t + tau shows a visit to v.
// Requires t >= t0 and t + tau <= t_end, both on the dt grid.
Outcome attack_outcome(const PatrolTrace& trace, VertexId v, double t, double tau);

// Number of dt steps spanned by a duration; throws RangeError if the
// duration is not a whole multiple of dt.
std::size_t steps_of(double duration, double dt);

struct AttackRecord {
  bool launched = false;
  std::optional<VertexId> vertex;
  std::optional<double> t;
  Outcome outcome = Outcome::NotLaunched;

  static AttackRecord not_launched() { return {}; }
  bool succeeded() const { return outcome == Outcome::Success; }

  friend bool operator==(const AttackRecord&, const AttackRecord&) = default;
};

// One-line JSON rendering used by the CLI.
std::string to_json(const AttackRecord& record);

}  // namespace redpatrol
