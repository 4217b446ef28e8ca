#pragma once

#include <variant>

#include "redpatrol/graph.hpp"
#include "redpatrol/trace.hpp"

namespace redpatrol {

// Horizon T and attack duration tau for one attack scenario, in seconds.
struct ScenarioParams {
  double horizon = 1200.0;
  double tau = 90.0;
  double dt = 1.0;

  // Last launch time that still completes inside the horizon.
  double last_launch() const { return horizon - tau; }
};

void validate(const ScenarioParams& params);

struct Wait {
  friend bool operator==(const Wait&, const Wait&) = default;
};
struct Attack {
  VertexId vertex = 0;
  friend bool operator==(const Attack&, const Attack&) = default;
};
using AdversaryDecision = std::variant<Wait, Attack>;

// Streaming adversary: fed one frame per timestep starting at scenario time
// 0, it decides whether to attack now. Instances are single-use.
class Adversary {
 public:
  virtual ~Adversary() = default;
  virtual AdversaryDecision observe(const TraceFrame& frame) = 0;
};

// Streams trace frames 0..T to the adversary until it attacks, then scores
// the attack against the trace. The trace must start at t = 0 and cover T.
// Throws std::logic_error if the adversary attacks outside [0, T - tau].
AttackRecord run_scenario(Adversary& adversary, const PatrolTrace& trace,
                          const ScenarioParams& params);

}  // namespace redpatrol
