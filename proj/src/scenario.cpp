#include "redpatrol/scenario.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "redpatrol/error.hpp"

namespace redpatrol {

void validate(const ScenarioParams& params) {
  if (!(params.dt > 0.0)) throw ValidationError("dt must be positive");
  if (!(params.tau > 0.0 && params.tau < params.horizon)) {
    throw ValidationError(fmt::format("need 0 < tau < T (tau = {}, T = {})", params.tau,
                                      params.horizon));
  }
  try {
    steps_of(params.horizon, params.dt);
    steps_of(params.tau, params.dt);
  } catch (const RangeError& e) {
    throw ValidationError(e.what());
  }
}

AttackRecord run_scenario(Adversary& adversary, const PatrolTrace& trace,
                          const ScenarioParams& params) {
  validate(params);
  const std::size_t horizon_steps = steps_of(params.horizon, params.dt);
  const std::size_t last_launch = horizon_steps - steps_of(params.tau, params.dt);
  if (std::abs(trace.dt - params.dt) > 1e-12 * params.dt) {
    throw ValidationError(fmt::format("trace dt {} differs from scenario dt {}", trace.dt,
                                      params.dt));
  }
  if (trace.frames.size() <= horizon_steps) {
    throw RangeError(fmt::format("trace of {} s does not cover horizon {} s",
                                 trace.t_end() - trace.t0(), params.horizon));
  }
  for (std::size_t k = 0; k <= horizon_steps; ++k) {
    const auto decision = adversary.observe(trace.frames[k]);
    const auto* attack = std::get_if<Attack>(&decision);
    if (attack == nullptr) continue;
    if (k > last_launch) {
      throw std::logic_error(fmt::format("attack at frame {} is after T - tau", k));
    }
    AttackRecord record;
    record.launched = true;
    record.vertex = attack->vertex;
    record.t = trace.frames[k].t;
    record.outcome = attack_outcome(trace, attack->vertex, trace.frames[k].t, params.tau);
    return record;
  }
  return AttackRecord::not_launched();
}

}  // namespace redpatrol
