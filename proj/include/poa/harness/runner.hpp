#pragma once

#include "json.hpp"
#include "poa/harness/scenario.hpp"
#include "poa/sim/trace.hpp"

namespace poa::harness {

struct RunOutput {
  sim::Trace trace;
  nlohmann::json report;
  /// Every enabled requirement passed.
  bool pass = false;
};

/// Builds keys and genesis from the scenario seed, runs the simulation to
/// T0 + rounds * tau plus one drain interval, and evaluates the enabled checks
/// on the resulting trace. The first trace record describes the scenario, so
/// the trace alone is enough to re-run the checks. Throws ConfigError.
RunOutput run_scenario(const ScenarioConfig& config);

}  // namespace poa::harness
