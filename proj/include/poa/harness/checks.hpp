#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "poa/sim/trace.hpp"

namespace poa::harness {

enum class Requirement { R1, R2, R3, R4, R5 };

/// "r1".."r5" (case-insensitive). Throws std::invalid_argument.
Requirement requirement_from_string(std::string_view s);
std::string_view to_string(Requirement r);

struct Violation {
  /// Index of the offending record in the trace.
  std::size_t offset = 0;
  std::string detail;
};

struct CheckResult {
  Requirement requirement = Requirement::R1;
  bool pass = true;
  std::vector<Violation> violations;
  nlohmann::json notes = nlohmann::json::object();

  nlohmann::json to_json() const;
};

/// Every check reads the scenario header (the first "scenario" record) for
/// genesis parameters, node roles and thresholds. All of them throw
/// std::invalid_argument on a trace without a header.

/// R1: every block a non-Byzantine participant adopts re-validates against
/// its chain at the local clock it was adopted at.
CheckResult check_correctness(const sim::Trace& trace);
/// R2: one block per height across non-Byzantine participants (so adopted
/// chains are prefix-ordered at all times), and no two distinct blocks
/// locally committed at one height by non-Byzantine replicas.
CheckResult check_common_prefix(const sim::Trace& trace);
/// R3: every participant that is neither Byzantine nor ever crashed grows its
/// chain by at least ceil(tau_growth * window) blocks over every window of
/// `window` rounds.
CheckResult check_chain_growth(const sim::Trace& trace, double tau_growth, std::uint32_t window);
/// R4: no non-Byzantine participant adopts, and no non-Byzantine replica
/// commits, a block stamped beyond its local clock + future_delta.
CheckResult check_calmness(const sim::Trace& trace);
/// R5: structural. In runs without Byzantine miners every adopted solution is
/// exactly one fixed-width (R, z) pair, so its bytes reveal neither who
/// signed nor how many did.
CheckResult check_confidentiality(const sim::Trace& trace);

/// Uses the header's thresholds for R3.
CheckResult run_check(const sim::Trace& trace, Requirement r);

/// Metrics plus every requirement (enabled or not) and an overall "pass"
/// over the enabled ones. Derived from the trace alone.
nlohmann::json evaluate_trace(const sim::Trace& trace);

}  // namespace poa::harness
