#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "poa/sim/simulator.hpp"

namespace poa::harness {

using sim::ConfigError;

enum class ProtocolMode { PlainConcat, Fbft3, Fbft5 };

std::string_view to_string(ProtocolMode m);
/// Accepts "plain-concat" (alias "pbft"), "fbft3", "fbft5". Throws ConfigError.
ProtocolMode protocol_mode_from_string(std::string_view s);

struct CrashPlan {
  std::uint32_t node = 0;
  /// Offsets in seconds from T0.
  double at = 0;
  std::optional<double> recover;
};

struct ByzantinePlan {
  std::uint32_t node = 0;
  std::string script;
};

struct CheckPlan {
  bool r1 = true;
  bool r2 = true;
  bool r3 = true;
  bool r4 = true;
  bool r5 = true;
  double tau_growth = 0.9;
  std::uint32_t window = 10;
};

/// Scripts understood by the runner.
const std::vector<std::string>& known_scripts();

struct ScenarioConfig {
  std::string name = "unnamed";
  std::uint64_t seed = 1;
  std::uint64_t rounds = 10;
  int f_b = 1;
  int f_c = 0;
  /// Pure participants in addition to the N miners.
  std::uint32_t extra_participants = 0;
  ProtocolMode mode = ProtocolMode::PlainConcat;
  std::string ciphersuite = "curve";

  std::uint64_t t0 = 1700000000;
  std::uint64_t tau = 60;
  std::uint32_t nbits = 1;
  std::uint64_t future_delta = 30;
  std::uint64_t subsidy = 50;

  double lead_delta = 15;
  double view_change_timeout = 120;
  bool view_change = true;
  double session_timeout = 3;

  /// Partition and gst times are offsets from T0 here; the runner shifts them.
  sim::DelayModel delays;
  double clock_skew = 1.0;
  std::uint32_t txs_per_round = 1;

  std::vector<CrashPlan> crashes;
  std::vector<ByzantinePlan> byzantine;
  /// Lets a scenario exceed F_B / F_C on purpose; such runs say so in the report.
  bool allow_excess_faults = false;
  CheckPlan checks;

  std::uint32_t n() const;
  std::uint32_t q() const;
  /// FROST threshold: Q for fbft3, F_B + 1 for fbft5, Q signatures for plain-concat.
  std::uint32_t k() const;
  std::uint32_t total_nodes() const { return n() + extra_participants; }
  bool within_fault_budget() const;

  /// Throws ConfigError with a readable message.
  void validate() const;
};

/// Unknown keys are rejected so typos do not silently fall back to defaults.
/// Throws ConfigError.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& c);
ScenarioConfig load_scenario(const std::string& path);

}  // namespace poa::harness
