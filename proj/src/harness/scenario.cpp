#include "poa/harness/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "poa/crypto/group.hpp"
#include "poa/fbft/combinations.hpp"
#include "poa/fbft/fbft3.hpp"
#include "poa/pbft/config.hpp"

namespace poa::harness {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::string_view where, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw ConfigError(std::string(where) + ": unknown key '" + k + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string_view to_string(ProtocolMode m) {
  switch (m) {
    case ProtocolMode::PlainConcat: return "plain-concat";
    case ProtocolMode::Fbft3: return "fbft3";
    case ProtocolMode::Fbft5: return "fbft5";
  }
  return "?";
}

ProtocolMode protocol_mode_from_string(std::string_view s) {
  if (s == "plain-concat" || s == "pbft") return ProtocolMode::PlainConcat;
  if (s == "fbft3") return ProtocolMode::Fbft3;
  if (s == "fbft5") return ProtocolMode::Fbft5;
  throw ConfigError("unknown protocol mode '" + std::string(s) + "'");
}

const std::vector<std::string>& known_scripts() {
  static const std::vector<std::string> scripts{"silent",        "mute",         "equivocate",
                                                "invalid-share", "premature-block", "nonce-tweak"};
  return scripts;
}

std::uint32_t ScenarioConfig::n() const { return pbft::quorum_sizes(f_b, f_c).n; }
std::uint32_t ScenarioConfig::q() const { return pbft::quorum_sizes(f_b, f_c).q; }

std::uint32_t ScenarioConfig::k() const {
  return mode == ProtocolMode::Fbft5 ? static_cast<std::uint32_t>(f_b) + 1 : q();
}

bool ScenarioConfig::within_fault_budget() const {
  std::set<std::uint32_t> byz, crashed;
  for (const auto& b : byzantine) byz.insert(b.node);
  // Pure participants hold no quorum share, so only miner crashes count.
  for (const auto& c : crashes) {
    if (c.node < n()) crashed.insert(c.node);
  }
  // A Byzantine allowance also covers a crash.
  const auto fb = static_cast<std::size_t>(f_b);
  return byz.size() <= fb && byz.size() + crashed.size() <= fb + static_cast<std::size_t>(f_c);
}

void ScenarioConfig::validate() const {
  if (f_b < 0 || f_c < 0) throw ConfigError("f_b and f_c must be non-negative");
  if (f_b > 20 || f_c > 20) throw ConfigError("f_b and f_c above 20 are out of range for this simulator");
  if (rounds > 100000) throw ConfigError("rounds above 100000");
  if (tau == 0) throw ConfigError("tau must be positive");
  if (nbits > 16) throw ConfigError("nbits above 16 is not an easy grind target");
  if (lead_delta < 0 || lead_delta >= static_cast<double>(tau)) throw ConfigError("lead_delta must lie in [0, tau)");
  if (static_cast<double>(future_delta) < lead_delta) {
    throw ConfigError("future_delta below lead_delta would make every proposal premature");
  }
  if (view_change_timeout <= 0 || session_timeout <= 0) throw ConfigError("timeouts must be positive");
  if (clock_skew < 0) throw ConfigError("clock_skew must be non-negative");
  // Two clocks differ by up to 2 * skew; an honest proposal must never look premature.
  if (2 * clock_skew + lead_delta > static_cast<double>(future_delta)) {
    throw ConfigError("2 * clock_skew + lead_delta exceeds future_delta");
  }
  crypto::group_by_name(ciphersuite);
  delays.validate();

  const std::uint32_t nn = n();
  if (mode == ProtocolMode::Fbft3 && fbft::binomial(nn, q()) > fbft::Fbft3Mode::kMaxCombinations) {
    throw ConfigError("fbft3 needs C(N,Q) <= " + std::to_string(fbft::Fbft3Mode::kMaxCombinations) + ", got C(" +
                      std::to_string(nn) + "," + std::to_string(q()) + ")");
  }
  if (mode == ProtocolMode::PlainConcat && nn > 256) throw ConfigError("plain-concat indexes signers with one byte");

  std::set<std::uint32_t> byz;
  for (const auto& b : byzantine) {
    if (b.node >= nn) throw ConfigError("byzantine node " + std::to_string(b.node) + " is not a miner");
    if (std::ranges::find(known_scripts(), b.script) == known_scripts().end()) {
      throw ConfigError("unknown byzantine script '" + b.script + "'");
    }
    if (!byz.insert(b.node).second) throw ConfigError("node " + std::to_string(b.node) + " has two scripts");
  }
  for (const auto& c : crashes) {
    if (c.node >= total_nodes()) throw ConfigError("crash plan names unknown node " + std::to_string(c.node));
    if (byz.contains(c.node)) throw ConfigError("node " + std::to_string(c.node) + " is both crashed and byzantine");
    if (c.recover && *c.recover <= c.at) throw ConfigError("recovery must come after the crash");
  }
  if (!allow_excess_faults && !within_fault_budget()) {
    throw ConfigError("fault plan exceeds F_B=" + std::to_string(f_b) + " / F_C=" + std::to_string(f_c) +
                      " (set allow_excess_faults to run it anyway)");
  }
  if (checks.tau_growth < 0 || checks.tau_growth > 1) throw ConfigError("tau_growth must lie in [0, 1]");
  if (checks.window == 0) throw ConfigError("growth window must be at least one round");
}

ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig c;
  try {
    reject_unknown(j, "scenario",
                   {"name", "description", "seed", "rounds", "f_b", "f_c", "participants", "mode", "ciphersuite",
                    "chain", "pbft", "fbft5", "network", "crashes", "byzantine", "allow_excess_faults",
                    "txs_per_round", "checks"});
    read(j, "name", c.name);
    read(j, "seed", c.seed);
    read(j, "rounds", c.rounds);
    read(j, "f_b", c.f_b);
    read(j, "f_c", c.f_c);
    read(j, "participants", c.extra_participants);
    if (j.contains("mode")) c.mode = protocol_mode_from_string(j.at("mode").get<std::string>());
    read(j, "ciphersuite", c.ciphersuite);
    read(j, "allow_excess_faults", c.allow_excess_faults);
    read(j, "txs_per_round", c.txs_per_round);

    if (j.contains("chain")) {
      const json& ch = j.at("chain");
      reject_unknown(ch, "chain", {"t0", "tau", "nbits", "future_delta", "subsidy"});
      read(ch, "t0", c.t0);
      read(ch, "tau", c.tau);
      read(ch, "nbits", c.nbits);
      read(ch, "future_delta", c.future_delta);
      read(ch, "subsidy", c.subsidy);
    }
    if (j.contains("pbft")) {
      const json& p = j.at("pbft");
      reject_unknown(p, "pbft", {"lead_delta", "view_change_timeout", "view_change"});
      read(p, "lead_delta", c.lead_delta);
      read(p, "view_change_timeout", c.view_change_timeout);
      read(p, "view_change", c.view_change);
    }
    if (j.contains("fbft5")) {
      const json& f = j.at("fbft5");
      reject_unknown(f, "fbft5", {"session_timeout"});
      read(f, "session_timeout", c.session_timeout);
    }
    if (j.contains("network")) {
      const json& n = j.at("network");
      reject_unknown(n, "network", {"base_latency", "jitter", "gst", "delta", "clock_skew", "partitions"});
      read(n, "base_latency", c.delays.base_latency);
      read(n, "jitter", c.delays.jitter);
      read(n, "gst", c.delays.gst);
      read(n, "delta", c.delays.delta);
      read(n, "clock_skew", c.clock_skew);
      if (n.contains("partitions")) {
        for (const auto& p : n.at("partitions")) {
          reject_unknown(p, "partition", {"start", "end", "nodes", "drop", "duplicate", "reorder"});
          sim::PartitionWindow w;
          read(p, "start", w.start);
          read(p, "end", w.end);
          if (p.contains("nodes")) {
            for (const auto& id : p.at("nodes")) w.nodes.insert(id.get<std::uint32_t>());
          }
          read(p, "drop", w.drop);
          read(p, "duplicate", w.duplicate);
          read(p, "reorder", w.reorder);
          c.delays.partitions.push_back(std::move(w));
        }
      }
    }
    if (j.contains("crashes")) {
      for (const auto& cr : j.at("crashes")) {
        reject_unknown(cr, "crash", {"node", "at", "at_round", "recover", "recover_round"});
        CrashPlan plan;
        plan.node = cr.at("node").get<std::uint32_t>();
        // A round-r crash lands halfway between the nominal times of r - 1 and r.
        const double half = static_cast<double>(c.tau) / 2;
        if (cr.contains("at_round")) {
          plan.at = static_cast<double>(cr.at("at_round").get<std::uint64_t>() * c.tau) - half;
        } else {
          read(cr, "at", plan.at);
        }
        if (cr.contains("recover_round")) {
          plan.recover = static_cast<double>(cr.at("recover_round").get<std::uint64_t>() * c.tau) - half;
        } else if (cr.contains("recover")) {
          plan.recover = cr.at("recover").get<double>();
        }
        c.crashes.push_back(plan);
      }
    }
    if (j.contains("byzantine")) {
      for (const auto& b : j.at("byzantine")) {
        reject_unknown(b, "byzantine", {"node", "script"});
        c.byzantine.push_back({b.at("node").get<std::uint32_t>(), b.at("script").get<std::string>()});
      }
    }
    if (j.contains("checks")) {
      const json& ch = j.at("checks");
      reject_unknown(ch, "checks", {"r1", "r2", "r3", "r4", "r5", "tau_growth", "window", "note"});
      read(ch, "r1", c.checks.r1);
      read(ch, "r2", c.checks.r2);
      read(ch, "r3", c.checks.r3);
      read(ch, "r4", c.checks.r4);
      read(ch, "r5", c.checks.r5);
      read(ch, "tau_growth", c.checks.tau_growth);
      read(ch, "window", c.checks.window);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  c.validate();
  return c;
}

json scenario_to_json(const ScenarioConfig& c) {
  json partitions = json::array();
  for (const auto& w : c.delays.partitions) {
    partitions.push_back({{"start", w.start}, {"end", w.end}, {"nodes", w.nodes}, {"drop", w.drop},
                          {"duplicate", w.duplicate}, {"reorder", w.reorder}});
  }
  json crashes = json::array();
  for (const auto& cr : c.crashes) {
    json e = {{"node", cr.node}, {"at", cr.at}};
    if (cr.recover) e["recover"] = *cr.recover;
    crashes.push_back(e);
  }
  json byz = json::array();
  for (const auto& b : c.byzantine) byz.push_back({{"node", b.node}, {"script", b.script}});
  return json{
      {"name", c.name},
      {"seed", c.seed},
      {"rounds", c.rounds},
      {"f_b", c.f_b},
      {"f_c", c.f_c},
      {"participants", c.extra_participants},
      {"mode", to_string(c.mode)},
      {"ciphersuite", c.ciphersuite},
      {"chain", {{"t0", c.t0}, {"tau", c.tau}, {"nbits", c.nbits}, {"future_delta", c.future_delta},
                 {"subsidy", c.subsidy}}},
      {"pbft", {{"lead_delta", c.lead_delta}, {"view_change_timeout", c.view_change_timeout},
                {"view_change", c.view_change}}},
      {"fbft5", {{"session_timeout", c.session_timeout}}},
      {"network", {{"base_latency", c.delays.base_latency}, {"jitter", c.delays.jitter}, {"gst", c.delays.gst},
                   {"delta", c.delays.delta}, {"clock_skew", c.clock_skew}, {"partitions", partitions}}},
      {"crashes", crashes},
      {"byzantine", byz},
      {"allow_excess_faults", c.allow_excess_faults},
      {"txs_per_round", c.txs_per_round},
      {"checks", {{"r1", c.checks.r1}, {"r2", c.checks.r2}, {"r3", c.checks.r3}, {"r4", c.checks.r4},
                  {"r5", c.checks.r5}, {"tau_growth", c.checks.tau_growth}, {"window", c.checks.window}}},
  };
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace poa::harness
