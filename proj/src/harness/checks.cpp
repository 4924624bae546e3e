#include "poa/harness/checks.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include "poa/chain/genesis.hpp"
#include "poa/crypto/schnorr.hpp"
#include "poa/fbft/combinations.hpp"

namespace poa::harness {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxViolations = 100;

struct Header {
  std::size_t offset = 0;
  json config;
  chain::ChainParams params;
  std::uint32_t n = 0;
  std::uint32_t k = 0;
  std::uint32_t nodes = 0;
  std::set<std::uint32_t> byzantine;
  std::set<std::uint32_t> crashed;
  std::uint64_t rounds = 0;

  bool honest(std::uint32_t node) const { return !byzantine.contains(node); }
  bool steady(std::uint32_t node) const { return honest(node) && !crashed.contains(node); }
};

Header read_header(const sim::Trace& trace) {
  const auto& recs = trace.records();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (recs[i].value("ev", "") != "scenario") continue;
    Header h;
    h.offset = i;
    try {
      h.config = recs[i].at("config");
      h.params = chain::genesis_from_json(recs[i].at("genesis"));
      h.n = recs[i].at("n").get<std::uint32_t>();
      h.k = recs[i].at("k").get<std::uint32_t>();
      h.nodes = recs[i].at("nodes").get<std::uint32_t>();
      for (const auto& b : recs[i].at("byzantine")) h.byzantine.insert(b.get<std::uint32_t>());
      for (const auto& c : recs[i].at("crashed")) h.crashed.insert(c.get<std::uint32_t>());
      h.rounds = h.config.at("rounds").get<std::uint64_t>();
    } catch (const json::exception& e) {
      throw std::invalid_argument(std::string("trace header: ") + e.what());
    }
    return h;
  }
  throw std::invalid_argument("trace has no scenario header record");
}

bool is(const json& r, std::string_view ev) {
  auto it = r.find("ev");
  return it != r.end() && it->is_string() && it->get_ref<const std::string&>() == ev;
}

void fail(CheckResult& c, std::size_t offset, std::string detail) {
  c.pass = false;
  if (c.violations.size() < kMaxViolations) c.violations.push_back({offset, std::move(detail)});
}

std::map<std::string, std::string> block_hex_by_hash(const sim::Trace& trace) {
  std::map<std::string, std::string> out;
  for (const auto& r : trace.records()) {
    if (is(r, "block")) out.emplace(r.at("hash").get<std::string>(), r.at("hex").get<std::string>());
  }
  return out;
}

std::string short_hash(const std::string& h) { return h.substr(0, 12); }

}  // namespace

Requirement requirement_from_string(std::string_view s) {
  std::string l(s);
  std::ranges::transform(l, l.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (l == "r1") return Requirement::R1;
  if (l == "r2") return Requirement::R2;
  if (l == "r3") return Requirement::R3;
  if (l == "r4") return Requirement::R4;
  if (l == "r5") return Requirement::R5;
  throw std::invalid_argument("unknown requirement '" + std::string(s) + "' (expected r1..r5)");
}

std::string_view to_string(Requirement r) {
  switch (r) {
    case Requirement::R1: return "r1";
    case Requirement::R2: return "r2";
    case Requirement::R3: return "r3";
    case Requirement::R4: return "r4";
    case Requirement::R5: return "r5";
  }
  return "?";
}

json CheckResult::to_json() const {
  json v = json::array();
  for (const auto& x : violations) v.push_back({{"offset", x.offset}, {"detail", x.detail}});
  return {{"requirement", to_string(requirement)}, {"pass", pass}, {"violations", v}, {"notes", notes}};
}

CheckResult check_correctness(const sim::Trace& trace) {
  const Header h = read_header(trace);
  CheckResult c{Requirement::R1};
  const auto hex = block_hex_by_hash(trace);
  std::map<std::uint32_t, chain::Chain> chains;
  std::size_t checked = 0;
  const auto& recs = trace.records();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const json& r = recs[i];
    if (!is(r, "adopt")) continue;
    const auto node = r.at("node").get<std::uint32_t>();
    if (!h.honest(node)) continue;
    auto it = chains.try_emplace(node, h.params).first;
    const std::string hash = r.at("hash").get<std::string>();
    auto bh = hex.find(hash);
    if (bh == hex.end()) {
      fail(c, i, "node " + std::to_string(node) + " adopted " + short_hash(hash) + " with no block record");
      continue;
    }
    chain::Block b;
    try {
      b = chain::Block::deserialize(from_hex(bh->second));
    } catch (const std::exception& e) {
      fail(c, i, "node " + std::to_string(node) + " adopted undecodable block " + short_hash(hash));
      continue;
    }
    const auto verdict = it->second.append(b, {.template_only = false, .local_clock = r.at("local_clock").get<double>()});
    ++checked;
    if (verdict != chain::RejectReason::Accept || b.height != r.at("height").get<std::uint64_t>() ||
        to_hex(b.hash()) != hash) {
      fail(c, i, "node " + std::to_string(node) + " height " + std::to_string(b.height) + ": adopted block fails " +
                     std::string(chain::to_string(verdict)));
    }
  }
  c.notes["adoptions_checked"] = checked;
  return c;
}

CheckResult check_common_prefix(const sim::Trace& trace) {
  const Header h = read_header(trace);
  CheckResult c{Requirement::R2};
  std::map<std::uint64_t, std::pair<std::string, std::uint32_t>> adopted, committed;
  const auto& recs = trace.records();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const json& r = recs[i];
    const bool adopt = is(r, "adopt");
    if (!adopt && !is(r, "committed_local")) continue;
    const auto node = r.at("node").get<std::uint32_t>();
    if (!h.honest(node)) continue;
    const auto height = r.at("height").get<std::uint64_t>();
    const std::string hash = r.at(adopt ? "hash" : "digest").get<std::string>();
    auto& seen = adopt ? adopted : committed;
    auto [it, fresh] = seen.try_emplace(height, hash, node);
    if (!fresh && it->second.first != hash) {
      fail(c, i, std::string(adopt ? "fork" : "conflicting local commit") + " at height " + std::to_string(height) +
                     ": node " + std::to_string(it->second.second) + " has " + short_hash(it->second.first) +
                     ", node " + std::to_string(node) + " has " + short_hash(hash));
    }
  }
  c.notes["heights"] = adopted.size();
  return c;
}

CheckResult check_chain_growth(const sim::Trace& trace, double tau_growth, std::uint32_t window) {
  const Header h = read_header(trace);
  CheckResult c{Requirement::R3};
  const double t0 = static_cast<double>(h.params.t0);
  const double tau = static_cast<double>(h.params.tau);
  const auto need = static_cast<std::uint64_t>(std::ceil(tau_growth * window - 1e-9));
  c.notes["required_per_window"] = need;
  c.notes["window"] = window;

  std::map<std::uint32_t, std::vector<std::pair<double, std::size_t>>> adopt_times;
  for (std::uint32_t node = 0; node < h.nodes; ++node) {
    if (h.steady(node)) adopt_times[node];
  }
  const auto& recs = trace.records();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (!is(recs[i], "adopt")) continue;
    auto it = adopt_times.find(recs[i].at("node").get<std::uint32_t>());
    if (it != adopt_times.end()) it->second.emplace_back(recs[i].at("t").get<double>(), i);
  }
  double max_gap = 0;
  for (const auto& [node, times] : adopt_times) {
    double last = t0;
    for (const auto& [t, off] : times) {
      max_gap = std::max(max_gap, t - last);
      last = t;
    }
  }
  c.notes["max_gap_seconds"] = max_gap;
  if (h.rounds < window) {
    c.notes["vacuous"] = "fewer rounds than one window";
    return c;
  }
  for (const auto& [node, times] : adopt_times) {
    auto height_at = [&](double t) {
      return static_cast<std::uint64_t>(std::ranges::upper_bound(times, std::make_pair(t, SIZE_MAX)) - times.begin());
    };
    for (std::uint64_t s = 0; s + window <= h.rounds; ++s) {
      const double from = t0 + static_cast<double>(s) * tau;
      const double to = t0 + static_cast<double>(s + window) * tau;
      const std::uint64_t grown = height_at(to) - height_at(from);
      if (grown < need) {
        const auto pos = std::ranges::upper_bound(times, std::make_pair(to, SIZE_MAX)) - times.begin();
        const std::size_t off = pos > 0 ? times[pos - 1].second : h.offset;
        fail(c, off, "node " + std::to_string(node) + " grew " + std::to_string(grown) + " blocks in rounds " +
                         std::to_string(s) + ".." + std::to_string(s + window) + ", needs " + std::to_string(need));
        break;
      }
    }
  }
  return c;
}

CheckResult check_calmness(const sim::Trace& trace) {
  const Header h = read_header(trace);
  CheckResult c{Requirement::R4};
  const double fd = static_cast<double>(h.params.future_delta);
  std::size_t checked = 0;
  const auto& recs = trace.records();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const json& r = recs[i];
    const bool adopt = is(r, "adopt");
    if (!adopt && !is(r, "commit_sent")) continue;
    const auto node = r.at("node").get<std::uint32_t>();
    if (!h.honest(node)) continue;
    ++checked;
    const double ts = r.at("ts").get<double>();
    const double local = r.at("local_clock").get<double>();
    if (ts > local + fd) {
      fail(c, i, std::string(adopt ? "node " : "replica ") + std::to_string(node) + (adopt ? " adopted" : " committed") +
                     " height " + std::to_string(r.at("height").get<std::uint64_t>()) + " stamped " +
                     std::to_string(ts - local) + " s ahead of its clock");
    }
  }
  c.notes["records_checked"] = checked;
  return c;
}

CheckResult check_confidentiality(const sim::Trace& trace) {
  const Header h = read_header(trace);
  CheckResult c{Requirement::R5};
  if (!h.byzantine.empty()) {
    c.notes["vacuous"] = "no fault-free rounds: Byzantine miners configured";
    return c;
  }
  const crypto::Group& g = *h.params.challenge.group;
  const std::size_t width = crypto::SchnorrSignature::encoded_size(g);
  const auto hex = block_hex_by_hash(trace);
  std::set<std::string> done;
  std::set<std::vector<std::uint32_t>> signer_sets;
  std::set<std::size_t> widths;
  const auto& recs = trace.records();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const json& r = recs[i];
    if (is(r, "finalize")) signer_sets.insert(r.at("signers").get<std::vector<std::uint32_t>>());
    if (!is(r, "adopt") || !h.honest(r.at("node").get<std::uint32_t>())) continue;
    const std::string hash = r.at("hash").get<std::string>();
    if (!done.insert(hash).second) continue;
    auto bh = hex.find(hash);
    if (bh == hex.end()) continue;
    const chain::Block b = chain::Block::deserialize(from_hex(bh->second));
    const Bytes* sol = b.solution();
    const std::size_t size = sol ? sol->size() : 0;
    widths.insert(size);
    if (size != width || !crypto::SchnorrSignature::decode(g, *sol)) {
      fail(c, i, "height " + std::to_string(b.height) + ": solution is " + std::to_string(size) +
                     " bytes, not one " + std::to_string(width) + "-byte (R, z) pair");
    }
  }
  c.notes["solutions_checked"] = done.size();
  c.notes["distinct_signer_sets"] = signer_sets.size();
  c.notes["solution_widths"] = widths;
  return c;
}

CheckResult run_check(const sim::Trace& trace, Requirement r) {
  switch (r) {
    case Requirement::R1: return check_correctness(trace);
    case Requirement::R2: return check_common_prefix(trace);
    case Requirement::R3: {
      const Header h = read_header(trace);
      const json& checks = h.config.at("checks");
      return check_chain_growth(trace, checks.at("tau_growth").get<double>(), checks.at("window").get<std::uint32_t>());
    }
    case Requirement::R4: return check_calmness(trace);
    case Requirement::R5: return check_confidentiality(trace);
  }
  throw std::invalid_argument("unknown requirement");
}

json evaluate_trace(const sim::Trace& trace) {
  const Header h = read_header(trace);
  const json& checks = h.config.at("checks");
  const std::string mode = h.config.at("mode").get<std::string>();

  std::map<std::uint32_t, std::uint64_t> heights;
  for (std::uint32_t node = 0; node < h.nodes; ++node) {
    if (h.steady(node)) heights[node] = 0;
  }
  std::set<std::uint64_t> views;
  std::size_t vc_starts = 0, finalize = 0;
  std::map<std::string, std::size_t> rejects;
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> sessions;  // (height, view) -> opened
  std::set<std::uint64_t> signed_heights;
  for (const auto& r : trace.records()) {
    if (is(r, "adopt")) {
      auto it = heights.find(r.at("node").get<std::uint32_t>());
      if (it != heights.end()) it->second = std::max(it->second, r.at("height").get<std::uint64_t>());
    } else if (is(r, "new_view")) {
      views.insert(r.at("view").get<std::uint64_t>());
    } else if (is(r, "view_change")) {
      ++vc_starts;
    } else if (is(r, "finalize")) {
      ++finalize;
    } else if (is(r, "reject") || is(r, "reject_preprepare")) {
      ++rejects[r.at("reason").get<std::string>()];
    } else if (is(r, "session_open")) {
      const auto node = r.at("node").get<std::uint32_t>();
      if (h.honest(node)) ++sessions[{r.at("height").get<std::uint64_t>(), r.at("view").get<std::uint64_t>()}];
    } else if (is(r, "signing_complete")) {
      signed_heights.insert(r.at("height").get<std::uint64_t>());
    }
  }
  std::uint64_t min_h = heights.empty() ? 0 : UINT64_MAX, max_h = 0;
  for (const auto& [node, height] : heights) {
    min_h = std::min(min_h, height);
    max_h = std::max(max_h, height);
  }

  json report{
      {"scenario", h.config.at("name")},
      {"seed", h.config.at("seed")},
      {"mode", mode},
      {"n", h.n},
      {"k", h.k},
      {"rounds", h.rounds},
      {"fault_budget_ok", trace.records()[h.offset].value("fault_budget_ok", true)},
      {"blocks_committed", min_h},
      {"max_height", max_h},
      {"chain_growth_ratio", h.rounds ? static_cast<double>(min_h) / static_cast<double>(h.rounds) : 1.0},
      {"view_changes", views.size()},
      {"view_change_starts", vc_starts},
      {"finalize_events", finalize},
      {"rejects", rejects},
      {"trace_records", trace.size()},
      {"trace_hash", to_hex(trace.hash())},
  };
  if (mode == "fbft3") {
    report["combinations"] = fbft::binomial(h.n, h.k);
    report["shares_per_commit"] = fbft::binomial(h.n - 1, h.k - 1);
  }
  if (mode == "fbft5") {
    const std::uint64_t bound = h.n - h.k + 1;
    std::uint64_t max_s = 0, total = 0, over = 0;
    for (const auto& [key, count] : sessions) {
      max_s = std::max(max_s, count);
      total += count;
      over += count > bound;
    }
    report["sessions"] = {{"bound", bound},
                          {"max_per_block", max_s},
                          {"mean_per_block", sessions.empty() ? 0.0 : static_cast<double>(total) / sessions.size()},
                          {"bound_violations", over},
                          {"signed_heights", signed_heights.size()}};
  }

  json reqs = json::object();
  bool pass = true;
  for (Requirement r : {Requirement::R1, Requirement::R2, Requirement::R3, Requirement::R4, Requirement::R5}) {
    const std::string id(to_string(r));
    const bool enabled = checks.value(id, true);
    json res = run_check(trace, r).to_json();
    res["enabled"] = enabled;
    if (enabled && !res.at("pass").get<bool>()) pass = false;
    reqs[id] = res;
  }
  report["requirements"] = reqs;
  report["pass"] = pass;
  return report;
}

}  // namespace poa::harness
