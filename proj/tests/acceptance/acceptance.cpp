// One line per acceptance criterion; exit status 0 iff every line passes.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "poa/chain/block.hpp"
#include "poa/fbft/combinations.hpp"
#include "poa/frost/keygen.hpp"
#include "poa/frost/signing.hpp"
#include "poa/harness/checks.hpp"
#include "poa/harness/runner.hpp"
#include "poa/pbft/config.hpp"

using namespace poa;
using namespace poa::harness;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Every scenario run is remembered so criterion 12 can replay it.
struct Ran {
  std::string label;
  ScenarioConfig config;
  Digest hash;
};
std::vector<Ran> ran;

RunOutput run(const std::string& label, const ScenarioConfig& cfg) {
  RunOutput out = run_scenario(cfg);
  ran.push_back({label, cfg, out.trace.hash()});
  return out;
}

ScenarioConfig bundled(const std::string& name) { return load_scenario(std::string(POA_SCENARIO_DIR "/") + name + ".json"); }

bool req(const json& report, const std::string& id) { return report.at("requirements").at(id).at("pass").get<bool>(); }

std::size_t count(const sim::Trace& t, std::string_view ev) {
  std::size_t n = 0;
  for (const auto& r : t.records()) n += r.value("ev", "") == ev;
  return n;
}

std::set<std::uint32_t> byzantine_of(const ScenarioConfig& c) {
  std::set<std::uint32_t> out;
  for (const auto& b : c.byzantine) out.insert(b.node);
  return out;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome quorum_arithmetic() {
  const auto start = std::chrono::steady_clock::now();
  bool ok = pbft::quorum_sizes(1, 1).n == 6 && pbft::quorum_sizes(1, 1).q == 4;
  int checked = 0;
  for (int b = 0; b <= 3; ++b) {
    for (int c = 0; c <= 3; ++c) {
      const auto s = pbft::quorum_sizes(b, c);
      const auto need = static_cast<std::uint32_t>(s.n + b + 1 + 1) / 2;  // ceil((N + F_B + 1) / 2)
      ok = ok && s.q == need && s.n - s.q == static_cast<std::uint32_t>(b + c);
      ++checked;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {ok && secs < 1, fmt("(1,1)->(%u,%u), %d (F_B,F_C) pairs, %.3fs", pbft::quorum_sizes(1, 1).n,
                              pbft::quorum_sizes(1, 1).q, checked, secs)};
}

Outcome frost_exhaustive() {
  const auto start = std::chrono::steady_clock::now();
  const crypto::Group& g = crypto::tiny_group();
  Rng rng(0xf057);
  std::size_t sigs = 0, failures = 0;
  for (std::uint32_t n = 1; n <= 6; ++n) {
    for (std::uint32_t k = 1; k <= std::min(n, 4u); ++k) {
      const auto keys = frost::dkg_run(n, k, g, rng);
      const frost::PublicKeyPackage& pub = keys.begin()->second.public_keys;
      for (const auto& subset : fbft::enumerate_combinations(n, k)) {
        for (int m = 0; m < 20; ++m) {
          Bytes msg(8);
          rng.fill(msg);
          std::map<std::uint32_t, frost::NonceCommitmentPair> nonces;
          std::vector<frost::CommitmentEntry> entries;
          for (std::uint32_t id : subset) {
            auto p = frost::preprocess(1, keys.at({id}), rng).front();
            entries.push_back({{id}, p.D, p.E});
            nonces.emplace(id, p);
          }
          const frost::CommitmentList list(entries);
          std::vector<frost::SignatureShare> shares;
          for (std::uint32_t id : subset) shares.push_back(frost::sign_share(keys.at({id}), nonces.at(id), msg, list));
          const auto sig = frost::aggregate(shares, list, msg, pub);
          ++sigs;
          failures += !crypto::schnorr_verify(pub.group_public_key, msg, sig);
        }
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {failures == 0 && secs < 30, fmt("%zu aggregate signatures, %zu failures, %.2fs", sigs, failures, secs)};
}

Outcome share_soundness() {
  const crypto::Group& g = crypto::tiny_group();
  Rng rng(0x5a5a);
  const auto keys = frost::dkg_run(4, 3, g, rng);
  const frost::PublicKeyPackage& pub = keys.begin()->second.public_keys;
  const Bytes msg = from_hex("c0ffee");
  std::map<std::uint32_t, frost::NonceCommitmentPair> nonces;
  std::vector<frost::CommitmentEntry> entries;
  for (std::uint32_t id : {1u, 2u, 4u}) {
    auto p = frost::preprocess(1, keys.at({id}), rng).front();
    entries.push_back({{id}, p.D, p.E});
    nonces.emplace(id, p);
  }
  const frost::CommitmentList list(entries);
  std::size_t tried = 0, false_accepts = 0, honest_ok = 0;
  for (std::uint32_t id : {1u, 2u, 4u}) {
    const auto honest = frost::sign_share(keys.at({id}), nonces.at(id), msg, list);
    honest_ok += frost::verify_share(honest, list, msg, pub);
    for (std::uint64_t z = 0; z < crypto::TinyParams::q; ++z) {
      const crypto::Scalar alt = g.scalar(z);
      if (alt == honest.z) continue;
      ++tried;
      false_accepts += frost::verify_share({honest.signer, alt}, list, msg, pub);
    }
  }
  return {false_accepts == 0 && honest_ok == 3,
          fmt("%zu perturbed shares, %zu false accepts, %zu/3 honest accepted", tried, false_accepts, honest_ok)};
}

Outcome fbft3_end_to_end() {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioConfig cfg = bundled("fbft3-small");
  const RunOutput out = run("fbft3-small", cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const json& r = out.report;
  std::size_t commits = 0, wrong = 0;
  for (const auto& rec : out.trace.records()) {
    if (rec.value("ev", "") != "commit_shares") continue;
    ++commits;
    wrong += rec.at("shares").get<std::size_t>() != 3;
  }
  const bool ok = cfg.n() == 4 && cfg.k() == 3 && !cfg.crashes.empty() && r.at("blocks_committed") == 50 &&
                  req(r, "r1") && req(r, "r2") && r.at("combinations") == 4 &&
                  fbft::enumerate_combinations(4, 3).size() == 4 && commits > 0 && wrong == 0 &&
                  r.at("requirements").at("r5").at("notes").at("solutions_checked") == 50 && secs < 30;
  return {ok, fmt("%d blocks, gamma=%d, %zu commits all carrying 3 shares (%zu not), %.2fs",
                  r.at("blocks_committed").get<int>(), r.at("combinations").get<int>(), commits, wrong, secs)};
}

Outcome roast_bound() {
  bool ok = true;
  std::string detail;
  for (std::uint32_t f = 1; f <= 4; ++f) {
    ScenarioConfig cfg;
    cfg.name = "roast-f" + std::to_string(f);
    cfg.seed = 100 + f;
    cfg.rounds = 50;
    cfg.f_b = 1;
    cfg.f_c = 1;
    cfg.mode = ProtocolMode::Fbft5;
    cfg.allow_excess_faults = true;
    for (std::uint32_t i = 1; i <= f; ++i) cfg.byzantine.push_back({i, "mute"});
    const RunOutput out = run(cfg.name, cfg);
    const json& s = out.report.at("sessions");
    const bool this_ok = cfg.n() == 6 && cfg.k() == 2 && s.at("bound") == 5 && s.at("bound_violations") == 0 &&
                         s.at("max_per_block").get<int>() <= 5 && s.at("signed_heights") == 50 &&
                         out.report.at("blocks_committed") == 50;
    ok = ok && this_ok;
    detail += fmt("%sf=%u max %d", f > 1 ? ", " : "", f, s.at("max_per_block").get<int>());
  }
  return {ok, detail + " sessions per block (bound 5)"};
}

Outcome equivocation_safety() {
  const ScenarioConfig cfg = bundled("equivocation");
  const RunOutput out = run("equivocation", cfg);
  // Forks among correct nodes, counted independently of the R2 checker.
  const auto byz = byzantine_of(cfg);
  std::map<std::uint64_t, std::set<std::string>> adopted, committed;
  for (const auto& r : out.trace.records()) {
    const std::string ev = r.value("ev", "");
    if (ev != "adopt" && ev != "committed_local") continue;
    if (byz.contains(r.at("node").get<std::uint32_t>())) continue;
    auto& m = ev == "adopt" ? adopted : committed;
    m[r.at("height").get<std::uint64_t>()].insert(r.at(ev == "adopt" ? "hash" : "digest").get<std::string>());
  }
  std::size_t forks = 0, conflicts = 0;
  for (const auto& [h, s] : adopted) forks += s.size() > 1;
  for (const auto& [h, s] : committed) conflicts += s.size() > 1;
  const std::size_t eq = count(out.trace, "equivocate");
  const bool ok = cfg.rounds == 100 && eq > 0 && forks == 0 && conflicts == 0 && req(out.report, "r2");
  return {ok, fmt("%zu equivocations, %zu forks, %zu conflicting local commits, %d blocks", eq, forks, conflicts,
                  out.report.at("blocks_committed").get<int>())};
}

Outcome calmness_attack() {
  const ScenarioConfig cfg = bundled("calmness-attack");
  const RunOutput out = run("calmness-attack", cfg);
  const auto byz = byzantine_of(cfg);
  std::set<std::string> flooded;
  for (const auto& r : out.trace.records()) {
    if (r.value("ev", "") == "premature_flood") {
      for (const auto& h : r.at("hashes")) flooded.insert(h.get<std::string>());
    }
  }
  std::size_t accepted = 0;
  for (const auto& r : out.trace.records()) {
    if (r.value("ev", "") != "adopt" || byz.contains(r.at("node").get<std::uint32_t>())) continue;
    accepted += flooded.contains(r.at("hash").get<std::string>());
  }
  const json& rej = out.report.at("rejects");
  const std::size_t refused = rej.value("future-timestamp", 0u) + rej.value("not-primary", 0u);
  const bool ok = cfg.rounds == 100 && !flooded.empty() && accepted == 0 && refused > 0 && req(out.report, "r4");
  return {ok, fmt("%zu premature blocks flooded, %zu accepted, %zu refusals, %d honest blocks", flooded.size(),
                  accepted, refused, out.report.at("blocks_committed").get<int>())};
}

Outcome nonce_tweak() {
  const ScenarioConfig cfg = bundled("nonce-fork-attack");
  const RunOutput out = run("nonce-fork-attack", cfg);
  const auto byz = byzantine_of(cfg);
  std::set<std::string> tweaked;
  for (const auto& r : out.trace.records()) {
    if (r.value("ev", "") == "nonce_tweak") tweaked.insert(r.at("tweaked").get<std::string>());
  }
  std::size_t adopted = 0;
  for (const auto& r : out.trace.records()) {
    if (r.value("ev", "") != "adopt" || byz.contains(r.at("node").get<std::uint32_t>())) continue;
    adopted += tweaked.contains(r.at("hash").get<std::string>());
  }
  const std::size_t bad_sol = out.report.at("rejects").value("bad-solution", 0u);
  const bool ok = tweaked.size() == cfg.rounds && adopted == 0 && bad_sol > 0 && req(out.report, "r2") &&
                  out.report.at("blocks_committed") == cfg.rounds;
  return {ok, fmt("%zu tweaked blocks, %zu adopted by correct nodes, %zu bad-solution rejections", tweaked.size(),
                  adopted, bad_sol)};
}

Outcome solution_independence() {
  Rng rng(0x1000);
  std::size_t mismatches = 0, sensitive = 0;
  for (int i = 0; i < 1000; ++i) {
    chain::Block b;
    b.height = rng.uniform(1000) + 1;
    b.transactions.push_back(chain::Transaction::coinbase(b.height, rng.uniform(100), {}));
    for (std::uint64_t t = rng.uniform(5); t > 0; --t) {
      Bytes p(rng.uniform(64) + 1);
      rng.fill(p);
      b.transactions.push_back({p, false, 0, std::nullopt});
    }
    rng.fill(b.header.prev_hash);
    b.header.merkle_root = chain::merkle_root_excluding_solution(b.transactions);
    b.header.timestamp = rng.next();
    b.header.nbits = static_cast<std::uint32_t>(rng.uniform(8));
    b.header.nonce = rng.next();
    Bytes s1(rng.uniform(200) + 1), s2(rng.uniform(200) + 1);
    rng.fill(s1);
    rng.fill(s2);
    const chain::Block a = chain::attach_solution(b, s1), c = chain::attach_solution(b, s2);
    const bool same = a.hash() == c.hash() && a.hash() == b.hash() &&
                      chain::merkle_root_excluding_solution(a.transactions) ==
                          chain::merkle_root_excluding_solution(c.transactions) &&
                      chain::merkle_root_excluding_solution(a.transactions) == b.header.merkle_root;
    mismatches += !same;
    // The hash does react to the header, so the comparison above is not vacuous.
    chain::Block d = a;
    ++d.header.nonce;
    sensitive += d.hash() != a.hash();
  }
  return {mismatches == 0 && sensitive == 1000,
          fmt("1000 pairs, %zu hash/root mismatches, nonce sensitivity %zu/1000", mismatches, sensitive)};
}

Outcome confidentiality_differential() {
  auto fault_free = [](ProtocolMode m, std::uint64_t seed) {
    ScenarioConfig c;
    c.name = std::string("confidentiality-") + std::string(to_string(m));
    c.seed = seed;
    c.rounds = 30;
    c.mode = m;
    return c;
  };
  const RunOutput plain = run("plain", fault_free(ProtocolMode::PlainConcat, 61));
  const RunOutput f5 = run("fbft5", fault_free(ProtocolMode::Fbft5, 62));
  const RunOutput f3 = run("fbft3", fault_free(ProtocolMode::Fbft3, 63));
  std::set<std::vector<std::uint32_t>> subsets;
  std::set<std::size_t> widths;
  for (const RunOutput* o : {&f5, &f3}) {
    for (const auto& r : o->trace.records()) {
      if (r.value("ev", "") == "finalize") subsets.insert(r.at("signers").get<std::vector<std::uint32_t>>());
    }
    for (const auto& w : o->report.at("requirements").at("r5").at("notes").at("solution_widths")) {
      widths.insert(w.get<std::size_t>());
    }
  }
  const bool ok = !req(plain.report, "r5") && req(f5.report, "r5") && req(f3.report, "r5") && subsets.size() >= 3 &&
                  widths.size() == 1;
  return {ok, fmt("plain-concat %s, fbft5 %s, fbft3 %s; %zu signer subsets, %zu solution width(s)",
                  req(plain.report, "r5") ? "passes" : "fails", req(f5.report, "r5") ? "passes" : "fails",
                  req(f3.report, "r5") ? "passes" : "fails", subsets.size(), widths.size())};
}

Outcome view_change_liveness() {
  const ScenarioConfig cfg = bundled("primary-crash");
  const RunOutput out = run("primary-crash", cfg);
  const double crash_at = static_cast<double>(cfg.t0) + cfg.crashes.at(0).at;
  // First block a surviving node adopts after the crash.
  double resumed = -1;
  for (const auto& r : out.trace.records()) {
    if (r.value("ev", "") == "adopt" && r.at("node") != cfg.crashes[0].node && r.at("t").get<double>() > crash_at) {
      resumed = r.at("t").get<double>();
      break;
    }
  }
  const double stall = resumed - crash_at;
  const bool ok = cfg.n() == 6 && cfg.crashes[0].node == 0 && resumed > 0 && stall <= 2 * cfg.view_change_timeout &&
                  out.report.at("view_changes").get<int>() >= 1 && req(out.report, "r3") &&
                  out.report.at("blocks_committed") == cfg.rounds;
  return {ok, fmt("growth resumed %.1fs after the crash (limit %.0fs), %d blocks, r3 at tau_growth %.2f",
                  stall, 2 * cfg.view_change_timeout, out.report.at("blocks_committed").get<int>(),
                  cfg.checks.tau_growth)};
}

Outcome determinism() {
  std::size_t same = 0;
  std::string bad;
  const std::vector<Ran> first = ran;
  for (const Ran& r : first) {
    if (run_scenario(r.config).trace.hash() == r.hash) {
      ++same;
    } else {
      bad += " " + r.label;
    }
  }
  return {same == first.size() && !first.empty(),
          fmt("%zu/%zu scenario reruns reproduce their trace hash%s", same, first.size(), bad.c_str())};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"quorum arithmetic", quorum_arithmetic},
      {"FROST aggregate correctness, exhaustive", frost_exhaustive},
      {"share soundness", share_soundness},
      {"3-FBFT end to end", fbft3_end_to_end},
      {"FBFT5 session bound", roast_bound},
      {"safety under an equivocating primary", equivocation_safety},
      {"calmness attack", calmness_attack},
      {"nonce-tweak fork attack", nonce_tweak},
      {"solution independence", solution_independence},
      {"confidentiality differential", confidentiality_differential},
      {"liveness through view change", view_change_liveness},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria pass" << std::endl;
  return failed == 0 ? 0 : 1;
}
