#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "poa/chain/genesis.hpp"
#include "poa/frost/keygen.hpp"
#include "poa/harness/checks.hpp"
#include "poa/harness/runner.hpp"

using namespace poa;
using nlohmann::json;

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_requirements(const json& report) {
  for (const auto& [id, r] : report.at("requirements").items()) {
    const bool enabled = r.at("enabled").get<bool>();
    std::cout << id << ": " << (!enabled ? "skipped" : r.at("pass").get<bool>() ? "pass" : "FAIL");
    if (r.at("notes").contains("vacuous")) std::cout << " (" << r.at("notes").at("vacuous").get<std::string>() << ")";
    std::cout << "\n";
    if (!enabled) continue;
    for (const auto& v : r.at("violations")) {
      std::cout << "  @" << v.at("offset").get<std::size_t>() << " " << v.at("detail").get<std::string>() << "\n";
    }
  }
}

int cmd_run(const std::string& scenario, std::optional<std::uint64_t> seed, const std::string& trace_out,
            const std::string& report_out) {
  harness::ScenarioConfig cfg = harness::load_scenario(scenario);
  if (seed) cfg.seed = *seed;
  const harness::RunOutput out = harness::run_scenario(cfg);
  if (!trace_out.empty()) write_file(trace_out, out.trace.to_ndjson());
  if (!report_out.empty()) write_file(report_out, out.report.dump(2) + "\n");
  const json& r = out.report;
  std::cout << cfg.name << " seed=" << cfg.seed << " mode=" << r.at("mode").get<std::string>()
            << " n=" << r.at("n") << " k=" << r.at("k") << " blocks=" << r.at("blocks_committed")
            << "/" << cfg.rounds << " view_changes=" << r.at("view_changes")
            << " trace=" << r.at("trace_hash").get<std::string>().substr(0, 16) << "\n";
  if (!r.at("fault_budget_ok").get<bool>()) std::cout << "note: fault plan exceeds the configured budget\n";
  print_requirements(r);
  std::cout << (out.pass ? "PASS" : "FAIL") << "\n";
  return out.pass ? 0 : 1;
}

int cmd_check(const std::string& trace_file, const std::string& requirement) {
  const sim::Trace trace = sim::Trace::from_ndjson(read_file(trace_file));
  const harness::CheckResult res = harness::run_check(trace, harness::requirement_from_string(requirement));
  std::cout << res.to_json().dump(2) << "\n";
  return res.pass ? 0 : 1;
}

int cmd_keygen(std::uint32_t n, std::uint32_t k, const std::string& suite, std::uint64_t seed,
               const harness::ScenarioConfig& chain_cfg, const std::string& out_path) {
  const crypto::Group& g = crypto::group_by_name(suite);
  Rng rng(seed);
  const auto keys = frost::dkg_run(n, k, g, rng);
  const frost::PublicKeyPackage& pk = keys.begin()->second.public_keys;

  chain::ChainParams params;
  params.t0 = chain_cfg.t0;
  params.tau = chain_cfg.tau;
  params.nbits = chain_cfg.nbits;
  params.future_delta = chain_cfg.future_delta;
  params.subsidy = chain_cfg.subsidy;
  params.challenge.mode = chain::ChallengeMode::AggregateKey;
  params.challenge.group = &g;
  params.challenge.aggregate_key = pk.group_public_key;

  json genesis = chain::genesis_to_json(params);
  json shares = json::object();
  for (const auto& [id, y] : pk.verification_shares) shares[frost::to_string(id)] = to_hex(y.encode());
  genesis["frost"] = {{"n", n}, {"k", k}, {"verification_shares", shares}};
  const std::string text = genesis.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proof-of-authority chain simulator"};
  app.require_subcommand(1);

  std::string scenario, trace_out, report_out;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run a scenario and evaluate its checks");
  run->add_option("scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--trace-out", trace_out, "Write the NDJSON trace here");
  run->add_option("--report-out", report_out, "Write the JSON report here");

  std::string trace_file, requirement;
  auto* check = app.add_subcommand("check", "Re-check one requirement on a saved trace");
  check->add_option("trace", trace_file, "NDJSON trace file")->required()->check(CLI::ExistingFile);
  check->add_option("--requirement", requirement, "r1..r5")
      ->required()
      ->check(CLI::IsMember({"r1", "r2", "r3", "r4", "r5"}, CLI::ignore_case));

  std::uint32_t n = 0, k = 0;
  std::string suite = "curve", out_path;
  std::uint64_t key_seed = 1;
  harness::ScenarioConfig chain_cfg;
  auto* keygen = app.add_subcommand("keygen", "Run a DKG and emit a genesis file");
  keygen->add_option("--n", n, "Signers")->required()->check(CLI::Range(1u, 1000u));
  keygen->add_option("--k", k, "Threshold")->required()->check(CLI::Range(1u, 1000u));
  keygen->add_option("--ciphersuite", suite)->check(CLI::IsMember({"tiny", "curve"}));
  keygen->add_option("--seed", key_seed);
  keygen->add_option("--t0", chain_cfg.t0);
  keygen->add_option("--tau", chain_cfg.tau);
  keygen->add_option("--nbits", chain_cfg.nbits);
  keygen->add_option("--out", out_path, "Write here instead of stdout");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(scenario, seed, trace_out, report_out);
    if (*check) return cmd_check(trace_file, requirement);
    if (k > n) throw std::invalid_argument("--k must not exceed --n");
    return cmd_keygen(n, k, suite, key_seed, chain_cfg, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
