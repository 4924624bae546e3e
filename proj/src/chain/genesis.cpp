#include "poa/chain/genesis.hpp"

namespace poa::chain {

using nlohmann::json;

namespace {

crypto::Element decode_key(const crypto::Group& g, const json& v) {
  auto e = g.decode_element(from_hex(v.get<std::string>()));
  if (!e) throw std::invalid_argument("genesis: undecodable group element " + v.dump());
  return *e;
}

}  // namespace

json genesis_to_json(const ChainParams& p) {
  const BlockChallenge& c = p.challenge;
  if (!c.group) throw std::invalid_argument("genesis: challenge has no ciphersuite");
  json challenge = {{"mode", to_string(c.mode)}};
  if (c.mode == ChallengeMode::AggregateKey) {
    challenge["aggregate_key"] = to_hex(c.aggregate_key.encode());
  } else {
    json keys = json::array();
    for (const auto& k : c.signer_keys) keys.push_back(to_hex(k.encode()));
    challenge["signer_keys"] = keys;
    challenge["required"] = c.required;
  }
  return json{
      {"ciphersuite", std::string(c.group->name())},
      {"challenge", challenge},
      {"t0", p.t0},
      {"tau", p.tau},
      {"nbits", p.nbits},
      {"future_delta", p.future_delta},
      {"subsidy", p.subsidy},
      {"payload_budget", p.payload_budget},
      {"genesis_hash", to_hex(make_genesis(p).hash())},
  };
}

ChainParams genesis_from_json(const json& j) {
  try {
    ChainParams p;
    const crypto::Group& g = crypto::group_by_name(j.at("ciphersuite").get<std::string>());
    p.t0 = j.at("t0").get<std::uint64_t>();
    p.tau = j.at("tau").get<std::uint64_t>();
    p.nbits = j.at("nbits").get<std::uint32_t>();
    p.future_delta = j.at("future_delta").get<std::uint64_t>();
    p.subsidy = j.value("subsidy", p.subsidy);
    p.payload_budget = j.value("payload_budget", p.payload_budget);
    if (p.tau == 0) throw std::invalid_argument("genesis: tau must be positive");
    if (p.nbits > 32) throw std::invalid_argument("genesis: nbits above 32 is not an easy target");

    const json& c = j.at("challenge");
    p.challenge.group = &g;
    p.challenge.mode = challenge_mode_from_string(c.at("mode").get<std::string>());
    if (p.challenge.mode == ChallengeMode::AggregateKey) {
      p.challenge.aggregate_key = decode_key(g, c.at("aggregate_key"));
    } else {
      for (const auto& k : c.at("signer_keys")) p.challenge.signer_keys.push_back(decode_key(g, k));
      p.challenge.required = c.at("required").get<std::uint32_t>();
      if (p.challenge.required == 0 || p.challenge.required > p.challenge.signer_keys.size() ||
          p.challenge.signer_keys.size() > 256) {
        throw std::invalid_argument("genesis: inconsistent multisig key set");
      }
    }
    if (j.contains("genesis_hash") && j.at("genesis_hash").get<std::string>() != to_hex(make_genesis(p).hash())) {
      throw std::invalid_argument("genesis: genesis_hash does not match parameters");
    }
    return p;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("genesis: ") + e.what());
  }
}

}  // namespace poa::chain
