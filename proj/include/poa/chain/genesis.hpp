#pragma once

#include "json.hpp"
#include "poa/chain/chain.hpp"

namespace poa::chain {

/// {"ciphersuite", "challenge": {"mode", "aggregate_key" | "signer_keys" + "required"},
///  "t0", "tau", "nbits", "future_delta", "subsidy", "payload_budget", "genesis_hash"}
nlohmann::json genesis_to_json(const ChainParams& params);

/// Throws std::invalid_argument on missing fields or undecodable keys, and
/// when a present "genesis_hash" does not match the rebuilt genesis block.
ChainParams genesis_from_json(const nlohmann::json& j);

}  // namespace poa::chain
