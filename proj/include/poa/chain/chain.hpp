#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "poa/chain/block.hpp"
#include "poa/crypto/group.hpp"

namespace poa::chain {

enum class ChallengeMode { AggregateKey, Multisig };

std::string_view to_string(ChallengeMode m);
ChallengeMode challenge_mode_from_string(std::string_view s);

/// Validity predicate fixed at genesis. The signed message is always the block hash.
struct BlockChallenge {
  ChallengeMode mode = ChallengeMode::AggregateKey;
  const crypto::Group* group = nullptr;
  crypto::Element aggregate_key;
  /// Multisig mode: solution is `required` entries of u8(key index) || sig,
  /// indices strictly ascending.
  std::vector<crypto::Element> signer_keys;
  std::uint32_t required = 0;

  bool satisfied_by(const Digest& block_hash, ByteView solution) const;
};

/// Packs (index, signature) pairs in the multisig solution format.
Bytes encode_multisig_solution(const std::vector<std::pair<std::uint8_t, Bytes>>& sigs);

struct ChainParams {
  std::uint64_t t0 = 1700000000;
  std::uint64_t tau = 60;
  std::uint32_t nbits = 1;
  std::uint64_t future_delta = 30;
  std::uint64_t subsidy = 50;
  std::size_t payload_budget = 1 << 20;
  BlockChallenge challenge;

  std::uint64_t nominal_timestamp(std::uint64_t height) const { return t0 + height * tau; }
};

enum class RejectReason {
  Accept,
  Duplicate,
  ConflictingHeight,
  BadHeight,
  BadPrev,
  BadCoinbase,
  DuplicateTx,
  BadMerkle,
  BadTimestamp,
  FutureTimestamp,
  BadGrind,
  MissingSolution,
  BadSolution,
};

std::string_view to_string(RejectReason r);

struct ValidationOptions {
  /// Skip the solution check (pre-prepare templates are unsigned).
  bool template_only = false;
  /// When set, blocks stamped later than local_clock + future_delta are refused.
  std::optional<double> local_clock;
};

Block make_genesis(const ChainParams& params);

/// Append-only, fork-free chain: a block at an occupied height is refused
/// rather than reorganized.
class Chain {
 public:
  explicit Chain(ChainParams params);

  const ChainParams& params() const { return params_; }
  std::uint64_t height() const { return blocks_.size() - 1; }
  const Block& tip() const { return blocks_.back(); }
  Digest tip_hash() const { return tip_hash_; }
  const Block& at(std::uint64_t height) const { return blocks_.at(height); }
  Digest hash_at(std::uint64_t height) const { return hashes_.at(height); }
  const std::vector<Block>& blocks() const { return blocks_; }

  RejectReason validate(const Block& block, const ValidationOptions& opts = {}) const;
  /// Validates then appends. Returns the verdict.
  RejectReason append(const Block& block, const ValidationOptions& opts = {});

  /// One hex-encoded block per line, genesis first.
  std::string dump() const;

 private:
  ChainParams params_;
  std::vector<Block> blocks_;
  std::vector<Digest> hashes_;
  Digest tip_hash_{};
};

/// Re-reads a dump() and re-validates every block against `params`.
/// Throws std::runtime_error naming the failing line.
Chain load_chain_dump(const ChainParams& params, std::string_view text);

class StaleTemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// FIFO mempool of non-coinbase transactions, deduplicated by txid.
class Mempool {
 public:
  bool add(Transaction tx);
  /// Drops every transaction included in `block`.
  void remove_included(const Block& block);
  const std::deque<Transaction>& pending() const { return txs_; }
  std::size_t size() const { return txs_.size(); }

 private:
  std::deque<Transaction> txs_;
  std::set<Digest> ids_;
};

/// Unsigned, unground template for `height` with finalized Merkle root and
/// timestamp T0 + height * tau. Throws StaleTemplateError unless
/// height == chain.height() + 1.
Block build_template(const Chain& chain, const Mempool& mempool, std::uint64_t height, ByteView coinbase_tag = {});

}  // namespace poa::chain
