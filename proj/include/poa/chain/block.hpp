#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "poa/crypto/bytes.hpp"

namespace poa::chain {

struct Transaction {
  Bytes payload;
  bool is_coinbase = false;
  std::uint64_t subsidy = 0;
  /// Coinbase only: the block solution (an OP_RETURN-style output).
  std::optional<Bytes> solution;

  /// Canonical form. With with_solution=false the solution is replaced by an
  /// empty placeholder, which is the form txids and Merkle roots use.
  Bytes serialize(bool with_solution = true) const;
  static Transaction deserialize(ByteReader& in);

  Digest txid() const;

  /// Coinbase for `height`: payload = u64(height) || tag.
  static Transaction coinbase(std::uint64_t height, std::uint64_t subsidy, ByteView tag = {});
  /// Height encoded in a coinbase payload, if well-formed.
  std::optional<std::uint64_t> coinbase_height() const;
};

struct BlockHeader {
  Digest prev_hash{};
  Digest merkle_root{};
  std::uint64_t timestamp = 0;
  /// Leading zero bits required of the block hash; 0 accepts every hash.
  std::uint32_t nbits = 0;
  std::uint64_t nonce = 0;

  Bytes serialize() const;
  static BlockHeader deserialize(ByteReader& in);
  Digest hash() const;
};

struct Block {
  BlockHeader header;
  std::vector<Transaction> transactions;
  std::uint64_t height = 0;

  Digest hash() const { return header.hash(); }
  /// Solution bytes in the coinbase, or nullptr when absent/empty.
  const Bytes* solution() const;

  Bytes serialize() const;
  /// Throws DecodeError.
  static Block deserialize(ByteView bytes);
};

/// Bitcoin-style binary tree over txids (odd levels duplicate the last node).
/// Coinbase txids use the placeholder form, so solutions never affect it.
/// Throws std::invalid_argument on an empty list.
Digest merkle_root_excluding_solution(const std::vector<Transaction>& txs);

bool meets_target(const Digest& hash, std::uint32_t nbits);

/// Smallest nonce >= 0 whose header hash meets header.nbits.
Block grind(Block block);

/// Places `solution` in the coinbase. Throws std::invalid_argument if it is
/// empty; asserts block hash and Merkle root are unchanged.
Block attach_solution(Block block, Bytes solution);

}  // namespace poa::chain
