#include "poa/chain/block.hpp"

#include <cassert>
#include <stdexcept>

#include "poa/crypto/hash.hpp"

namespace poa::chain {

namespace {
constexpr std::uint8_t kFlagCoinbase = 1;
}

Bytes Transaction::serialize(bool with_solution) const {
  Bytes out;
  append_u8(out, is_coinbase ? kFlagCoinbase : 0);
  append_u64(out, subsidy);
  append_sized(out, payload);
  if (with_solution && solution) {
    append_sized(out, *solution);
  } else {
    append_u32(out, 0);
  }
  return out;
}

Transaction Transaction::deserialize(ByteReader& in) {
  Transaction tx;
  const std::uint8_t flags = in.u8();
  if (flags > kFlagCoinbase) throw DecodeError("unknown transaction flags");
  tx.is_coinbase = flags == kFlagCoinbase;
  tx.subsidy = in.u64();
  tx.payload = in.sized();
  Bytes sol = in.sized();
  if (!sol.empty()) tx.solution = std::move(sol);
  return tx;
}

Digest Transaction::txid() const { return crypto::sha256(serialize(false)); }

Transaction Transaction::coinbase(std::uint64_t height, std::uint64_t subsidy, ByteView tag) {
  Transaction tx;
  tx.is_coinbase = true;
  tx.subsidy = subsidy;
  append_u64(tx.payload, height);
  append(tx.payload, tag);
  return tx;
}

std::optional<std::uint64_t> Transaction::coinbase_height() const {
  if (!is_coinbase || payload.size() < 8) return std::nullopt;
  ByteReader r(payload);
  return r.u64();
}

Bytes BlockHeader::serialize() const {
  Bytes out;
  append(out, prev_hash);
  append(out, merkle_root);
  append_u64(out, timestamp);
  append_u32(out, nbits);
  append_u64(out, nonce);
  return out;
}

BlockHeader BlockHeader::deserialize(ByteReader& in) {
  BlockHeader h;
  h.prev_hash = in.digest();
  h.merkle_root = in.digest();
  h.timestamp = in.u64();
  h.nbits = in.u32();
  h.nonce = in.u64();
  return h;
}

Digest BlockHeader::hash() const { return crypto::sha256(serialize()); }

const Bytes* Block::solution() const {
  if (transactions.empty() || !transactions[0].is_coinbase) return nullptr;
  const auto& s = transactions[0].solution;
  return s && !s->empty() ? &*s : nullptr;
}

Bytes Block::serialize() const {
  Bytes out = header.serialize();
  append_u64(out, height);
  append_u32(out, static_cast<std::uint32_t>(transactions.size()));
  for (const auto& tx : transactions) append(out, tx.serialize());
  return out;
}

Block Block::deserialize(ByteView bytes) {
  ByteReader in(bytes);
  Block b;
  b.header = BlockHeader::deserialize(in);
  b.height = in.u64();
  const std::uint32_t count = in.u32();
  if (count > in.remaining()) throw DecodeError("transaction count exceeds input");
  b.transactions.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) b.transactions.push_back(Transaction::deserialize(in));
  in.expect_done();
  return b;
}

Digest merkle_root_excluding_solution(const std::vector<Transaction>& txs) {
  if (txs.empty()) throw std::invalid_argument("merkle root of an empty transaction list");
  std::vector<Digest> level;
  level.reserve(txs.size());
  for (const auto& tx : txs) level.push_back(tx.txid());
  while (level.size() > 1) {
    if (level.size() % 2) level.push_back(level.back());
    std::vector<Digest> next;
    next.reserve(level.size() / 2);
    for (std::size_t i = 0; i < level.size(); i += 2) {
      Bytes pair(level[i].begin(), level[i].end());
      append(pair, level[i + 1]);
      next.push_back(crypto::sha256(pair));
    }
    level = std::move(next);
  }
  return level[0];
}

bool meets_target(const Digest& hash, std::uint32_t nbits) {
  if (nbits > 256) return false;
  for (std::uint32_t bit = 0; bit < nbits; ++bit) {
    if (hash[bit / 8] & (0x80 >> (bit % 8))) return false;
  }
  return true;
}

Block grind(Block block) {
  for (block.header.nonce = 0;; ++block.header.nonce) {
    if (meets_target(block.header.hash(), block.header.nbits)) return block;
  }
}

Block attach_solution(Block block, Bytes solution) {
  if (solution.empty()) throw std::invalid_argument("empty block solution");
  if (block.transactions.empty() || !block.transactions[0].is_coinbase) {
    throw std::invalid_argument("block has no coinbase");
  }
  [[maybe_unused]] const Digest before = block.hash();
  [[maybe_unused]] const Digest root = merkle_root_excluding_solution(block.transactions);
  block.transactions[0].solution = std::move(solution);
  assert(block.hash() == before);
  assert(merkle_root_excluding_solution(block.transactions) == root);
  return block;
}

}  // namespace poa::chain
