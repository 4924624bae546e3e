#include "poa/chain/chain.hpp"

#include <sstream>

#include "poa/crypto/schnorr.hpp"

namespace poa::chain {

std::string_view to_string(ChallengeMode m) {
  return m == ChallengeMode::AggregateKey ? "aggregate-key" : "multisig";
}

ChallengeMode challenge_mode_from_string(std::string_view s) {
  if (s == "aggregate-key") return ChallengeMode::AggregateKey;
  if (s == "multisig") return ChallengeMode::Multisig;
  throw std::invalid_argument("unknown challenge mode: " + std::string(s));
}

bool BlockChallenge::satisfied_by(const Digest& block_hash, ByteView solution) const {
  if (!group || solution.empty()) return false;
  if (mode == ChallengeMode::AggregateKey) {
    return crypto::schnorr_verify(aggregate_key, block_hash, solution);
  }
  const std::size_t entry = 1 + crypto::SchnorrSignature::encoded_size(*group);
  if (required == 0 || solution.size() != entry * required) return false;
  int last = -1;
  for (std::size_t off = 0; off < solution.size(); off += entry) {
    const int idx = solution[off];
    if (idx <= last || static_cast<std::size_t>(idx) >= signer_keys.size()) return false;
    last = idx;
    if (!crypto::schnorr_verify(signer_keys[idx], block_hash, solution.subspan(off + 1, entry - 1))) return false;
  }
  return true;
}

Bytes encode_multisig_solution(const std::vector<std::pair<std::uint8_t, Bytes>>& sigs) {
  Bytes out;
  for (const auto& [idx, sig] : sigs) {
    append_u8(out, idx);
    append(out, sig);
  }
  return out;
}

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::Accept: return "accept";
    case RejectReason::Duplicate: return "duplicate";
    case RejectReason::ConflictingHeight: return "conflicting-height";
    case RejectReason::BadHeight: return "bad-height";
    case RejectReason::BadPrev: return "bad-prev";
    case RejectReason::BadCoinbase: return "bad-coinbase";
    case RejectReason::DuplicateTx: return "duplicate-tx";
    case RejectReason::BadMerkle: return "bad-merkle";
    case RejectReason::BadTimestamp: return "bad-timestamp";
    case RejectReason::FutureTimestamp: return "future-timestamp";
    case RejectReason::BadGrind: return "bad-grind";
    case RejectReason::MissingSolution: return "missing-solution";
    case RejectReason::BadSolution: return "bad-solution";
  }
  return "unknown";
}

Block make_genesis(const ChainParams& params) {
  Block b;
  b.height = 0;
  b.transactions.push_back(Transaction::coinbase(0, params.subsidy, as_bytes("genesis")));
  b.header.merkle_root = merkle_root_excluding_solution(b.transactions);
  b.header.timestamp = params.t0;
  b.header.nbits = params.nbits;
  return grind(std::move(b));
}

Chain::Chain(ChainParams params) : params_(std::move(params)) {
  blocks_.push_back(make_genesis(params_));
  hashes_.push_back(blocks_.back().hash());
  tip_hash_ = hashes_.back();
}

RejectReason Chain::validate(const Block& block, const ValidationOptions& opts) const {
  const Digest hash = block.hash();
  if (block.height <= height()) {
    return hashes_[block.height] == hash ? RejectReason::Duplicate : RejectReason::ConflictingHeight;
  }
  if (block.height != height() + 1) return RejectReason::BadHeight;
  if (block.header.prev_hash != tip_hash_) return RejectReason::BadPrev;

  const auto& txs = block.transactions;
  if (txs.empty() || !txs[0].is_coinbase || txs[0].coinbase_height() != block.height) {
    return RejectReason::BadCoinbase;
  }
  std::set<Digest> ids;
  for (std::size_t i = 0; i < txs.size(); ++i) {
    if (i > 0 && (txs[i].is_coinbase || txs[i].solution)) return RejectReason::BadCoinbase;
    if (!ids.insert(txs[i].txid()).second) return RejectReason::DuplicateTx;
  }
  if (merkle_root_excluding_solution(txs) != block.header.merkle_root) return RejectReason::BadMerkle;
  if (block.header.timestamp != params_.nominal_timestamp(block.height)) return RejectReason::BadTimestamp;
  if (opts.local_clock &&
      static_cast<double>(block.header.timestamp) > *opts.local_clock + static_cast<double>(params_.future_delta)) {
    return RejectReason::FutureTimestamp;
  }
  if (block.header.nbits != params_.nbits || !meets_target(hash, block.header.nbits)) return RejectReason::BadGrind;
  if (opts.template_only) return RejectReason::Accept;
  const Bytes* sol = block.solution();
  if (!sol) return RejectReason::MissingSolution;
  if (!params_.challenge.satisfied_by(hash, *sol)) return RejectReason::BadSolution;
  return RejectReason::Accept;
}

RejectReason Chain::append(const Block& block, const ValidationOptions& opts) {
  ValidationOptions full = opts;
  full.template_only = false;
  const RejectReason r = validate(block, full);
  if (r != RejectReason::Accept) return r;
  blocks_.push_back(block);
  hashes_.push_back(block.hash());
  tip_hash_ = hashes_.back();
  return r;
}

std::string Chain::dump() const {
  std::string out;
  for (const auto& b : blocks_) {
    out += to_hex(b.serialize());
    out += '\n';
  }
  return out;
}

Chain load_chain_dump(const ChainParams& params, std::string_view text) {
  Chain chain(params);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const Block b = Block::deserialize(from_hex(line));
    if (lineno == 1) {
      if (b.hash() != chain.tip_hash()) throw std::runtime_error("line 1: genesis mismatch");
      continue;
    }
    const RejectReason r = chain.append(b);
    if (r != RejectReason::Accept) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": " + std::string(to_string(r)));
    }
  }
  return chain;
}

bool Mempool::add(Transaction tx) {
  if (tx.is_coinbase || tx.solution) return false;
  if (!ids_.insert(tx.txid()).second) return false;
  txs_.push_back(std::move(tx));
  return true;
}

void Mempool::remove_included(const Block& block) {
  std::set<Digest> gone;
  for (const auto& tx : block.transactions) {
    if (!tx.is_coinbase) gone.insert(tx.txid());
  }
  if (gone.empty()) return;
  std::deque<Transaction> kept;
  for (auto& tx : txs_) {
    const Digest id = tx.txid();
    if (gone.contains(id)) {
      ids_.erase(id);
    } else {
      kept.push_back(std::move(tx));
    }
  }
  txs_ = std::move(kept);
}

Block build_template(const Chain& chain, const Mempool& mempool, std::uint64_t height, ByteView coinbase_tag) {
  if (height != chain.height() + 1) {
    throw StaleTemplateError("template for height " + std::to_string(height) + " on tip " +
                             std::to_string(chain.height()));
  }
  const ChainParams& p = chain.params();
  Block b;
  b.height = height;
  b.transactions.push_back(Transaction::coinbase(height, p.subsidy, coinbase_tag));
  std::size_t used = 0;
  for (const auto& tx : mempool.pending()) {
    if (used + tx.payload.size() > p.payload_budget) break;
    used += tx.payload.size();
    b.transactions.push_back(tx);
  }
  b.header.prev_hash = chain.tip_hash();
  b.header.merkle_root = merkle_root_excluding_solution(b.transactions);
  b.header.timestamp = p.nominal_timestamp(height);
  b.header.nbits = p.nbits;
  return b;
}

}  // namespace poa::chain
