#pragma once

#include <functional>
#include <map>
#include <set>

#include "json.hpp"
#include "poa/chain/chain.hpp"

namespace poa::chain {

enum class GossipKind : std::uint8_t { Block = 1, GetBlocks = 2, Tx = 3 };

class GossipContext {
 public:
  virtual ~GossipContext() = default;
  virtual void send(std::uint32_t peer, const Bytes& msg) = 0;
  virtual double local_clock() const = 0;
  virtual void schedule(double local_time, std::function<void()> fn) = 0;
  virtual void trace(nlohmann::json rec) = 0;
};

/// Block-chain participant: validates, adopts and floods blocks and
/// transactions to its peers. Invalid blocks are never relayed.
class Participant {
 public:
  Participant(std::uint32_t id, ChainParams params, std::vector<std::uint32_t> peers, GossipContext& ctx);

  void on_message(std::uint32_t from, ByteView msg);
  /// A block produced locally (e.g. by the co-located replica).
  RejectReason submit_block(const Block& block);
  void submit_tx(Transaction tx);
  /// Asks every peer for blocks above our tip.
  void request_sync();

  std::uint32_t id() const { return id_; }
  const Chain& chain() const { return chain_; }
  const Mempool& mempool() const { return mempool_; }
  const std::vector<std::uint32_t>& peers() const { return peers_; }

  /// Called after each adoption.
  std::function<void(const Block&)> on_adopt;

  static Bytes encode_block(const Block& b);
  static Bytes encode_get_blocks(std::uint64_t from_height);
  static Bytes encode_tx(const Transaction& tx);

 private:
  RejectReason handle_block(std::optional<std::uint32_t> from, const Block& block);
  void adopt(std::optional<std::uint32_t> from, const Block& block);
  void relay(std::optional<std::uint32_t> except, const Bytes& msg);
  void try_pending();

  std::uint32_t id_;
  Chain chain_;
  Mempool mempool_;
  std::vector<std::uint32_t> peers_;
  GossipContext& ctx_;
  std::set<Digest> seen_;
  /// Blocks above tip + 1, or stamped too far ahead of our clock.
  std::map<std::uint64_t, Block> pending_;
  std::set<std::uint64_t> retry_armed_;
};

}  // namespace poa::chain
