#include "poa/chain/participant.hpp"

#include <algorithm>

namespace poa::chain {

namespace {
constexpr std::size_t kMaxPending = 256;
constexpr std::uint64_t kSyncBatch = 32;
}  // namespace

Participant::Participant(std::uint32_t id, ChainParams params, std::vector<std::uint32_t> peers, GossipContext& ctx)
    : id_(id), chain_(std::move(params)), peers_(std::move(peers)), ctx_(ctx) {
  std::ranges::sort(peers_);
  peers_.erase(std::unique(peers_.begin(), peers_.end()), peers_.end());
  std::erase(peers_, id_);
}

Bytes Participant::encode_block(const Block& b) {
  Bytes out{static_cast<std::uint8_t>(GossipKind::Block)};
  append(out, b.serialize());
  return out;
}

Bytes Participant::encode_get_blocks(std::uint64_t from_height) {
  Bytes out{static_cast<std::uint8_t>(GossipKind::GetBlocks)};
  append_u64(out, from_height);
  return out;
}

Bytes Participant::encode_tx(const Transaction& tx) {
  Bytes out{static_cast<std::uint8_t>(GossipKind::Tx)};
  append(out, tx.serialize());
  return out;
}

void Participant::on_message(std::uint32_t from, ByteView msg) {
  if (msg.empty()) return;
  const ByteView body = msg.subspan(1);
  try {
    switch (static_cast<GossipKind>(msg[0])) {
      case GossipKind::Block:
        handle_block(from, Block::deserialize(body));
        break;
      case GossipKind::GetBlocks: {
        ByteReader in(body);
        const std::uint64_t start = std::max<std::uint64_t>(in.u64(), 1);
        in.expect_done();
        for (std::uint64_t h = start; h <= chain_.height() && h < start + kSyncBatch; ++h) {
          ctx_.send(from, encode_block(chain_.at(h)));
        }
        break;
      }
      case GossipKind::Tx: {
        ByteReader in(body);
        Transaction tx = Transaction::deserialize(in);
        in.expect_done();
        const Bytes relayed = encode_tx(tx);
        if (mempool_.add(std::move(tx))) relay(from, relayed);
        break;
      }
      default:
        ctx_.trace({{"ev", "malformed"}, {"node", id_}, {"from", from}});
    }
  } catch (const DecodeError&) {
    ctx_.trace({{"ev", "malformed"}, {"node", id_}, {"from", from}});
  }
}

RejectReason Participant::submit_block(const Block& block) { return handle_block(std::nullopt, block); }

void Participant::submit_tx(Transaction tx) {
  const Bytes msg = encode_tx(tx);
  if (mempool_.add(std::move(tx))) relay(std::nullopt, msg);
}

void Participant::request_sync() {
  const Bytes msg = encode_get_blocks(chain_.height() + 1);
  for (std::uint32_t p : peers_) ctx_.send(p, msg);
}

RejectReason Participant::handle_block(std::optional<std::uint32_t> from, const Block& block) {
  const Digest hash = block.hash();
  if (seen_.insert(hash).second) {
    ctx_.trace({{"ev", "block"}, {"node", id_}, {"height", block.height}, {"hash", to_hex(hash)},
                {"hex", to_hex(block.serialize())}});
  }
  if (block.height > chain_.height() + 1) {
    if (pending_.size() < kMaxPending) pending_.emplace(block.height, block);
    if (from) ctx_.send(*from, encode_get_blocks(chain_.height() + 1));
    return RejectReason::BadHeight;
  }
  const double local = ctx_.local_clock();
  const RejectReason r = chain_.append(block, {.template_only = false, .local_clock = local});
  if (r == RejectReason::Accept) {
    adopt(from, block);
    return r;
  }
  if (r == RejectReason::Duplicate) return r;
  ctx_.trace({{"ev", "reject"}, {"node", id_}, {"height", block.height}, {"hash", to_hex(hash)},
              {"reason", to_string(r)}, {"ts", block.header.timestamp}, {"local_clock", local}});
  if (r == RejectReason::FutureTimestamp && pending_.size() < kMaxPending) {
    // Early but otherwise acceptable: look again once our clock catches up.
    pending_.emplace(block.height, block);
    if (retry_armed_.insert(block.height).second) {
      const double at = static_cast<double>(block.header.timestamp) - static_cast<double>(chain_.params().future_delta);
      const std::uint64_t h = block.height;
      ctx_.schedule(at, [this, h] {
        retry_armed_.erase(h);
        try_pending();
      });
    }
  }
  return r;
}

void Participant::adopt(std::optional<std::uint32_t> from, const Block& block) {
  ctx_.trace({{"ev", "adopt"}, {"node", id_}, {"height", block.height}, {"hash", to_hex(block.hash())},
              {"ts", block.header.timestamp}, {"local_clock", ctx_.local_clock()}});
  mempool_.remove_included(block);
  relay(from, encode_block(block));
  if (on_adopt) on_adopt(block);
  try_pending();
}

void Participant::try_pending() {
  std::erase_if(pending_, [this](const auto& kv) { return kv.first <= chain_.height(); });
  auto it = pending_.find(chain_.height() + 1);
  if (it == pending_.end()) return;
  const Block next = it->second;
  pending_.erase(it);
  handle_block(std::nullopt, next);
}

void Participant::relay(std::optional<std::uint32_t> except, const Bytes& msg) {
  for (std::uint32_t p : peers_) {
    if (!except || p != *except) ctx_.send(p, msg);
  }
}

}  // namespace poa::chain
