#include "poa/fbft/fbft5.hpp"

#include <algorithm>

namespace poa::fbft {

using frost::ParticipantId;
using nlohmann::json;

Fbft5Mode::Fbft5Mode(frost::KeyMaterial key, double session_timeout)
    : key_(std::move(key)), session_timeout_(session_timeout), k_(key_.threshold()) {
  if (session_timeout_ <= 0) throw std::invalid_argument("fbft5: session timeout must be positive");
}

Bytes Fbft5Mode::fresh_commitment() {
  frost::NonceCommitmentPair pair = frost::preprocess(1, key_, host().rng()).front();
  Bytes de = pair.D.encode();
  append(de, pair.E.encode());
  nonces_.emplace(de, std::move(pair));
  return de;
}

Bytes Fbft5Mode::prepare_payload(const chain::Block&, RoundRef) { return fresh_commitment(); }

bool Fbft5Mode::bank(std::uint32_t sender, ByteView de) {
  const frost::Group& g = key_.public_keys.group();
  if (de.size() != 2 * g.element_size() || !coord_ || coord_->malicious.contains(sender)) return false;
  auto D = g.decode_element(de.first(g.element_size()));
  auto E = g.decode_element(de.subspan(g.element_size()));
  if (!D || !E) return false;
  coord_->banked.insert_or_assign(sender, std::make_pair(*D, *E));
  return true;
}

Fbft5Mode::Coordinator* Fbft5Mode::coordinator(RoundRef ref) {
  if (coord_ && coord_->ref == ref) return &*coord_;
  if (coord_ && ref < coord_->ref) return nullptr;
  coord_.emplace();
  coord_->ref = ref;
  ++generation_;
  return &*coord_;
}

void Fbft5Mode::on_prepare_payload(std::uint32_t sender, RoundRef ref, ByteView payload) {
  if (host().config().primary(ref.view) != host().id() || !coordinator(ref)) return;
  // Replicas whose prepare carried a commitment start out responsive.
  if (bank(sender, payload)) try_open();
}

void Fbft5Mode::on_locally_committed(const chain::Block& block, RoundRef ref,
                                     const std::map<std::uint32_t, Bytes>&) {
  if (host().config().primary(ref.view) == host().id()) {
    if (Coordinator* c = coordinator(ref)) {
      c->block = block;
      try_open();
    }
  }
  auto waiting = std::move(waiting_);
  waiting_.clear();
  for (auto& [sender, r, body] : waiting) {
    if (r == ref) {
      handle_session(sender, r, body);
    } else {
      waiting_.emplace_back(sender, r, std::move(body));
    }
  }
}

void Fbft5Mode::try_open() {
  if (!coord_ || !coord_->block || coord_->done || coord_->live) return;
  Coordinator& c = *coord_;
  const std::uint32_t me = host().id();
  std::vector<std::uint32_t> others;
  bool self_ready = false;
  for (const auto& [r, de] : c.banked) {
    if (c.malicious.contains(r) || c.pending.contains(r)) continue;
    if (r == me) {
      self_ready = true;
    } else {
      others.push_back(r);
    }
  }
  if (!self_ready || others.size() + 1 < k_) return;

  std::vector<std::uint32_t> members{me};
  for (std::uint32_t i = 0; i + 1 < k_; ++i) {
    const std::size_t pick = i + host().rng().uniform(others.size() - i);
    std::swap(others[i], others[pick]);
    members.push_back(others[i]);
  }
  std::ranges::sort(members);
  std::vector<frost::CommitmentEntry> entries;
  for (std::uint32_t m : members) {
    const auto& [D, E] = c.banked.at(m);
    entries.push_back({ParticipantId{m + 1}, D, E});
    c.banked.erase(m);
    if (m != me) c.pending.insert(m);
  }
  const std::uint32_t id = ++c.counter;
  Session& s = c.sessions[id];
  s.members = members;
  s.list = frost::CommitmentList(std::move(entries));
  c.live = id;
  host().trace({{"ev", "session_open"}, {"height", c.ref.height}, {"view", c.ref.view}, {"session", id},
                {"signers", members}});

  Bytes msg{static_cast<std::uint8_t>(Tag::Session)};
  append_u32(msg, id);
  append(msg, s.list.encode());
  host().broadcast_extension(c.ref, msg);

  const std::uint64_t gen = generation_;
  host().ctx().set_timer(host().ctx().local_clock() + session_timeout_, [this, gen, id] {
    if (gen == generation_ && coord_ && coord_->live == id) abandon(id, "timeout");
  });

  const frost::CommitmentList list = s.list;
  if (auto mine = sign(c.ref, list)) record_share(me, id, mine->first, mine->second);
}

void Fbft5Mode::abandon(std::uint32_t id, std::string_view why) {
  Coordinator& c = *coord_;
  Session& s = c.sessions.at(id);
  s.abandoned = true;
  if (c.live == id) c.live.reset();
  std::vector<std::uint32_t> silent;
  for (std::uint32_t m : s.members) {
    if (!s.shares.contains(m) && !c.malicious.contains(m)) silent.push_back(m);
  }
  host().trace({{"ev", "session_abandoned"}, {"height", c.ref.height}, {"view", c.ref.view}, {"session", id},
                {"reason", why}, {"silent", silent}});
  try_open();
}

void Fbft5Mode::record_share(std::uint32_t sender, std::uint32_t session, const Scalar& z, ByteView fresh) {
  if (!coord_ || coord_->done || !coord_->block) return;
  Coordinator& c = *coord_;
  auto it = c.sessions.find(session);
  if (it == c.sessions.end()) return;
  Session& s = it->second;
  if (!std::ranges::binary_search(s.members, sender) || s.shares.contains(sender) || c.malicious.contains(sender)) {
    return;
  }
  c.pending.erase(sender);
  const Digest hash = c.block->hash();
  if (!frost::verify_share({ParticipantId{sender + 1}, z}, s.list, hash, key_.public_keys)) {
    c.malicious.insert(sender);
    c.banked.erase(sender);
    host().trace({{"ev", "share_invalid"}, {"height", c.ref.height}, {"view", c.ref.view}, {"session", session},
                  {"from", sender}});
    host().trace({{"ev", "malicious"}, {"height", c.ref.height}, {"view", c.ref.view}, {"replica", sender}});
    if (c.live == session) {
      abandon(session, "invalid-share");
    } else {
      try_open();
    }
    return;
  }
  s.shares.emplace(sender, z);
  bank(sender, fresh);
  if (s.shares.size() == k_) {
    std::vector<frost::SignatureShare> shares;
    for (const auto& [m, zz] : s.shares) shares.push_back({ParticipantId{m + 1}, zz});
    const auto sig = frost::aggregate(shares, s.list, hash, key_.public_keys);
    c.done = true;
    c.live.reset();
    host().trace({{"ev", "signing_complete"}, {"height", c.ref.height}, {"view", c.ref.view}, {"session", session},
                  {"sessions", c.counter}});
    const chain::Block block = *c.block;
    host().submit_solution(block, sig.encode(), s.members);
    return;
  }
  try_open();
}

std::optional<std::pair<Scalar, Bytes>> Fbft5Mode::sign(RoundRef ref, const frost::CommitmentList& list) {
  const frost::CommitmentEntry* entry = list.find(key_.id);
  const chain::Block* block = host().block_at(ref);
  if (!entry || !block) return std::nullopt;
  Bytes de = entry->D.encode();
  append(de, entry->E.encode());
  auto it = nonces_.find(de);
  if (it == nonces_.end()) {
    host().trace({{"ev", "session_unknown_nonce"}, {"height", ref.height}, {"view", ref.view}});
    return std::nullopt;
  }
  pbft::Behavior& b = host().behavior();
  if (b.withhold_signature()) return std::nullopt;
  frost::SignatureShare share = frost::sign_share(key_, it->second, block->hash(), list);
  nonces_.erase(it);
  if (b.corrupt_signature()) share.z += share.z.group().one();
  return std::make_pair(share.z, fresh_commitment());
}

void Fbft5Mode::handle_session(std::uint32_t sender, RoundRef ref, ByteView body) {
  ByteReader in(body);
  const std::uint32_t id = in.u32();
  const frost::CommitmentList list = frost::CommitmentList::decode(key_.public_keys.group(), in.take(in.remaining()));
  // Non-selected replicas have nothing to do with L.
  if (!list.contains(key_.id)) return;
  if (!host().locally_committed(ref)) {
    waiting_.emplace_back(sender, ref, Bytes(body.begin(), body.end()));
    return;
  }
  auto mine = sign(ref, list);
  if (!mine) return;
  Bytes msg{static_cast<std::uint8_t>(Tag::Share)};
  append_u32(msg, id);
  append(msg, mine->first.encode());
  append(msg, mine->second);
  host().send_extension(sender, ref, msg);
}

void Fbft5Mode::on_extension(std::uint32_t sender, RoundRef ref, ByteView payload) {
  if (payload.empty()) return;
  try {
    switch (static_cast<Tag>(payload[0])) {
      case Tag::Session:
        if (sender == host().config().primary(ref.view)) handle_session(sender, ref, payload.subspan(1));
        break;
      case Tag::Share: {
        if (!coord_ || coord_->ref != ref) return;
        const frost::Group& g = key_.public_keys.group();
        ByteReader in(payload.subspan(1));
        const std::uint32_t id = in.u32();
        auto z = g.decode_scalar(in.take(g.scalar_size()));
        const ByteView fresh = in.take(in.remaining());
        if (z) record_share(sender, id, *z, fresh);
        break;
      }
    }
  } catch (const DecodeError&) {
    host().trace({{"ev", "malformed"}, {"from", sender}, {"kind", "fbft5"}});
  }
}

void Fbft5Mode::on_view_installed(std::uint64_t view) {
  coord_.reset();
  ++generation_;
  std::erase_if(waiting_, [view](const auto& w) { return std::get<1>(w).view < view; });
}

void Fbft5Mode::on_checkpoint(std::uint64_t height) {
  if (coord_ && coord_->ref.height <= height) {
    coord_.reset();
    ++generation_;
  }
  nonces_.clear();
  std::erase_if(waiting_, [height](const auto& w) { return std::get<1>(w).height <= height; });
}

}  // namespace poa::fbft
