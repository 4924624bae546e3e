#include "poa/fbft/fbft3.hpp"

#include <algorithm>

namespace poa::fbft {

using frost::ParticipantId;

Fbft3Mode::Fbft3Mode(frost::KeyMaterial key, frost::ExtendedNonce nonce,
                     std::vector<frost::ExtendedCommitment> published)
    : key_(std::move(key)),
      nonce_(std::move(nonce)),
      published_(std::move(published)),
      n_(key_.group_size()),
      k_(key_.threshold()) {
  if (published_.size() != n_) throw std::invalid_argument("fbft3: one extended commitment per replica required");
  if (binomial(n_, k_) > kMaxCombinations) {
    throw std::invalid_argument("fbft3: C(" + std::to_string(n_) + "," + std::to_string(k_) + ") = " +
                                std::to_string(binomial(n_, k_)) + " combinations exceeds " +
                                std::to_string(kMaxCombinations));
  }
  combos_ = enumerate_combinations(n_, k_);
  member_of_.resize(n_);
  for (std::uint32_t j = 1; j <= combos_.size(); ++j) {
    index_.emplace(combos_[j - 1], j);
    for (std::uint32_t pid : combos_[j - 1]) member_of_[pid - 1].push_back(j);
  }
}

std::uint32_t Fbft3Mode::index_of(const Combination& c) const {
  auto it = index_.find(c);
  return it == index_.end() ? 0 : it->second;
}

const frost::CommitmentList& Fbft3Mode::list_for(RoundRef ref, std::uint32_t j) {
  auto key = std::make_pair(ref, j);
  auto it = lists_.find(key);
  if (it != lists_.end()) return it->second;
  std::vector<frost::CommitmentEntry> entries;
  for (std::uint32_t pid : combos_.at(j - 1)) {
    auto [D, E] = frost::derive_commitment(published_[pid - 1], {ref.height, ref.view, j});
    entries.push_back({ParticipantId{pid}, D, E});
  }
  return lists_.emplace(key, frost::CommitmentList(std::move(entries))).first->second;
}

Bytes Fbft3Mode::encode_shares(const ShareVector& shares) {
  Bytes out;
  append_u32(out, static_cast<std::uint32_t>(shares.size()));
  for (const auto& [j, z] : shares) {
    append_u32(out, j);
    append(out, z.encode());
  }
  return out;
}

Fbft3Mode::ShareVector Fbft3Mode::decode_shares(const frost::Group& group, ByteView payload) {
  ByteReader in(payload);
  const std::uint32_t count = in.u32();
  if (count > kMaxCombinations) throw DecodeError("share vector too long");
  ShareVector out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t j = in.u32();
    auto z = group.decode_scalar(in.take(group.scalar_size()));
    if (!z) throw DecodeError("share scalar");
    out.emplace_back(j, *z);
  }
  in.expect_done();
  return out;
}

std::optional<Bytes> Fbft3Mode::commit_payload(const chain::Block& block, RoundRef ref) {
  pbft::Behavior& b = host().behavior();
  if (b.withhold_signature() || !signed_.insert(ref).second) return std::nullopt;
  const Digest hash = block.hash();
  ShareVector shares;
  for (std::uint32_t j : member_of_[key_.id.value - 1]) {
    frost::NonceCommitmentPair nonce = frost::derive_nonce(nonce_, {ref.height, ref.view, j});
    frost::SignatureShare s = frost::sign_share(key_, nonce, hash, list_for(ref, j));
    if (b.corrupt_signature()) s.z += s.z.group().one();
    shares.emplace_back(j, s.z);
  }
  host().trace({{"ev", "commit_shares"}, {"height", ref.height}, {"view", ref.view}, {"shares", shares.size()}});
  return encode_shares(shares);
}

bool Fbft3Mode::check_commit_payload(std::uint32_t sender, const chain::Block& block, RoundRef ref,
                                     ByteView payload) {
  if (sender >= n_) return false;
  ShareVector shares;
  try {
    shares = decode_shares(key_.public_keys.group(), payload);
  } catch (const DecodeError&) {
    return false;
  }
  const auto& expected = member_of_[sender];
  if (shares.size() != expected.size()) return false;
  const Digest hash = block.hash();
  for (std::size_t i = 0; i < shares.size(); ++i) {
    if (shares[i].first != expected[i]) return false;
    const frost::SignatureShare s{ParticipantId{sender + 1}, shares[i].second};
    if (!frost::verify_share(s, list_for(ref, expected[i]), hash, key_.public_keys)) return false;
  }
  return true;
}

void Fbft3Mode::on_locally_committed(const chain::Block& block, RoundRef ref,
                                     const std::map<std::uint32_t, Bytes>& commits) {
  const Digest hash = block.hash();
  std::vector<std::uint32_t> senders;
  for (const auto& [s, payload] : commits) senders.push_back(s);

  // j* is the lexicographically first k-subset of the senders; a bad share
  // removes its owner and the search restarts on the remaining senders.
  while (senders.size() >= k_) {
    Combination pids;
    for (std::size_t i = 0; i < k_; ++i) pids.push_back(senders[i] + 1);
    const std::uint32_t j = index_of(pids);
    std::vector<frost::SignatureShare> shares;
    for (std::uint32_t pid : pids) {
      for (const auto& [jj, z] : decode_shares(key_.public_keys.group(), commits.at(pid - 1))) {
        if (jj == j) shares.push_back({ParticipantId{pid}, z});
      }
    }
    try {
      const auto sig = frost::aggregate(shares, list_for(ref, j), hash, key_.public_keys);
      std::vector<std::uint32_t> signers(senders.begin(), senders.begin() + k_);
      host().trace({{"ev", "aggregate"}, {"height", ref.height}, {"view", ref.view}, {"j", j}});
      host().submit_solution(block, sig.encode(), signers);
      return;
    } catch (const frost::AggregationError& e) {
      host().trace({{"ev", "share_invalid"}, {"height", ref.height}, {"view", ref.view}, {"from", e.signer.value - 1}});
      std::erase(senders, e.signer.value - 1);
    } catch (const std::invalid_argument&) {
      std::erase(senders, pids.back() - 1);
    }
  }
  host().trace({{"ev", "aggregate_failed"}, {"height", ref.height}, {"view", ref.view}});
}

void Fbft3Mode::on_checkpoint(std::uint64_t height) {
  std::erase_if(lists_, [height](const auto& kv) { return kv.first.first.height <= height; });
  std::erase_if(signed_, [height](const RoundRef& r) { return r.height <= height; });
}

}  // namespace poa::fbft
