#pragma once

#include <map>
#include <set>

#include "poa/fbft/combinations.hpp"
#include "poa/frost/hd.hpp"
#include "poa/pbft/replica.hpp"

namespace poa::fbft {

using crypto::Element;
using crypto::Scalar;
using pbft::RoundRef;

/// Share vectors inside commits. Every replica signs once per combination it
/// belongs to, with nonces HD-derived from material published at setup, so
/// no extra round is needed; any Q commits contain a full combination.
class Fbft3Mode : public pbft::SigningMode {
 public:
  static constexpr std::uint64_t kMaxCombinations = 512;

  /// `published[r]` is replica r's extended commitment (participant id r + 1).
  /// Throws std::invalid_argument when C(n, k) exceeds kMaxCombinations or the
  /// material does not fit together.
  Fbft3Mode(frost::KeyMaterial key, frost::ExtendedNonce nonce, std::vector<frost::ExtendedCommitment> published);

  std::string_view name() const override { return "fbft3"; }
  std::optional<Bytes> commit_payload(const chain::Block& block, RoundRef ref) override;
  bool check_commit_payload(std::uint32_t sender, const chain::Block& block, RoundRef ref,
                            ByteView payload) override;
  void on_locally_committed(const chain::Block& block, RoundRef ref,
                            const std::map<std::uint32_t, Bytes>& commits) override;
  void on_checkpoint(std::uint64_t height) override;

  const std::vector<Combination>& combinations() const { return combos_; }
  std::uint64_t shares_per_commit() const { return binomial(n_ - 1, k_ - 1); }
  /// 1-based index of `c` (participant ids, ascending), 0 if not a k-subset.
  std::uint32_t index_of(const Combination& c) const;
  const frost::CommitmentList& list_for(RoundRef ref, std::uint32_t j);

  using ShareVector = std::vector<std::pair<std::uint32_t, Scalar>>;
  static Bytes encode_shares(const ShareVector& shares);
  static ShareVector decode_shares(const frost::Group& group, ByteView payload);

 private:
  frost::KeyMaterial key_;
  frost::ExtendedNonce nonce_;
  std::vector<frost::ExtendedCommitment> published_;
  std::uint32_t n_;
  std::uint32_t k_;
  std::vector<Combination> combos_;
  std::map<Combination, std::uint32_t> index_;
  std::vector<std::vector<std::uint32_t>> member_of_;  // per replica, ascending j
  std::map<std::pair<RoundRef, std::uint32_t>, frost::CommitmentList> lists_;
  std::set<RoundRef> signed_;
};

}  // namespace poa::fbft
