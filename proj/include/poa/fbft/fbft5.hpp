#pragma once

#include <map>
#include <optional>
#include <set>

#include "poa/frost/signing.hpp"
#include "poa/pbft/replica.hpp"

namespace poa::fbft {

using crypto::Element;
using crypto::Scalar;
using pbft::RoundRef;

/// Commitment-share and sign phases after commit, coordinated by the primary
/// in the style of ROAST. Fresh (D, E) ride on prepares; each valid share
/// returns a fresh pair, putting its signer back into the responsive set.
///
/// One session is live at a time. A live session that has not completed
/// within `session_timeout` is abandoned: it stops blocking new sessions, but
/// its silent members stay pending and a late valid share still completes it.
/// Each session that never completes therefore holds a signer that never
/// answered, which bounds sessions per block by N - k + 1.
class Fbft5Mode : public pbft::SigningMode {
 public:
  Fbft5Mode(frost::KeyMaterial key, double session_timeout = 3.0);

  std::string_view name() const override { return "fbft5"; }
  Bytes prepare_payload(const chain::Block& block, RoundRef ref) override;
  void on_prepare_payload(std::uint32_t sender, RoundRef ref, ByteView payload) override;
  std::optional<Bytes> commit_payload(const chain::Block&, RoundRef) override { return Bytes{}; }
  bool check_commit_payload(std::uint32_t, const chain::Block&, RoundRef, ByteView payload) override {
    return payload.empty();
  }
  void on_locally_committed(const chain::Block& block, RoundRef ref,
                            const std::map<std::uint32_t, Bytes>& commits) override;
  void on_extension(std::uint32_t sender, RoundRef ref, ByteView payload) override;
  void on_view_installed(std::uint64_t view) override;
  void on_checkpoint(std::uint64_t height) override;

  std::uint32_t sessions_opened() const { return coord_ ? coord_->counter : 0; }
  const std::set<std::uint32_t>* malicious() const { return coord_ ? &coord_->malicious : nullptr; }

 private:
  enum class Tag : std::uint8_t { Session = 1, Share = 2 };
  struct Session {
    std::vector<std::uint32_t> members;
    frost::CommitmentList list;
    std::map<std::uint32_t, Scalar> shares;
    bool abandoned = false;
  };
  struct Coordinator {
    RoundRef ref;
    std::optional<chain::Block> block;
    std::map<std::uint32_t, std::pair<Element, Element>> banked;
    std::set<std::uint32_t> malicious;
    std::set<std::uint32_t> pending;
    std::map<std::uint32_t, Session> sessions;
    std::uint32_t counter = 0;
    std::optional<std::uint32_t> live;
    bool done = false;
  };

  Bytes fresh_commitment();
  /// Coordinator for `ref`, replacing one for an older round; null for a stale ref.
  Coordinator* coordinator(RoundRef ref);
  void try_open();
  void abandon(std::uint32_t id, std::string_view why);
  void record_share(std::uint32_t sender, std::uint32_t session, const Scalar& z, ByteView fresh);
  /// Our share and a fresh commitment, or nullopt when mute or unable.
  std::optional<std::pair<Scalar, Bytes>> sign(RoundRef ref, const frost::CommitmentList& list);
  void handle_session(std::uint32_t sender, RoundRef ref, ByteView body);
  bool bank(std::uint32_t sender, ByteView de);

  frost::KeyMaterial key_;
  double session_timeout_;
  std::uint32_t k_;
  /// Our unused nonces, keyed by enc(D) || enc(E).
  std::map<Bytes, frost::NonceCommitmentPair> nonces_;
  std::vector<std::tuple<std::uint32_t, RoundRef, Bytes>> waiting_;
  std::optional<Coordinator> coord_;
  std::uint64_t generation_ = 0;
};

}  // namespace poa::fbft
