#pragma once

#include <optional>
#include <vector>

#include "poa/crypto/schnorr.hpp"
#include "poa/frost/types.hpp"

namespace poa::frost {

using crypto::SchnorrSignature;

struct NonceCommitmentPair {
  Scalar d;
  Scalar e;
  Element D;
  Element E;
  bool used = false;
};

/// pi fresh nonce pairs for the owner of `key`. Throws std::invalid_argument if pi == 0.
std::vector<NonceCommitmentPair> preprocess(std::uint32_t pi, const KeyMaterial& key, Rng& rng);

struct CommitmentEntry {
  ParticipantId id;
  Element D;
  Element E;
};

/// L = <(l, D_l, E_l)>, strictly ascending by id.
class CommitmentList {
 public:
  CommitmentList() = default;
  /// Throws std::invalid_argument unless ids are strictly ascending and nonzero.
  explicit CommitmentList(std::vector<CommitmentEntry> entries);

  const std::vector<CommitmentEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const CommitmentEntry* find(ParticipantId id) const;
  bool contains(ParticipantId id) const { return find(id) != nullptr; }
  std::vector<ParticipantId> signers() const;

  /// u32(id) || enc(D) || enc(E) per entry; this is what H1 binds to.
  Bytes encode() const;
  /// Inverse of encode(). Throws DecodeError.
  static CommitmentList decode(const Group& group, ByteView bytes);

 private:
  std::vector<CommitmentEntry> entries_;
};

struct SignatureShare {
  ParticipantId signer;
  Scalar z;
};

/// Derived quantities shared by signers and the aggregator for one (m, L).
struct SigningPackage {
  std::vector<Scalar> binding;      // rho_l, aligned with L.entries()
  std::vector<Element> commitment;  // R_l = D_l * E_l^{rho_l}
  Element R;
  Scalar challenge;

  SigningPackage(const CommitmentList& list, ByteView message, const Element& group_public_key);
};

/// z_i = d_i + e_i * rho_i + lambda_i * s_i * c. Marks the nonce used.
/// Throws NonceReuseError if already used, std::invalid_argument if the signer's
/// (D, E) is not in L or |L| < k.
SignatureShare sign_share(const KeyMaterial& key, NonceCommitmentPair& nonce, ByteView message,
                          const CommitmentList& list);

/// g^{z_l} == R_l * Y_l^{c * lambda_l}.
bool verify_share(const SignatureShare& share, const CommitmentList& list, ByteView message,
                  const PublicKeyPackage& keys);

/// sigma = (R, sum z_i). Throws AggregationError naming the first bad share,
/// std::invalid_argument on a shape mismatch between shares and L.
SchnorrSignature aggregate(const std::vector<SignatureShare>& shares, const CommitmentList& list,
                           ByteView message, const PublicKeyPackage& keys);

}  // namespace poa::frost
