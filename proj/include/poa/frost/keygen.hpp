#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "poa/crypto/schnorr.hpp"
#include "poa/frost/types.hpp"

namespace poa::frost {

/// Broadcast by each dealer in round one: Feldman commitments g^{a_ij} to its
/// polynomial coefficients plus a Schnorr proof of knowledge of a_i0.
struct DealerCommitment {
  ParticipantId dealer;
  std::vector<Element> coefficients;
  Element proof_R;
  Scalar proof_mu;
};

class DkgError : public std::runtime_error {
 public:
  DkgError(ParticipantId dealer, ParticipantId receiver, const std::string& what)
      : std::runtime_error(what), dealer(dealer), receiver(receiver) {}
  ParticipantId dealer;
  ParticipantId receiver;
};

/// One participant of the two-round Pedersen/Feldman DKG with FROST's
/// proof-of-knowledge. Holds a degree k-1 polynomial f_i.
class DkgParticipant {
 public:
  DkgParticipant(ParticipantId id, std::uint32_t n, std::uint32_t k, const Group& group, Rng& rng);

  ParticipantId id() const { return id_; }
  const DealerCommitment& commitment() const { return commitment_; }
  /// f_i(m_receiver), sent privately in round two.
  Scalar share_for(ParticipantId receiver) const;

  /// Round one: checks the dealer's proof of knowledge. Throws DkgError.
  void receive_commitment(const DealerCommitment& c);
  /// Round two: Feldman check g^{share} == prod_j C_j^{m_i^j}. Throws DkgError.
  void receive_share(ParticipantId dealer, const Scalar& share);

  /// Requires all n commitments and shares.
  KeyMaterial finish() const;

 private:
  ParticipantId id_;
  std::uint32_t n_;
  std::uint32_t k_;
  const Group* group_;
  std::vector<Scalar> coefficients_;
  DealerCommitment commitment_;
  std::map<ParticipantId, DealerCommitment> received_commitments_;
  std::map<ParticipantId, Scalar> received_shares_;
};

/// Evaluates prod_j C_j^{x^j}: the public image g^{f(x)} of a committed polynomial.
Element evaluate_commitment(const std::vector<Element>& coefficients, ParticipantId x);

/// Test hook letting a scenario corrupt the share dealer -> receiver in transit.
using ShareTamper = std::function<void(ParticipantId dealer, ParticipantId receiver, Scalar& share)>;

/// Runs the DKG among participants 1..n over reliable in-process channels.
/// Requires 1 <= k <= n. A Feldman mismatch aborts the run with DkgError
/// naming the dealer.
std::map<ParticipantId, KeyMaterial> dkg_run(std::uint32_t n, std::uint32_t k, const Group& group, Rng& rng,
                                             const ShareTamper& tamper = {});

/// Lagrange coefficient at zero: prod_{j != i} m_j / (m_j - m_i).
/// Throws std::invalid_argument if i is not in the set or ids repeat / are zero.
Scalar lagrange_coefficient(const Group& group, ParticipantId i, const std::vector<ParticipantId>& signer_set);

}  // namespace poa::frost
