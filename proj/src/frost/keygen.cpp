#include "poa/frost/keygen.hpp"

#include <algorithm>
#include <set>

namespace poa::frost {

namespace {

constexpr std::string_view kPokTag = "poa/frost/dkg-pok";

Scalar pok_challenge(const Group& group, ParticipantId dealer, const Element& c0, const Element& r) {
  Bytes suite;
  append_sized(suite, as_bytes(group.id()));
  Bytes id;
  append_u32(id, dealer.value);
  return group.scalar_from_digest(crypto::tagged_sha512(kPokTag, {suite, id, c0.encode(), r.encode()}));
}

}  // namespace

const Element& PublicKeyPackage::verification_share(ParticipantId id) const {
  auto it = verification_shares.find(id);
  if (it == verification_shares.end()) {
    throw std::invalid_argument("no verification share for participant " + to_string(id));
  }
  return it->second;
}

DkgParticipant::DkgParticipant(ParticipantId id, std::uint32_t n, std::uint32_t k, const Group& group,
                               Rng& rng)
    : id_(id), n_(n), k_(k), group_(&group) {
  if (k < 1 || k > n) throw std::invalid_argument("dkg requires 1 <= k <= n");
  if (id.value < 1 || id.value > n) throw std::invalid_argument("participant id out of range");
  coefficients_.reserve(k);
  commitment_.dealer = id;
  for (std::uint32_t j = 0; j < k; ++j) {
    coefficients_.push_back(group.random_scalar(rng));
    commitment_.coefficients.push_back(group.exp_generator(coefficients_.back()));
  }
  const Scalar nonce = group.random_scalar(rng);
  commitment_.proof_R = group.exp_generator(nonce);
  const Scalar c = pok_challenge(group, id, commitment_.coefficients[0], commitment_.proof_R);
  commitment_.proof_mu = nonce + coefficients_[0] * c;
}

Scalar DkgParticipant::share_for(ParticipantId receiver) const {
  // Horner evaluation of f_i at m_receiver.
  const Scalar x = group_->scalar(receiver.value);
  Scalar acc = group_->zero();
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

void DkgParticipant::receive_commitment(const DealerCommitment& c) {
  if (c.coefficients.size() != k_) {
    throw DkgError(c.dealer, id_, "dealer " + to_string(c.dealer) + " committed to the wrong degree");
  }
  const Scalar ch = pok_challenge(*group_, c.dealer, c.coefficients[0], c.proof_R);
  if (!(group_->exp_generator(c.proof_mu) == c.proof_R * c.coefficients[0].pow(ch))) {
    throw DkgError(c.dealer, id_, "dealer " + to_string(c.dealer) + " failed proof of knowledge");
  }
  received_commitments_[c.dealer] = c;
}

Element evaluate_commitment(const std::vector<Element>& coefficients, ParticipantId x) {
  const Group& group = coefficients.at(0).group();
  const Scalar xs = group.scalar(x.value);
  Scalar power = group.one();
  Element acc = group.identity();
  for (const Element& c : coefficients) {
    acc *= c.pow(power);
    power *= xs;
  }
  return acc;
}

void DkgParticipant::receive_share(ParticipantId dealer, const Scalar& share) {
  auto it = received_commitments_.find(dealer);
  if (it == received_commitments_.end()) {
    throw DkgError(dealer, id_, "share from dealer " + to_string(dealer) + " before its commitment");
  }
  if (!(group_->exp_generator(share) == evaluate_commitment(it->second.coefficients, id_))) {
    throw DkgError(dealer, id_,
                   "participant " + to_string(id_) + " rejects share from dealer " + to_string(dealer));
  }
  received_shares_[dealer] = share;
}

KeyMaterial DkgParticipant::finish() const {
  if (received_commitments_.size() != n_ || received_shares_.size() != n_) {
    throw std::logic_error("dkg not complete for participant " + to_string(id_));
  }
  KeyMaterial km;
  km.id = id_;
  km.secret_share = group_->zero();
  for (const auto& [dealer, s] : received_shares_) km.secret_share += s;

  PublicKeyPackage& pub = km.public_keys;
  pub.threshold = k_;
  pub.group_size = n_;
  pub.group_public_key = group_->identity();
  for (const auto& [dealer, c] : received_commitments_) pub.group_public_key *= c.coefficients[0];
  for (std::uint32_t l = 1; l <= n_; ++l) {
    Element y = group_->identity();
    for (const auto& [dealer, c] : received_commitments_) y *= evaluate_commitment(c.coefficients, {l});
    pub.verification_shares.emplace(ParticipantId{l}, y);
  }
  return km;
}

std::map<ParticipantId, KeyMaterial> dkg_run(std::uint32_t n, std::uint32_t k, const Group& group, Rng& rng,
                                             const ShareTamper& tamper) {
  std::vector<DkgParticipant> parts;
  parts.reserve(n);
  for (std::uint32_t i = 1; i <= n; ++i) parts.emplace_back(ParticipantId{i}, n, k, group, rng);

  for (auto& receiver : parts) {
    for (const auto& dealer : parts) receiver.receive_commitment(dealer.commitment());
  }
  for (const auto& dealer : parts) {
    for (auto& receiver : parts) {
      Scalar s = dealer.share_for(receiver.id());
      if (tamper) tamper(dealer.id(), receiver.id(), s);
      receiver.receive_share(dealer.id(), s);
    }
  }

  std::map<ParticipantId, KeyMaterial> out;
  for (const auto& p : parts) out.emplace(p.id(), p.finish());
  return out;
}

Scalar lagrange_coefficient(const Group& group, ParticipantId i, const std::vector<ParticipantId>& signer_set) {
  std::set<ParticipantId> seen;
  for (ParticipantId j : signer_set) {
    if (j.value == 0) throw std::invalid_argument("participant id 0 in signer set");
    if (!seen.insert(j).second) throw std::invalid_argument("duplicate participant id in signer set");
  }
  if (!seen.contains(i)) throw std::invalid_argument("participant " + to_string(i) + " not in signer set");

  Scalar num = group.one();
  Scalar den = group.one();
  const Scalar mi = group.scalar(i.value);
  for (ParticipantId j : signer_set) {
    if (j == i) continue;
    const Scalar mj = group.scalar(j.value);
    num *= mj;
    den *= mj - mi;
  }
  return num * den.inverse();
}

}  // namespace poa::frost
