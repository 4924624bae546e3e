#include "poa/frost/signing.hpp"

#include <algorithm>

#include "poa/frost/keygen.hpp"

namespace poa::frost {

std::vector<NonceCommitmentPair> preprocess(std::uint32_t pi, const KeyMaterial& key, Rng& rng) {
  if (pi == 0) throw std::invalid_argument("preprocess requires pi >= 1");
  const Group& group = key.public_keys.group();
  std::vector<NonceCommitmentPair> out;
  out.reserve(pi);
  for (std::uint32_t i = 0; i < pi; ++i) {
    NonceCommitmentPair p;
    p.d = group.random_scalar(rng);
    p.e = group.random_scalar(rng);
    p.D = group.exp_generator(p.d);
    p.E = group.exp_generator(p.e);
    out.push_back(std::move(p));
  }
  return out;
}

CommitmentList::CommitmentList(std::vector<CommitmentEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].id.value == 0) throw std::invalid_argument("commitment list contains id 0");
    if (i > 0 && !(entries_[i - 1].id < entries_[i].id)) {
      throw std::invalid_argument("commitment list ids must be strictly ascending");
    }
  }
}

const CommitmentEntry* CommitmentList::find(ParticipantId id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                             [](const CommitmentEntry& e, ParticipantId v) { return e.id < v; });
  return it != entries_.end() && it->id == id ? &*it : nullptr;
}

std::vector<ParticipantId> CommitmentList::signers() const {
  std::vector<ParticipantId> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.id);
  return out;
}

Bytes CommitmentList::encode() const {
  Bytes out;
  for (const auto& e : entries_) {
    append_u32(out, e.id.value);
    append(out, e.D.encode());
    append(out, e.E.encode());
  }
  return out;
}

CommitmentList CommitmentList::decode(const Group& group, ByteView bytes) {
  ByteReader in(bytes);
  const std::size_t width = 4 + 2 * group.element_size();
  if (bytes.empty() || bytes.size() % width != 0) throw DecodeError("commitment list length");
  std::vector<CommitmentEntry> entries;
  while (in.remaining() > 0) {
    const std::uint32_t id = in.u32();
    auto D = group.decode_element(in.take(group.element_size()));
    auto E = group.decode_element(in.take(group.element_size()));
    if (!D || !E) throw DecodeError("commitment list element");
    entries.push_back({ParticipantId{id}, *D, *E});
  }
  try {
    return CommitmentList(std::move(entries));
  } catch (const std::invalid_argument& e) {
    throw DecodeError(e.what());
  }
}

SigningPackage::SigningPackage(const CommitmentList& list, ByteView message, const Element& group_public_key) {
  const Group& group = group_public_key.group();
  const Bytes encoded = list.encode();
  R = group.identity();
  binding.reserve(list.size());
  commitment.reserve(list.size());
  for (const auto& e : list.entries()) {
    binding.push_back(crypto::hash_to_scalar_h1(group, e.id.value, message, encoded));
    commitment.push_back(e.D * e.E.pow(binding.back()));
    R *= commitment.back();
  }
  challenge = crypto::hash_to_scalar_h2(R, group_public_key, message);
}

namespace {

std::size_t index_of(const CommitmentList& list, ParticipantId id) {
  const CommitmentEntry* e = list.find(id);
  if (!e) throw std::invalid_argument("participant " + to_string(id) + " not in commitment list");
  return static_cast<std::size_t>(e - list.entries().data());
}

}  // namespace

SignatureShare sign_share(const KeyMaterial& key, NonceCommitmentPair& nonce, ByteView message,
                          const CommitmentList& list) {
  if (nonce.used) throw NonceReuseError("nonce pair already used by participant " + to_string(key.id));
  if (list.size() < key.threshold()) throw std::invalid_argument("commitment list shorter than threshold");
  const std::size_t idx = index_of(list, key.id);
  const CommitmentEntry& mine = list.entries()[idx];
  if (!(mine.D == nonce.D) || !(mine.E == nonce.E)) {
    throw std::invalid_argument("commitment list entry does not match the nonce pair");
  }

  const Group& group = key.public_keys.group();
  const SigningPackage pkg(list, message, key.group_public_key());
  const Scalar lambda = lagrange_coefficient(group, key.id, list.signers());
  nonce.used = true;
  return SignatureShare{key.id, nonce.d + nonce.e * pkg.binding[idx] + lambda * key.secret_share * pkg.challenge};
}

namespace {

bool verify_with(const SignatureShare& share, const CommitmentList& list, const SigningPackage& pkg,
                 const std::vector<ParticipantId>& signers, const PublicKeyPackage& keys) {
  const CommitmentEntry* e = list.find(share.signer);
  if (!e || !share.z.bound()) return false;
  auto y = keys.verification_shares.find(share.signer);
  if (y == keys.verification_shares.end()) return false;
  const Group& group = keys.group();
  if (&share.z.group() != &group) return false;
  const std::size_t idx = static_cast<std::size_t>(e - list.entries().data());
  const Scalar lambda = lagrange_coefficient(group, share.signer, signers);
  return group.exp_generator(share.z) == pkg.commitment[idx] * y->second.pow(pkg.challenge * lambda);
}

}  // namespace

bool verify_share(const SignatureShare& share, const CommitmentList& list, ByteView message,
                  const PublicKeyPackage& keys) {
  if (!list.contains(share.signer)) return false;
  const SigningPackage pkg(list, message, keys.group_public_key);
  return verify_with(share, list, pkg, list.signers(), keys);
}

SchnorrSignature aggregate(const std::vector<SignatureShare>& shares, const CommitmentList& list,
                           ByteView message, const PublicKeyPackage& keys) {
  if (shares.size() != list.size()) throw std::invalid_argument("share count does not match commitment list");
  if (list.size() < keys.threshold) throw std::invalid_argument("commitment list shorter than threshold");
  const SigningPackage pkg(list, message, keys.group_public_key);
  const std::vector<ParticipantId> signers = list.signers();
  std::vector<bool> seen(list.size(), false);
  Scalar z = keys.group().zero();
  for (const SignatureShare& s : shares) {
    const CommitmentEntry* e = list.find(s.signer);
    if (!e) throw AggregationError(s.signer, "share from participant " + to_string(s.signer) + " not in L");
    const std::size_t idx = static_cast<std::size_t>(e - list.entries().data());
    if (seen[idx]) throw AggregationError(s.signer, "duplicate share from participant " + to_string(s.signer));
    seen[idx] = true;
    if (!verify_with(s, list, pkg, signers, keys)) {
      throw AggregationError(s.signer, "invalid signature share from participant " + to_string(s.signer));
    }
    z += s.z;
  }
  return SchnorrSignature{pkg.R, z};
}

}  // namespace poa::frost
