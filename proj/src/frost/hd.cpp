#include "poa/frost/hd.hpp"

namespace poa::frost {

namespace {
constexpr std::string_view kTweakTag = "poa/frost/hd-tweak";
}

ExtendedCommitment ExtendedNonce::public_part() const {
  const Group& group = base_d.group();
  return ExtendedCommitment{group.exp_generator(base_d), group.exp_generator(base_e), chain_code};
}

ExtendedNonce generate_extended_nonce(const Group& group, Rng& rng) {
  ExtendedNonce ext;
  ext.base_d = group.random_scalar(rng);
  ext.base_e = group.random_scalar(rng);
  rng.fill(ext.chain_code);
  return ext;
}

Scalar hd_tweak(const Group& group, const Digest& chain_code, char branch, const HdIndex& index) {
  Bytes suite;
  append_sized(suite, as_bytes(group.id()));
  Bytes tail;
  append_u8(tail, static_cast<std::uint8_t>(branch));
  append_u64(tail, index.height);
  append_u64(tail, index.view);
  append_u32(tail, index.combination);
  return group.scalar_from_digest(crypto::tagged_sha512(kTweakTag, {suite, chain_code, tail}));
}

std::pair<Element, Element> derive_commitment(const ExtendedCommitment& ext, const HdIndex& index) {
  const Group& group = ext.base_D.group();
  return {ext.base_D * group.exp_generator(hd_tweak(group, ext.chain_code, 'D', index)),
          ext.base_E * group.exp_generator(hd_tweak(group, ext.chain_code, 'E', index))};
}

NonceCommitmentPair derive_nonce(const ExtendedNonce& ext, const HdIndex& index) {
  const Group& group = ext.base_d.group();
  NonceCommitmentPair p;
  p.d = ext.base_d + hd_tweak(group, ext.chain_code, 'D', index);
  p.e = ext.base_e + hd_tweak(group, ext.chain_code, 'E', index);
  p.D = group.exp_generator(p.d);
  p.E = group.exp_generator(p.e);
  return p;
}

}  // namespace poa::frost
