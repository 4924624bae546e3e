#include "poa/crypto/schnorr.hpp"

namespace poa::crypto {

namespace {

constexpr std::string_view kH1Tag = "poa/frost/H1/rho";
constexpr std::string_view kH2Tag = "poa/frost/H2/chal";

Bytes sized_bytes(ByteView data) {
  Bytes out;
  append_sized(out, data);
  return out;
}

}  // namespace

Scalar hash_to_scalar_h1(const Group& group, std::uint32_t signer_index, ByteView message,
                         ByteView commitment_list) {
  Bytes index;
  append_u32(index, signer_index);
  const Bytes suite = sized_bytes(as_bytes(group.id()));
  const Bytes m = sized_bytes(message);
  const Bytes l = sized_bytes(commitment_list);
  return group.scalar_from_digest(tagged_sha512(kH1Tag, {suite, index, m, l}));
}

Scalar hash_to_scalar_h2(const Element& commitment, const Element& public_key, ByteView message) {
  const Group& group = commitment.group();
  const Bytes suite = sized_bytes(as_bytes(group.id()));
  const Bytes r = commitment.encode();
  const Bytes y = public_key.encode();
  const Bytes m = sized_bytes(message);
  return group.scalar_from_digest(tagged_sha512(kH2Tag, {suite, r, y, m}));
}

Bytes SchnorrSignature::encode() const {
  Bytes out = R.encode();
  append(out, z.encode());
  return out;
}

std::optional<SchnorrSignature> SchnorrSignature::decode(const Group& group, ByteView bytes) {
  if (bytes.size() != encoded_size(group)) return std::nullopt;
  auto r = group.decode_element(bytes.first(group.element_size()));
  auto z = group.decode_scalar(bytes.subspan(group.element_size()));
  if (!r || !z) return std::nullopt;
  return SchnorrSignature{*r, *z};
}

KeyPair generate_keypair(const Group& group, Rng& rng) {
  Scalar x = group.random_scalar(rng);
  return KeyPair{x, group.exp_generator(x)};
}

SchnorrSignature schnorr_sign(const KeyPair& key, ByteView message, Rng& rng) {
  const Group& group = key.secret.group();
  const Scalar k = group.random_scalar(rng);
  const Element r = group.exp_generator(k);
  const Scalar c = hash_to_scalar_h2(r, key.public_key, message);
  return SchnorrSignature{r, k + c * key.secret};
}

bool schnorr_verify(const Element& public_key, ByteView message, const SchnorrSignature& sig) {
  if (!public_key.bound() || !sig.R.bound() || !sig.z.bound()) return false;
  const Group& group = public_key.group();
  if (&sig.R.group() != &group || &sig.z.group() != &group) return false;
  const Scalar c = hash_to_scalar_h2(sig.R, public_key, message);
  return group.exp_generator(sig.z) == sig.R * public_key.pow(c);
}

bool schnorr_verify(const Element& public_key, ByteView message, ByteView encoded_sig) {
  auto sig = SchnorrSignature::decode(public_key.group(), encoded_sig);
  return sig && schnorr_verify(public_key, message, *sig);
}

}  // namespace poa::crypto
