#pragma once

#include <cstdint>
#include <optional>

#include "poa/crypto/group.hpp"

namespace poa::crypto {

/// Binding value rho_l = H1(l, m, L). `commitment_list` is the canonical
/// encoding of L (see frost::CommitmentList::encode).
Scalar hash_to_scalar_h1(const Group& group, std::uint32_t signer_index, ByteView message,
                         ByteView commitment_list);

/// Schnorr challenge c = H2(R, Y, m).
Scalar hash_to_scalar_h2(const Element& commitment, const Element& public_key, ByteView message);

struct SchnorrSignature {
  Element R;
  Scalar z;

  /// encode(R) || encode(z); this is the block-solution byte format.
  Bytes encode() const;
  static std::optional<SchnorrSignature> decode(const Group& group, ByteView bytes);
  static std::size_t encoded_size(const Group& group) {
    return group.element_size() + group.scalar_size();
  }
};

struct KeyPair {
  Scalar secret;
  Element public_key;
};

KeyPair generate_keypair(const Group& group, Rng& rng);

SchnorrSignature schnorr_sign(const KeyPair& key, ByteView message, Rng& rng);

/// True iff g^z == R * Y^c with c = H2(R, Y, m).
bool schnorr_verify(const Element& public_key, ByteView message, const SchnorrSignature& sig);

/// Same check over an encoded signature; malformed encodings verify false.
bool schnorr_verify(const Element& public_key, ByteView message, ByteView encoded_sig);

}  // namespace poa::crypto
