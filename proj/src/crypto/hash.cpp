#include "poa/crypto/hash.hpp"

#include <sodium.h>

namespace poa::crypto {

Digest sha256(ByteView data) {
  Digest out;
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

WideDigest sha512(ByteView data) {
  WideDigest out;
  crypto_hash_sha512(out.data(), data.data(), data.size());
  return out;
}

WideDigest tagged_sha512(std::string_view tag, std::initializer_list<ByteView> parts) {
  crypto_hash_sha512_state state;
  crypto_hash_sha512_init(&state);
  crypto_hash_sha512_update(&state, reinterpret_cast<const unsigned char*>(tag.data()), tag.size());
  for (ByteView part : parts) {
    crypto_hash_sha512_update(&state, part.data(), part.size());
  }
  WideDigest out;
  crypto_hash_sha512_final(&state, out.data());
  return out;
}

}  // namespace poa::crypto
