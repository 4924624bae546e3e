#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

#include "poa/crypto/bytes.hpp"

namespace poa::crypto {

using WideDigest = std::array<std::uint8_t, 64>;

Digest sha256(ByteView data);
WideDigest sha512(ByteView data);

/// SHA-512 over tag || part_0 || part_1 || ... with no separators; callers
/// length-prefix variable parts themselves.
WideDigest tagged_sha512(std::string_view tag, std::initializer_list<ByteView> parts);

}  // namespace poa::crypto
