#include "poa/crypto/bytes.hpp"

#include <algorithm>

namespace poa {

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    throw DecodeError("hex string has odd length");
  }
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      throw DecodeError("invalid hex digit");
    }
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

void append_u8(Bytes& out, std::uint8_t v) { out.push_back(v); }

void append_u32(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
  }
}

void append_u64(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
  }
}

void append_sized(Bytes& out, ByteView data) {
  if (data.size() > UINT32_MAX) {
    throw std::invalid_argument("sized field exceeds u32 length");
  }
  append_u32(out, static_cast<std::uint32_t>(data.size()));
  append(out, data);
}

ByteView ByteReader::take(std::size_t n) {
  if (n > remaining()) {
    throw DecodeError("truncated input");
  }
  ByteView out = data_.subspan(offset_, n);
  offset_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint32_t ByteReader::u32() {
  ByteView b = take(4);
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

std::uint64_t ByteReader::u64() {
  ByteView b = take(8);
  std::uint64_t v = 0;
  for (std::uint8_t x : b) v = (v << 8) | x;
  return v;
}

Bytes ByteReader::sized(std::size_t max_len) {
  const std::uint32_t len = u32();
  if (len > max_len) {
    throw DecodeError("sized field exceeds maximum length");
  }
  ByteView b = take(len);
  return Bytes(b.begin(), b.end());
}

Digest ByteReader::digest() {
  ByteView b = take(32);
  Digest d;
  std::copy(b.begin(), b.end(), d.begin());
  return d;
}

void ByteReader::expect_done() const {
  if (!done()) {
    throw DecodeError("trailing bytes after message");
  }
}

}  // namespace poa
