#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace poa {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(std::string_view s) {
  const ByteView v = as_bytes(s);
  return {v.begin(), v.end()};
}

inline void append(Bytes& out, ByteView data) { out.insert(out.end(), data.begin(), data.end()); }

void append_u8(Bytes& out, std::uint8_t v);
void append_u32(Bytes& out, std::uint32_t v);
void append_u64(Bytes& out, std::uint64_t v);
/// u32 length prefix followed by the bytes.
void append_sized(Bytes& out, ByteView data);

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cursor over a byte buffer; every read throws DecodeError on truncation.
class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  ByteView take(std::size_t n);
  Bytes sized(std::size_t max_len = 1u << 24);
  Digest digest();

  std::size_t remaining() const { return data_.size() - offset_; }
  bool done() const { return remaining() == 0; }
  void expect_done() const;

 private:
  ByteView data_;
  std::size_t offset_ = 0;
};

}  // namespace poa
