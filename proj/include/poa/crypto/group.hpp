#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "poa/crypto/bytes.hpp"
#include "poa/crypto/hash.hpp"
#include "poa/crypto/rng.hpp"

namespace poa::crypto {

class Group;

/// Backend storage shared by both ciphersuites: a little-endian integer for
/// scalars and an opaque canonical encoding for elements.
using Raw = std::array<std::uint8_t, 32>;

/// Integer modulo the group order q. Always reduced.
class Scalar {
 public:
  Scalar() = default;

  const Group& group() const;
  bool bound() const { return group_ != nullptr; }
  bool is_zero() const;

  Scalar operator+(const Scalar& rhs) const;
  Scalar operator-(const Scalar& rhs) const;
  Scalar operator*(const Scalar& rhs) const;
  Scalar operator-() const;
  Scalar& operator+=(const Scalar& rhs) { return *this = *this + rhs; }
  Scalar& operator*=(const Scalar& rhs) { return *this = *this * rhs; }
  /// Throws std::domain_error on zero.
  Scalar inverse() const;

  /// Fixed-width big-endian, group().scalar_size() bytes.
  Bytes encode() const;

  friend bool operator==(const Scalar& a, const Scalar& b) {
    return a.group_ == b.group_ && a.value_ == b.value_;
  }

  const Raw& raw() const { return value_; }

 private:
  friend class Group;
  Scalar(const Group* g, const Raw& v) : group_(g), value_(v) {}

  const Group* group_ = nullptr;
  Raw value_{};
};

/// Member of the prime-order group, written multiplicatively.
class Element {
 public:
  Element() = default;

  const Group& group() const;
  bool bound() const { return group_ != nullptr; }
  bool is_identity() const;

  /// Group law.
  Element operator*(const Element& rhs) const;
  Element& operator*=(const Element& rhs) { return *this = *this * rhs; }
  Element pow(const Scalar& e) const;

  /// Canonical fixed-width encoding, group().element_size() bytes.
  Bytes encode() const;

  friend bool operator==(const Element& a, const Element& b) {
    return a.group_ == b.group_ && a.repr_ == b.repr_;
  }
  friend bool operator<(const Element& a, const Element& b) { return a.repr_ < b.repr_; }

 private:
  friend class Group;
  Element(const Group* g, const Raw& r) : group_(g), repr_(r) {}

  const Group* group_ = nullptr;
  Raw repr_{};
};

/// A ciphersuite: prime-order group, generator, and the scalar field. The
/// concrete suites are process-wide singletons, so Scalar/Element keep a
/// non-owning pointer to them.
class Group {
 public:
  virtual ~Group() = default;
  Group(const Group&) = delete;
  Group& operator=(const Group&) = delete;

  /// Ciphersuite identifier, also mixed into every hash-to-scalar call.
  virtual std::string_view id() const = 0;
  /// Short selector name used in configs and on the CLI ("tiny", "curve").
  virtual std::string_view name() const = 0;
  virtual std::size_t scalar_size() const = 0;
  virtual std::size_t element_size() const = 0;
  /// Group order as a decimal string (documentation and genesis files).
  virtual std::string order_decimal() const = 0;

  Scalar zero() const;
  Scalar one() const;
  Scalar scalar(std::uint64_t v) const;
  /// Uniform in [1, q).
  Scalar random_scalar(Rng& rng) const;
  /// Maps a 64-byte digest into [1, q).
  Scalar scalar_from_digest(const WideDigest& digest) const;
  std::optional<Scalar> decode_scalar(ByteView bytes) const;

  Element identity() const;
  Element generator() const;
  Element exp_generator(const Scalar& e) const;
  std::optional<Element> decode_element(ByteView bytes) const;

 protected:
  Group() = default;

  Scalar make_scalar(const Raw& v) const { return Scalar(this, v); }
  Element make_element(const Raw& r) const { return Element(this, r); }

 private:
  friend class Scalar;
  friend class Element;

  virtual Raw raw_scalar(std::uint64_t v) const = 0;
  virtual Raw raw_add(const Raw& a, const Raw& b) const = 0;
  virtual Raw raw_mul(const Raw& a, const Raw& b) const = 0;
  virtual Raw raw_neg(const Raw& a) const = 0;
  virtual Raw raw_inv(const Raw& a) const = 0;
  virtual Raw raw_random(Rng& rng) const = 0;
  virtual Raw raw_from_digest(const WideDigest& d) const = 0;
  virtual Bytes raw_encode_scalar(const Raw& a) const = 0;
  virtual std::optional<Raw> raw_decode_scalar(ByteView b) const = 0;

  virtual Raw raw_identity() const = 0;
  virtual Raw raw_generator() const = 0;
  virtual Raw raw_op(const Raw& a, const Raw& b) const = 0;
  virtual Raw raw_pow(const Raw& base, const Raw& e) const = 0;
  virtual Raw raw_pow_generator(const Raw& e) const = 0;
  virtual Bytes raw_encode_element(const Raw& a) const = 0;
  virtual std::optional<Raw> raw_decode_element(ByteView b) const = 0;
};

/// Schnorr group over Z_p^* with p = 10091, q = 1009, g = 1024. Small enough for
/// exhaustive brute-force checks; offers no security.
const Group& tiny_group();

/// ristretto255 (prime order 2^252 + 27742317777372353535851937790883648493)
/// with SHA-512 based hashing, backed by libsodium.
const Group& curve_group();

/// Resolves "tiny"/"curve" or a full ciphersuite id. Throws std::invalid_argument.
const Group& group_by_name(std::string_view name);

/// Tiny-group parameters, exposed for brute-force oracles in tests.
struct TinyParams {
  static constexpr std::uint32_t p = 10091;
  static constexpr std::uint32_t q = 1009;
  static constexpr std::uint32_t g = 1024;
};

}  // namespace poa::crypto
