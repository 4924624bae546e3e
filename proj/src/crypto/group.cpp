#include "poa/crypto/group.hpp"

#include <sodium.h>

#include <algorithm>
#include <stdexcept>

namespace poa::crypto {

// --- Scalar / Element front ends -------------------------------------------

namespace {

void require_same(const Group* a, const Group* b) {
  if (a == nullptr || b == nullptr) {
    throw std::logic_error("operation on unbound group value");
  }
  if (a != b) {
    throw std::invalid_argument("mixing values from different ciphersuites");
  }
}

}  // namespace

const Group& Scalar::group() const {
  if (group_ == nullptr) throw std::logic_error("unbound scalar");
  return *group_;
}

bool Scalar::is_zero() const {
  return std::all_of(value_.begin(), value_.end(), [](std::uint8_t b) { return b == 0; });
}

Scalar Scalar::operator+(const Scalar& rhs) const {
  require_same(group_, rhs.group_);
  return Scalar(group_, group_->raw_add(value_, rhs.value_));
}

Scalar Scalar::operator-(const Scalar& rhs) const { return *this + (-rhs); }

Scalar Scalar::operator*(const Scalar& rhs) const {
  require_same(group_, rhs.group_);
  return Scalar(group_, group_->raw_mul(value_, rhs.value_));
}

Scalar Scalar::operator-() const {
  require_same(group_, group_);
  return Scalar(group_, group_->raw_neg(value_));
}

Scalar Scalar::inverse() const {
  require_same(group_, group_);
  if (is_zero()) throw std::domain_error("inverse of zero scalar");
  return Scalar(group_, group_->raw_inv(value_));
}

Bytes Scalar::encode() const { return group().raw_encode_scalar(value_); }

const Group& Element::group() const {
  if (group_ == nullptr) throw std::logic_error("unbound element");
  return *group_;
}

bool Element::is_identity() const { return repr_ == group().raw_identity(); }

Element Element::operator*(const Element& rhs) const {
  require_same(group_, rhs.group_);
  return Element(group_, group_->raw_op(repr_, rhs.repr_));
}

Element Element::pow(const Scalar& e) const {
  require_same(group_, &e.group());
  return Element(group_, group_->raw_pow(repr_, e.raw()));
}

Bytes Element::encode() const { return group().raw_encode_element(repr_); }

// --- Group helpers ---------------------------------------------------------

Scalar Group::zero() const { return make_scalar(Raw{}); }
Scalar Group::one() const { return scalar(1); }
Scalar Group::scalar(std::uint64_t v) const { return make_scalar(raw_scalar(v)); }
Scalar Group::random_scalar(Rng& rng) const { return make_scalar(raw_random(rng)); }
Scalar Group::scalar_from_digest(const WideDigest& d) const { return make_scalar(raw_from_digest(d)); }

std::optional<Scalar> Group::decode_scalar(ByteView bytes) const {
  auto r = raw_decode_scalar(bytes);
  if (!r) return std::nullopt;
  return make_scalar(*r);
}

Element Group::identity() const { return make_element(raw_identity()); }
Element Group::generator() const { return make_element(raw_generator()); }
Element Group::exp_generator(const Scalar& e) const {
  require_same(this, &e.group());
  return make_element(raw_pow_generator(e.raw()));
}

std::optional<Element> Group::decode_element(ByteView bytes) const {
  auto r = raw_decode_element(bytes);
  if (!r) return std::nullopt;
  return make_element(*r);
}

// --- Tiny Schnorr group ----------------------------------------------------

namespace {

std::uint32_t load_u32(const Raw& r) {
  return std::uint32_t{r[0]} | (std::uint32_t{r[1]} << 8) | (std::uint32_t{r[2]} << 16) |
         (std::uint32_t{r[3]} << 24);
}

Raw store_u32(std::uint32_t v) {
  Raw r{};
  r[0] = static_cast<std::uint8_t>(v);
  r[1] = static_cast<std::uint8_t>(v >> 8);
  r[2] = static_cast<std::uint8_t>(v >> 16);
  r[3] = static_cast<std::uint8_t>(v >> 24);
  return r;
}

std::uint32_t modpow(std::uint64_t base, std::uint64_t exp, std::uint64_t mod) {
  std::uint64_t result = 1 % mod;
  base %= mod;
  while (exp > 0) {
    if (exp & 1) result = result * base % mod;
    base = base * base % mod;
    exp >>= 1;
  }
  return static_cast<std::uint32_t>(result);
}

/// Big-endian digest reduced modulo a small modulus.
std::uint64_t reduce_digest(const WideDigest& d, std::uint64_t mod) {
  std::uint64_t r = 0;
  for (std::uint8_t b : d) r = (r * 256 + b) % mod;
  return r;
}

class TinyGroup final : public Group {
 public:
  static constexpr std::uint32_t p = TinyParams::p;
  static constexpr std::uint32_t q = TinyParams::q;
  static constexpr std::uint32_t g = TinyParams::g;

  std::string_view id() const override { return "poa-tiny-schnorr-p10091-q1009"; }
  std::string_view name() const override { return "tiny"; }
  std::size_t scalar_size() const override { return 2; }
  std::size_t element_size() const override { return 2; }
  std::string order_decimal() const override { return std::to_string(q); }

 private:
  Raw raw_scalar(std::uint64_t v) const override { return store_u32(static_cast<std::uint32_t>(v % q)); }
  Raw raw_add(const Raw& a, const Raw& b) const override { return store_u32((load_u32(a) + load_u32(b)) % q); }
  Raw raw_mul(const Raw& a, const Raw& b) const override {
    return store_u32(static_cast<std::uint32_t>(std::uint64_t{load_u32(a)} * load_u32(b) % q));
  }
  Raw raw_neg(const Raw& a) const override { return store_u32((q - load_u32(a)) % q); }
  Raw raw_inv(const Raw& a) const override { return store_u32(modpow(load_u32(a), q - 2, q)); }
  Raw raw_random(Rng& rng) const override {
    return store_u32(static_cast<std::uint32_t>(1 + rng.uniform(q - 1)));
  }
  Raw raw_from_digest(const WideDigest& d) const override {
    return store_u32(static_cast<std::uint32_t>(reduce_digest(d, q - 1) + 1));
  }
  Bytes raw_encode_scalar(const Raw& a) const override {
    const std::uint32_t v = load_u32(a);
    return {static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
  }
  std::optional<Raw> raw_decode_scalar(ByteView b) const override {
    if (b.size() != 2) return std::nullopt;
    const std::uint32_t v = (std::uint32_t{b[0]} << 8) | b[1];
    if (v >= q) return std::nullopt;
    return store_u32(v);
  }

  Raw raw_identity() const override { return store_u32(1); }
  Raw raw_generator() const override { return store_u32(g); }
  Raw raw_op(const Raw& a, const Raw& b) const override {
    return store_u32(static_cast<std::uint32_t>(std::uint64_t{load_u32(a)} * load_u32(b) % p));
  }
  Raw raw_pow(const Raw& base, const Raw& e) const override { return store_u32(modpow(load_u32(base), load_u32(e), p)); }
  Raw raw_pow_generator(const Raw& e) const override { return store_u32(modpow(g, load_u32(e), p)); }
  Bytes raw_encode_element(const Raw& a) const override { return raw_encode_scalar(a); }
  std::optional<Raw> raw_decode_element(ByteView b) const override {
    if (b.size() != 2) return std::nullopt;
    const std::uint32_t v = (std::uint32_t{b[0]} << 8) | b[1];
    if (v == 0 || v >= p || modpow(v, q, p) != 1) return std::nullopt;
    return store_u32(v);
  }
};

// --- ristretto255 via libsodium --------------------------------------------

class CurveGroup final : public Group {
 public:
  CurveGroup() {
    if (sodium_init() < 0) {
      throw std::runtime_error("libsodium initialisation failed");
    }
    generator_ = raw_pow_generator(store_u32(1));
  }

  std::string_view id() const override { return "poa-ristretto255-sha512"; }
  std::string_view name() const override { return "curve"; }
  std::size_t scalar_size() const override { return 32; }
  std::size_t element_size() const override { return 32; }
  std::string order_decimal() const override {
    return "7237005577332262213973186563042994240857116359379907606001950938285454250989";
  }

 private:
  static Raw reduce_wide(const std::uint8_t* wide64) {
    Raw r;
    crypto_core_ristretto255_scalar_reduce(r.data(), wide64);
    return r;
  }

  Raw raw_scalar(std::uint64_t v) const override { return store_u64(v); }
  Raw raw_add(const Raw& a, const Raw& b) const override {
    Raw r;
    crypto_core_ristretto255_scalar_add(r.data(), a.data(), b.data());
    return r;
  }
  Raw raw_mul(const Raw& a, const Raw& b) const override {
    Raw r;
    crypto_core_ristretto255_scalar_mul(r.data(), a.data(), b.data());
    return r;
  }
  Raw raw_neg(const Raw& a) const override {
    Raw r;
    crypto_core_ristretto255_scalar_negate(r.data(), a.data());
    return r;
  }
  Raw raw_inv(const Raw& a) const override {
    Raw r;
    if (crypto_core_ristretto255_scalar_invert(r.data(), a.data()) != 0) {
      throw std::domain_error("inverse of zero scalar");
    }
    return r;
  }
  Raw raw_random(Rng& rng) const override {
    for (;;) {
      std::array<std::uint8_t, 64> wide;
      rng.fill(wide);
      Raw r = reduce_wide(wide.data());
      if (r != Raw{}) return r;
    }
  }
  Raw raw_from_digest(const WideDigest& d) const override {
    Raw r = reduce_wide(d.data());
    if (r == Raw{}) r[0] = 1;
    return r;
  }
  Bytes raw_encode_scalar(const Raw& a) const override { return Bytes(a.rbegin(), a.rend()); }
  std::optional<Raw> raw_decode_scalar(ByteView b) const override {
    if (b.size() != 32) return std::nullopt;
    std::array<std::uint8_t, 64> wide{};
    std::copy(b.rbegin(), b.rend(), wide.begin());
    Raw r = reduce_wide(wide.data());
    // Only canonical (already reduced) encodings are accepted.
    if (!std::equal(r.begin(), r.end(), wide.begin())) return std::nullopt;
    return r;
  }

  Raw raw_identity() const override { return Raw{}; }
  Raw raw_generator() const override { return generator_; }
  Raw raw_op(const Raw& a, const Raw& b) const override {
    Raw r;
    if (crypto_core_ristretto255_add(r.data(), a.data(), b.data()) != 0) {
      throw std::invalid_argument("invalid ristretto255 element");
    }
    return r;
  }
  Raw raw_pow(const Raw& base, const Raw& e) const override {
    Raw r{};
    // Identity results are reported as -1 with an all-zero output.
    if (crypto_scalarmult_ristretto255(r.data(), e.data(), base.data()) != 0) return Raw{};
    return r;
  }
  Raw raw_pow_generator(const Raw& e) const override {
    Raw r{};
    if (crypto_scalarmult_ristretto255_base(r.data(), e.data()) != 0) return Raw{};
    return r;
  }
  Bytes raw_encode_element(const Raw& a) const override { return Bytes(a.begin(), a.end()); }
  std::optional<Raw> raw_decode_element(ByteView b) const override {
    if (b.size() != 32) return std::nullopt;
    if (crypto_core_ristretto255_is_valid_point(b.data()) != 1) return std::nullopt;
    Raw r;
    std::copy(b.begin(), b.end(), r.begin());
    return r;
  }

  static Raw store_u64(std::uint64_t v) {
    Raw r{};
    for (int i = 0; i < 8; ++i) r[i] = static_cast<std::uint8_t>(v >> (8 * i));
    return r;
  }

  Raw generator_{};
};

}  // namespace

const Group& tiny_group() {
  static const TinyGroup group;
  return group;
}

const Group& curve_group() {
  static const CurveGroup group;
  return group;
}

const Group& group_by_name(std::string_view name) {
  if (name == "tiny" || name == tiny_group().id()) return tiny_group();
  if (name == "curve" || name == curve_group().id()) return curve_group();
  throw std::invalid_argument("unknown ciphersuite: " + std::string(name));
}

}  // namespace poa::crypto
