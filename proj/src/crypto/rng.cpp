#include "poa/crypto/rng.hpp"

#include <stdexcept>

#include "poa/crypto/bytes.hpp"
#include "poa/crypto/hash.hpp"

namespace poa {

// The std:: distributions are implementation-defined; these mappings keep
// traces identical across standard libraries.

std::uint64_t Rng::uniform(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::uniform with zero bound");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

double Rng::uniform_real(double lo, double hi) {
  if (!(hi > lo)) return lo;
  const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

bool Rng::bernoulli(double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform_real(0.0, 1.0) < p;
}

void Rng::fill(std::span<std::uint8_t> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    std::uint64_t word = engine_();
    for (int b = 0; b < 8 && i < out.size(); ++b, ++i) {
      out[i] = static_cast<std::uint8_t>(word >> (8 * b));
    }
  }
}

Rng Rng::fork(std::string_view label) { return Rng(derive_seed(engine_(), label)); }

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  Bytes buf;
  append_u64(buf, seed);
  append(buf, as_bytes(label));
  const Digest d = crypto::sha256(buf);
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out = (out << 8) | d[i];
  return out;
}

}  // namespace poa
