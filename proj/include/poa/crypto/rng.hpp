#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace poa {

/// Deterministic random source. Every sampling site in the simulator draws from
/// an Rng derived from the scenario seed, so runs replay bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, bound). bound must be nonzero.
  std::uint64_t uniform(std::uint64_t bound);
  double uniform_real(double lo, double hi);
  bool bernoulli(double p);
  void fill(std::span<std::uint8_t> out);

  /// Independent child stream keyed by a label.
  Rng fork(std::string_view label);

 private:
  std::mt19937_64 engine_;
};

/// Stable seed derivation (hash-based), independent of engine state.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

}  // namespace poa
