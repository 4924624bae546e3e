#pragma once

#include <cstdint>
#include <stdexcept>

namespace poa::pbft {

struct QuorumSizes {
  std::uint32_t n;
  std::uint32_t q;
};

/// N = 3 F_B + 2 F_C + 1, Q = 2 F_B + F_C + 1. Throws std::invalid_argument on
/// negative inputs.
QuorumSizes quorum_sizes(int f_b, int f_c);

struct ReplicaConfig {
  std::uint32_t n = 4;
  std::uint32_t q = 3;
  std::uint32_t f_b = 1;
  std::uint32_t f_c = 0;
  std::uint32_t id = 0;
  std::uint64_t t0 = 1700000000;
  std::uint64_t tau = 60;
  double lead_delta = 15;
  double future_delta = 30;
  double view_change_timeout = 120;
  bool view_change_enabled = true;
  /// Requests are self-generated for heights 1..max_height only.
  std::uint64_t max_height = 0;

  std::uint32_t primary(std::uint64_t view) const { return static_cast<std::uint32_t>(view % n); }
  double nominal(std::uint64_t height) const { return static_cast<double>(t0 + height * tau); }

  /// Throws std::invalid_argument if the quorum identities do not hold.
  void validate() const;
};

}  // namespace poa::pbft
