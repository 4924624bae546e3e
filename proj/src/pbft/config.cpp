#include "poa/pbft/config.hpp"

#include <string>

namespace poa::pbft {

QuorumSizes quorum_sizes(int f_b, int f_c) {
  if (f_b < 0 || f_c < 0) throw std::invalid_argument("fault counts must be non-negative");
  const auto b = static_cast<std::uint32_t>(f_b);
  const auto c = static_cast<std::uint32_t>(f_c);
  const QuorumSizes s{3 * b + 2 * c + 1, 2 * b + c + 1};
  // Q = ceil((N + F_B + 1) / 2) and N - Q = F_B + F_C.
  if (s.q != (s.n + b + 2) / 2 || s.n - s.q != b + c) throw std::logic_error("quorum identity violated");
  return s;
}

void ReplicaConfig::validate() const {
  const QuorumSizes s = quorum_sizes(static_cast<int>(f_b), static_cast<int>(f_c));
  if (s.n != n || s.q != q) {
    throw std::invalid_argument("replica config: N=" + std::to_string(n) + " Q=" + std::to_string(q) +
                                " inconsistent with F_B=" + std::to_string(f_b) + " F_C=" + std::to_string(f_c));
  }
  if (id >= n) throw std::invalid_argument("replica id out of range");
  if (tau == 0 || lead_delta < 0 || future_delta < 0 || view_change_timeout <= 0) {
    throw std::invalid_argument("replica config: timing parameters out of range");
  }
}

}  // namespace poa::pbft
