#include "poa/fbft/combinations.hpp"

#include <limits>
#include <stdexcept>

namespace poa::fbft {

std::uint64_t binomial(std::uint32_t n, std::uint32_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint32_t i = 1; i <= k; ++i) {
    // r * (n - k + i) / i stays exact because r is C(n-k+i-1, i-1).
    const std::uint64_t m = n - k + i;
    if (r > std::numeric_limits<std::uint64_t>::max() / m) throw std::overflow_error("binomial overflow");
    r = r * m / i;
  }
  return r;
}

std::vector<Combination> enumerate_combinations(std::uint32_t n, std::uint32_t k) {
  if (k == 0 || k > n) throw std::invalid_argument("need 1 <= k <= n");
  std::vector<Combination> out;
  out.reserve(binomial(n, k));
  Combination c(k);
  for (std::uint32_t i = 0; i < k; ++i) c[i] = i + 1;
  for (;;) {
    out.push_back(c);
    std::int64_t i = k - 1;
    while (i >= 0 && c[i] == n - k + i + 1) --i;
    if (i < 0) break;
    ++c[i];
    for (std::uint32_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

}  // namespace poa::fbft
