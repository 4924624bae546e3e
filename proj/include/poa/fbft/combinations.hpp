#pragma once

#include <cstdint>
#include <vector>

namespace poa::fbft {

using Combination = std::vector<std::uint32_t>;

/// C(n, k); throws std::overflow_error past 64 bits.
std::uint64_t binomial(std::uint32_t n, std::uint32_t k);

/// All k-subsets of {1..n} in lexicographic order; index j of the result is
/// combination j + 1. Throws std::invalid_argument unless 1 <= k <= n.
std::vector<Combination> enumerate_combinations(std::uint32_t n, std::uint32_t k);

}  // namespace poa::fbft
