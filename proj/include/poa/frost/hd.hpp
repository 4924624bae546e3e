#pragma once

#include <utility>

#include "poa/frost/signing.hpp"

namespace poa::frost {

/// Position of a derived nonce. The view is part of the index so that a
/// replica re-proposing a different block after a view change never reuses a
/// nonce for the same (height, j).
struct HdIndex {
  std::uint64_t height = 0;
  std::uint64_t view = 0;
  std::uint32_t combination = 0;
};

/// Published once during setup; lets anyone compute a participant's (D, E)
/// for every HdIndex.
struct ExtendedCommitment {
  Element base_D;
  Element base_E;
  Digest chain_code{};
};

/// The owner's secret side.
struct ExtendedNonce {
  Scalar base_d;
  Scalar base_e;
  Digest chain_code{};

  ExtendedCommitment public_part() const;
};

ExtendedNonce generate_extended_nonce(const Group& group, Rng& rng);

/// Additive exponent tweak for branch 'D' or 'E'.
Scalar hd_tweak(const Group& group, const Digest& chain_code, char branch, const HdIndex& index);

/// D = base_D * g^{t_D}, E = base_E * g^{t_E}.
std::pair<Element, Element> derive_commitment(const ExtendedCommitment& ext, const HdIndex& index);

/// d = base_d + t_D, e = base_e + t_E; a fresh (unused) pair.
NonceCommitmentPair derive_nonce(const ExtendedNonce& ext, const HdIndex& index);

}  // namespace poa::frost
