#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "poa/crypto/group.hpp"

namespace poa::frost {

using crypto::Element;
using crypto::Group;
using crypto::Scalar;

/// Participant identifier m_i in {1..n}; never zero (it is a Lagrange abscissa).
struct ParticipantId {
  std::uint32_t value = 0;

  auto operator<=>(const ParticipantId&) const = default;
};

inline std::string to_string(ParticipantId id) { return std::to_string(id.value); }

/// Everything a verifier needs: per-participant verification shares Y_l and the
/// group key Y.
struct PublicKeyPackage {
  std::map<ParticipantId, Element> verification_shares;
  Element group_public_key;
  std::uint32_t threshold = 0;
  std::uint32_t group_size = 0;

  const Element& verification_share(ParticipantId id) const;
  const Group& group() const { return group_public_key.group(); }
};

struct KeyMaterial {
  ParticipantId id;
  Scalar secret_share;
  PublicKeyPackage public_keys;

  std::uint32_t threshold() const { return public_keys.threshold; }
  std::uint32_t group_size() const { return public_keys.group_size; }
  const Element& group_public_key() const { return public_keys.group_public_key; }
};

class NonceReuseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A share failed verification; `signer` names the offender.
class AggregationError : public std::runtime_error {
 public:
  AggregationError(ParticipantId signer, const std::string& what)
      : std::runtime_error(what), signer(signer) {}
  ParticipantId signer;
};

}  // namespace poa::frost
