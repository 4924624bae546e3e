#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "poa/chain/block.hpp"
#include "poa/crypto/schnorr.hpp"

namespace poa::pbft {

enum class MsgKind : std::uint8_t {
  PrePrepare = 1,
  Prepare = 2,
  Commit = 3,
  ViewChange = 4,
  NewView = 5,
  Extension = 6,
};

std::string_view to_string(MsgKind k);

/// Envelope authenticated with the sender's Schnorr key.
struct SignedMessage {
  MsgKind kind = MsgKind::PrePrepare;
  std::uint32_t sender = 0;
  Bytes body;
  Bytes auth;

  Bytes signing_bytes() const;
  Bytes encode() const;
  /// Throws DecodeError.
  static SignedMessage decode(ByteView bytes);
};

SignedMessage seal(MsgKind kind, std::uint32_t sender, Bytes body, const crypto::KeyPair& key, Rng& rng);
bool verify_seal(const SignedMessage& m, const std::vector<crypto::Element>& auth_keys);

struct PrePrepare {
  std::uint64_t view = 0;
  std::uint64_t height = 0;
  chain::Block block;

  Bytes encode() const;
  static PrePrepare decode(ByteView bytes);
};

struct Prepare {
  std::uint64_t view = 0;
  std::uint64_t height = 0;
  Digest digest{};
  /// Mode-specific; FBFT5 piggybacks (D, E) here.
  Bytes extra;

  Bytes encode() const;
  static Prepare decode(ByteView bytes);
};

struct Commit {
  std::uint64_t view = 0;
  std::uint64_t height = 0;
  Digest digest{};
  /// Signature material for the block, format set by the signing mode.
  Bytes payload;

  Bytes encode() const;
  static Commit decode(ByteView bytes);
};

/// A signed pre-prepare plus Q-1 matching prepares.
struct PreparedCert {
  SignedMessage preprepare;
  std::vector<SignedMessage> prepares;
};

struct ViewChange {
  std::uint64_t new_view = 0;
  std::uint64_t tip_height = 0;
  std::optional<PreparedCert> cert;

  Bytes encode() const;
  static ViewChange decode(ByteView bytes);
};

struct NewView {
  std::uint64_t view = 0;
  std::vector<SignedMessage> view_changes;
  /// Re-proposal of the highest prepared block, when there is one.
  std::optional<SignedMessage> preprepare;

  Bytes encode() const;
  static NewView decode(ByteView bytes);
};

struct Extension {
  std::uint64_t view = 0;
  std::uint64_t height = 0;
  Bytes payload;

  Bytes encode() const;
  static Extension decode(ByteView bytes);
};

}  // namespace poa::pbft
