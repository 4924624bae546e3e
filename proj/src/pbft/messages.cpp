#include "poa/pbft/messages.hpp"

namespace poa::pbft {

namespace {

constexpr std::string_view kSealTag = "poa/pbft/msg";
constexpr std::size_t kMaxListed = 4096;

void put_message(Bytes& out, const SignedMessage& m) { append_sized(out, m.encode()); }
SignedMessage get_message(ByteReader& in) { return SignedMessage::decode(in.sized()); }

}  // namespace

std::string_view to_string(MsgKind k) {
  switch (k) {
    case MsgKind::PrePrepare: return "pre-prepare";
    case MsgKind::Prepare: return "prepare";
    case MsgKind::Commit: return "commit";
    case MsgKind::ViewChange: return "view-change";
    case MsgKind::NewView: return "new-view";
    case MsgKind::Extension: return "extension";
  }
  return "unknown";
}

Bytes SignedMessage::signing_bytes() const {
  Bytes out(kSealTag.begin(), kSealTag.end());
  append_u8(out, static_cast<std::uint8_t>(kind));
  append_u32(out, sender);
  append_sized(out, body);
  return out;
}

Bytes SignedMessage::encode() const {
  Bytes out;
  append_u8(out, static_cast<std::uint8_t>(kind));
  append_u32(out, sender);
  append_sized(out, body);
  append_sized(out, auth);
  return out;
}

SignedMessage SignedMessage::decode(ByteView bytes) {
  ByteReader in(bytes);
  SignedMessage m;
  const std::uint8_t k = in.u8();
  if (k < 1 || k > 6) throw DecodeError("unknown message kind");
  m.kind = static_cast<MsgKind>(k);
  m.sender = in.u32();
  m.body = in.sized();
  m.auth = in.sized();
  in.expect_done();
  return m;
}

SignedMessage seal(MsgKind kind, std::uint32_t sender, Bytes body, const crypto::KeyPair& key, Rng& rng) {
  SignedMessage m{kind, sender, std::move(body), {}};
  m.auth = crypto::schnorr_sign(key, m.signing_bytes(), rng).encode();
  return m;
}

bool verify_seal(const SignedMessage& m, const std::vector<crypto::Element>& auth_keys) {
  if (m.sender >= auth_keys.size()) return false;
  return crypto::schnorr_verify(auth_keys[m.sender], m.signing_bytes(), m.auth);
}

Bytes PrePrepare::encode() const {
  Bytes out;
  append_u64(out, view);
  append_u64(out, height);
  append_sized(out, block.serialize());
  return out;
}

PrePrepare PrePrepare::decode(ByteView bytes) {
  ByteReader in(bytes);
  PrePrepare p;
  p.view = in.u64();
  p.height = in.u64();
  p.block = chain::Block::deserialize(in.sized());
  in.expect_done();
  if (p.block.height != p.height) throw DecodeError("pre-prepare height disagrees with block");
  return p;
}

Bytes Prepare::encode() const {
  Bytes out;
  append_u64(out, view);
  append_u64(out, height);
  append(out, digest);
  append_sized(out, extra);
  return out;
}

Prepare Prepare::decode(ByteView bytes) {
  ByteReader in(bytes);
  Prepare p;
  p.view = in.u64();
  p.height = in.u64();
  p.digest = in.digest();
  p.extra = in.sized();
  in.expect_done();
  return p;
}

Bytes Commit::encode() const {
  Bytes out;
  append_u64(out, view);
  append_u64(out, height);
  append(out, digest);
  append_sized(out, payload);
  return out;
}

Commit Commit::decode(ByteView bytes) {
  ByteReader in(bytes);
  Commit c;
  c.view = in.u64();
  c.height = in.u64();
  c.digest = in.digest();
  c.payload = in.sized();
  in.expect_done();
  return c;
}

Bytes ViewChange::encode() const {
  Bytes out;
  append_u64(out, new_view);
  append_u64(out, tip_height);
  append_u8(out, cert ? 1 : 0);
  if (cert) {
    put_message(out, cert->preprepare);
    append_u32(out, static_cast<std::uint32_t>(cert->prepares.size()));
    for (const auto& p : cert->prepares) put_message(out, p);
  }
  return out;
}

ViewChange ViewChange::decode(ByteView bytes) {
  ByteReader in(bytes);
  ViewChange v;
  v.new_view = in.u64();
  v.tip_height = in.u64();
  const std::uint8_t has = in.u8();
  if (has > 1) throw DecodeError("bad certificate flag");
  if (has) {
    PreparedCert c;
    c.preprepare = get_message(in);
    const std::uint32_t count = in.u32();
    if (count > kMaxListed) throw DecodeError("certificate too large");
    for (std::uint32_t i = 0; i < count; ++i) c.prepares.push_back(get_message(in));
    v.cert = std::move(c);
  }
  in.expect_done();
  return v;
}

Bytes NewView::encode() const {
  Bytes out;
  append_u64(out, view);
  append_u32(out, static_cast<std::uint32_t>(view_changes.size()));
  for (const auto& m : view_changes) put_message(out, m);
  append_u8(out, preprepare ? 1 : 0);
  if (preprepare) put_message(out, *preprepare);
  return out;
}

NewView NewView::decode(ByteView bytes) {
  ByteReader in(bytes);
  NewView v;
  v.view = in.u64();
  const std::uint32_t count = in.u32();
  if (count > kMaxListed) throw DecodeError("too many view-change messages");
  for (std::uint32_t i = 0; i < count; ++i) v.view_changes.push_back(get_message(in));
  const std::uint8_t has = in.u8();
  if (has > 1) throw DecodeError("bad pre-prepare flag");
  if (has) v.preprepare = get_message(in);
  in.expect_done();
  return v;
}

Bytes Extension::encode() const {
  Bytes out;
  append_u64(out, view);
  append_u64(out, height);
  append_sized(out, payload);
  return out;
}

Extension Extension::decode(ByteView bytes) {
  ByteReader in(bytes);
  Extension e;
  e.view = in.u64();
  e.height = in.u64();
  e.payload = in.sized();
  in.expect_done();
  return e;
}

}  // namespace poa::pbft
