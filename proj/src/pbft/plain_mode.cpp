#include "poa/pbft/plain_mode.hpp"

namespace poa::pbft {

PlainMode::PlainMode(crypto::KeyPair signer, std::vector<crypto::Element> signer_keys)
    : signer_(std::move(signer)), signer_keys_(std::move(signer_keys)) {
  if (signer_keys_.size() > 256) throw std::invalid_argument("multisig index is one byte");
}

std::optional<Bytes> PlainMode::commit_payload(const chain::Block& block, RoundRef) {
  Behavior& b = host().behavior();
  if (b.withhold_signature()) return std::nullopt;
  crypto::SchnorrSignature sig = crypto::schnorr_sign(signer_, block.hash(), host().rng());
  if (b.corrupt_signature()) sig.z += sig.z.group().one();
  return sig.encode();
}

bool PlainMode::check_commit_payload(std::uint32_t sender, const chain::Block& block, RoundRef, ByteView payload) {
  return sender < signer_keys_.size() && crypto::schnorr_verify(signer_keys_[sender], block.hash(), payload);
}

void PlainMode::on_locally_committed(const chain::Block& block, RoundRef,
                                     const std::map<std::uint32_t, Bytes>& commits) {
  const std::uint32_t q = host().config().q;
  std::vector<std::pair<std::uint8_t, Bytes>> sigs;
  std::vector<std::uint32_t> signers;
  for (const auto& [sender, sig] : commits) {
    if (sigs.size() == q) break;
    sigs.emplace_back(static_cast<std::uint8_t>(sender), sig);
    signers.push_back(sender);
  }
  host().submit_solution(block, chain::encode_multisig_solution(sigs), signers);
}

}  // namespace poa::pbft
