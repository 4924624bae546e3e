#pragma once

#include "poa/pbft/replica.hpp"

namespace poa::pbft {

/// Each commit carries a Schnorr signature over the block hash under the
/// sender's signer key; the first Q of them form a multisig solution.
class PlainMode : public SigningMode {
 public:
  PlainMode(crypto::KeyPair signer, std::vector<crypto::Element> signer_keys);

  std::string_view name() const override { return "pbft"; }
  std::optional<Bytes> commit_payload(const chain::Block& block, RoundRef ref) override;
  bool check_commit_payload(std::uint32_t sender, const chain::Block& block, RoundRef ref,
                            ByteView payload) override;
  void on_locally_committed(const chain::Block& block, RoundRef ref,
                            const std::map<std::uint32_t, Bytes>& commits) override;

 private:
  crypto::KeyPair signer_;
  std::vector<crypto::Element> signer_keys_;
};

}  // namespace poa::pbft
