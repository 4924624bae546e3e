#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "json.hpp"
#include "poa/chain/chain.hpp"
#include "poa/pbft/config.hpp"
#include "poa/pbft/messages.hpp"

namespace poa::pbft {

/// Network, clock and trace services a replica needs from its host.
class ReplicaContext {
 public:
  virtual ~ReplicaContext() = default;
  virtual void send(std::uint32_t replica, const Bytes& msg) = 0;
  /// To every other replica.
  virtual void broadcast(const Bytes& msg) = 0;
  virtual double local_clock() const = 0;
  /// Fires once the local clock reaches `local_time`.
  virtual std::uint64_t set_timer(double local_time, std::function<void()> fn) = 0;
  virtual void cancel_timer(std::uint64_t id) = 0;
  virtual void trace(nlohmann::json rec) = 0;
};

/// The replica's view of its co-located participant (the bridging channel,
/// collapsed to direct calls).
class Bridge {
 public:
  virtual ~Bridge() = default;
  virtual const chain::Chain& chain() const = 0;
  /// Unground template for height chain().height() + 1.
  virtual chain::Block build_template(std::uint64_t height) = 0;
  /// Hands a signed block to the participant for validation and gossip.
  virtual void submit_block(const chain::Block& block) = 0;
};

struct RoundRef {
  std::uint64_t view = 0;
  std::uint64_t height = 0;
  auto operator<=>(const RoundRef&) const = default;
};

class Replica;

/// Scripted deviations for Byzantine replicas. The default is honest.
class Behavior {
 public:
  virtual ~Behavior() = default;
  /// Replica sends nothing at all.
  virtual bool silent() const { return false; }
  /// Takes part in agreement but never contributes signature material.
  virtual bool withhold_signature() const { return false; }
  /// Contributes signature material that fails verification.
  virtual bool corrupt_signature() const { return false; }
  /// As primary, sends conflicting pre-prepares for the same (view, height).
  virtual bool equivocate() const { return false; }
  virtual void on_tip(Replica&, const chain::Block&) {}
  /// Sees a freshly signed block first; returning true suppresses the honest submit.
  virtual bool intercept_solution(Replica&, const chain::Block&) { return false; }
};

/// Per-protocol signing logic plugged into the agreement core.
class SigningMode {
 public:
  virtual ~SigningMode() = default;
  void attach(Replica& r) { host_ = &r; }

  virtual std::string_view name() const = 0;
  /// Extra bytes carried on this replica's prepare for `block`.
  virtual Bytes prepare_payload(const chain::Block&, RoundRef) { return {}; }
  virtual void on_prepare_payload(std::uint32_t /*sender*/, RoundRef, ByteView) {}
  /// Signature material for our commit; nullopt withholds the commit.
  virtual std::optional<Bytes> commit_payload(const chain::Block& block, RoundRef ref) = 0;
  virtual bool check_commit_payload(std::uint32_t sender, const chain::Block& block, RoundRef ref,
                                    ByteView payload) = 0;
  /// `commits` holds every valid commit payload for the block, own included.
  virtual void on_locally_committed(const chain::Block& block, RoundRef ref,
                                    const std::map<std::uint32_t, Bytes>& commits) = 0;
  virtual void on_extension(std::uint32_t /*sender*/, RoundRef, ByteView) {}
  virtual void on_view_installed(std::uint64_t /*view*/) {}
  virtual void on_checkpoint(std::uint64_t /*height*/) {}

 protected:
  Replica& host() { return *host_; }
  const Replica& host() const { return *host_; }

 private:
  Replica* host_ = nullptr;
};

struct ReplicaKeys {
  crypto::KeyPair auth;
  std::vector<crypto::Element> auth_keys;
};

/// Block-specialized PBFT replica. Requests are self-generated at
/// T0 + n*tau - lead_delta, the pre-prepare carries the template, the commit
/// carries signature material, and every adopted block is a stable checkpoint.
class Replica {
 public:
  Replica(ReplicaConfig cfg, ReplicaKeys keys, std::unique_ptr<SigningMode> mode, ReplicaContext& ctx,
          Bridge& bridge, Rng rng, Behavior* behavior = nullptr);

  void start();
  void on_message(std::uint32_t from, ByteView bytes);
  /// Called after the co-located participant adopts `block`.
  void on_checkpoint(const chain::Block& block);
  void on_recover();

  std::uint32_t id() const { return cfg_.id; }
  std::uint64_t view() const { return view_; }
  bool in_view_change() const { return in_view_change_; }
  bool is_primary() const { return cfg_.primary(view_) == cfg_.id; }
  const ReplicaConfig& config() const { return cfg_; }
  ReplicaContext& ctx() { return ctx_; }
  Bridge& bridge() { return bridge_; }
  Rng& rng() { return rng_; }
  Behavior& behavior() { return *behavior_; }
  SigningMode& mode() { return *mode_; }
  std::uint64_t tip_height() const { return bridge_.chain().height(); }
  double timeout() const { return timeout_; }

  /// Pre-prepared block at `ref`, if logged.
  const chain::Block* block_at(RoundRef ref) const;
  bool locally_committed(RoundRef ref) const;

  void send_extension(std::uint32_t to, RoundRef ref, Bytes payload);
  void broadcast_extension(RoundRef ref, Bytes payload);
  /// Attaches the solution and hands the block to the bridge (unless the
  /// behavior intercepts it). Records a finalize trace event.
  void submit_solution(const chain::Block& block, Bytes solution, const std::vector<std::uint32_t>& signers);

  /// Seals and sends an arbitrary message without logging it. Only scripted
  /// deviations use this.
  void inject(MsgKind kind, Bytes body, std::optional<std::uint32_t> to = std::nullopt);

  void trace(nlohmann::json rec);

 private:
  struct Slot {
    std::optional<SignedMessage> preprepare;
    chain::Block block;
    Digest digest{};
    std::map<std::uint32_t, std::pair<Digest, SignedMessage>> prepares;
    std::map<std::uint32_t, Commit> pending_commits;
    std::map<std::uint32_t, Bytes> commits;
    bool prepared = false;
    bool commit_sent = false;
    bool committed = false;
  };

  std::uint64_t current_height() const { return tip_height() + 1; }
  void emit(const SignedMessage& m, std::optional<std::uint32_t> to = std::nullopt);
  SignedMessage make(MsgKind kind, Bytes body);

  void schedule_request();
  void generate_request(std::uint64_t height);
  void propose(std::uint64_t height);
  void start_timer();
  void stop_timer();

  void dispatch(std::uint32_t from, const SignedMessage& m, bool replay);
  bool buffer_if_future(std::uint32_t from, const SignedMessage& m, std::uint64_t view, std::uint64_t height);
  void handle_preprepare(const SignedMessage& m, const PrePrepare& pp);
  void handle_prepare(const SignedMessage& m, const Prepare& p);
  void handle_commit(const SignedMessage& m, const Commit& c);
  void handle_view_change(const SignedMessage& m, const ViewChange& vc);
  void handle_new_view(const SignedMessage& m, const NewView& nv);
  void handle_extension(const SignedMessage& m, const Extension& e);

  void log_preprepare(Slot& s, RoundRef ref, const SignedMessage& m, const chain::Block& block);
  void accept_commit(Slot& s, RoundRef ref, std::uint32_t sender, const Commit& c);
  void check_prepared(Slot& s, RoundRef ref);
  void check_committed(Slot& s, RoundRef ref);

  bool valid_cert(const PreparedCert& cert, std::uint64_t below_view) const;
  /// Highest-view certificate for height max_tip + 1 among the view changes.
  std::optional<PreparedCert> select_cert(const std::vector<std::pair<SignedMessage, ViewChange>>& vcs,
                                          std::uint64_t& target_height) const;
  void start_view_change(std::uint64_t target);
  void maybe_send_new_view(std::uint64_t target);
  void install_view(std::uint64_t v);
  void replay_buffered();

  ReplicaConfig cfg_;
  ReplicaKeys keys_;
  std::unique_ptr<SigningMode> mode_;
  ReplicaContext& ctx_;
  Bridge& bridge_;
  Rng rng_;
  Behavior default_behavior_;
  Behavior* behavior_;

  std::uint64_t view_ = 0;
  bool in_view_change_ = false;
  std::uint64_t pending_view_ = 0;
  double timeout_;
  std::optional<std::uint64_t> vc_timer_;
  std::optional<std::uint64_t> request_timer_;
  std::uint64_t requested_height_ = 0;

  std::map<RoundRef, Slot> log_;
  std::optional<PreparedCert> prepared_cert_;
  std::uint64_t prepared_cert_view_ = 0;
  std::map<std::uint64_t, std::map<std::uint32_t, std::pair<SignedMessage, ViewChange>>> view_changes_;
  std::set<std::uint64_t> new_view_sent_;
  std::optional<SignedMessage> last_new_view_;
  std::uint64_t vc_height_ = 0;
  std::vector<std::pair<std::uint32_t, SignedMessage>> buffered_;
};

}  // namespace poa::pbft
