#include "poa/harness/runner.hpp"

#include <map>
#include <memory>

#include "poa/chain/genesis.hpp"
#include "poa/chain/participant.hpp"
#include "poa/fbft/fbft3.hpp"
#include "poa/fbft/fbft5.hpp"
#include "poa/frost/keygen.hpp"
#include "poa/harness/checks.hpp"
#include "poa/pbft/plain_mode.hpp"

namespace poa::harness {

using nlohmann::json;

namespace {

class Network;

// One simulated machine: a participant, plus a replica when it is a miner.
// Channel byte 0 carries consensus traffic, 1 carries gossip.
class MinerNode : public sim::Node, public pbft::Bridge {
 public:
  MinerNode(Network& net, std::uint32_t id) : net_(net), id_(id), consensus_(*this), gossip_(*this) {}

  void on_start() override {
    if (replica) replica->start();
  }
  void on_message(sim::NodeId from, const Bytes& msg) override;
  void on_recover() override {
    participant->request_sync();
    if (replica) replica->on_recover();
  }

  const chain::Chain& chain() const override { return participant->chain(); }
  chain::Block build_template(std::uint64_t height) override {
    return chain::build_template(participant->chain(), participant->mempool(), height,
                                 as_bytes("miner" + std::to_string(id_)));
  }
  void submit_block(const chain::Block& block) override;
  /// Floods raw block bytes to the participant's peers, skipping validation.
  void gossip_unchecked(const chain::Block& block);

  std::uint32_t id() const { return id_; }
  double local_clock() const;
  std::uint64_t set_timer(double local_time, std::function<void()> fn);
  void record(json rec);

  pbft::ReplicaContext& consensus() { return consensus_; }
  chain::GossipContext& gossip() { return gossip_; }

  std::unique_ptr<chain::Participant> participant;
  std::unique_ptr<pbft::Replica> replica;

 private:
  struct Consensus : pbft::ReplicaContext {
    explicit Consensus(MinerNode& n) : node(n) {}
    MinerNode& node;
    void send(std::uint32_t to, const Bytes& msg) override;
    void broadcast(const Bytes& msg) override;
    double local_clock() const override { return node.local_clock(); }
    std::uint64_t set_timer(double t, std::function<void()> fn) override { return node.set_timer(t, std::move(fn)); }
    void cancel_timer(std::uint64_t id) override;
    void trace(json rec) override { node.record(std::move(rec)); }
  };
  struct Gossip : chain::GossipContext {
    explicit Gossip(MinerNode& n) : node(n) {}
    MinerNode& node;
    void send(std::uint32_t peer, const Bytes& msg) override;
    double local_clock() const override { return node.local_clock(); }
    void schedule(double t, std::function<void()> fn) override { node.set_timer(t, std::move(fn)); }
    void trace(json rec) override { node.record(std::move(rec)); }
  };

  Network& net_;
  std::uint32_t id_;
  Consensus consensus_;
  Gossip gossip_;
};

class Network {
 public:
  Network(const ScenarioConfig& cfg, sim::Trace& trace, sim::DelayModel delays)
      : cfg(cfg), sim(std::move(delays), cfg.seed, &trace) {}

  const ScenarioConfig& cfg;
  sim::Simulator sim;
  std::vector<std::unique_ptr<MinerNode>> nodes;
  std::vector<std::unique_ptr<pbft::Behavior>> behaviors;
};

void MinerNode::on_message(sim::NodeId from, const Bytes& msg) {
  if (msg.empty()) return;
  const ByteView body = ByteView(msg).subspan(1);
  if (msg[0] == 0) {
    if (replica && from < net_.cfg.n()) replica->on_message(from, body);
  } else {
    participant->on_message(from, body);
  }
}

void MinerNode::submit_block(const chain::Block& block) {
  // Deferred so the replica is never re-entered from inside its own callbacks.
  net_.sim.after(0, id_, [this, block] { participant->submit_block(block); });
}

void MinerNode::gossip_unchecked(const chain::Block& block) {
  const Bytes msg = chain::Participant::encode_block(block);
  for (std::uint32_t p : participant->peers()) gossip_.send(p, msg);
}

double MinerNode::local_clock() const { return net_.sim.local_clock(id_); }

std::uint64_t MinerNode::set_timer(double local_time, std::function<void()> fn) {
  return net_.sim.at(std::max(net_.sim.now(), net_.sim.when_local(id_, local_time)), id_, std::move(fn));
}

void MinerNode::record(json rec) {
  if (!rec.contains("node")) rec["node"] = id_;
  rec["t"] = net_.sim.now();
  net_.sim.trace()->record(std::move(rec));
}

void MinerNode::Consensus::send(std::uint32_t to, const Bytes& msg) {
  Bytes framed{0};
  append(framed, msg);
  node.net_.sim.send(node.id_, to, std::move(framed), "consensus");
}

void MinerNode::Consensus::broadcast(const Bytes& msg) {
  for (std::uint32_t r = 0; r < node.net_.cfg.n(); ++r) {
    if (r != node.id_) send(r, msg);
  }
}

void MinerNode::Consensus::cancel_timer(std::uint64_t id) { node.net_.sim.cancel(id); }

void MinerNode::Gossip::send(std::uint32_t peer, const Bytes& msg) {
  Bytes framed{1};
  append(framed, msg);
  node.net_.sim.send(node.id_, peer, std::move(framed), "gossip");
}

// ---------------------------------------------------------------- scripts

struct SilentScript : pbft::Behavior {
  bool silent() const override { return true; }
};

struct MuteScript : pbft::Behavior {
  bool withhold_signature() const override { return true; }
};

struct EquivocateScript : pbft::Behavior {
  bool equivocate() const override { return true; }
};

struct InvalidShareScript : pbft::Behavior {
  bool corrupt_signature() const override { return true; }
};

// Calmness attack: as soon as a tip lands, pushes blocks for the next few
// heights at consensus and gossip level, long before their nominal time.
struct PrematureScript : pbft::Behavior {
  explicit PrematureScript(MinerNode& n) : node(n) {}
  MinerNode& node;

  void on_tip(pbft::Replica& r, const chain::Block& tip) override {
    const chain::Chain& ch = node.chain();
    const crypto::Group& g = *ch.params().challenge.group;
    chain::Block prev = tip;
    json hashes = json::array();
    for (std::uint64_t h = tip.height + 1; h <= tip.height + 3; ++h) {
      chain::Block b;
      b.height = h;
      b.transactions.push_back(chain::Transaction::coinbase(h, ch.params().subsidy, as_bytes("premature")));
      b.header.prev_hash = prev.hash();
      b.header.merkle_root = chain::merkle_root_excluding_solution(b.transactions);
      b.header.timestamp = ch.params().nominal_timestamp(h);
      b.header.nbits = ch.params().nbits;
      b = chain::grind(std::move(b));
      if (h == tip.height + 1) r.inject(pbft::MsgKind::PrePrepare, pbft::PrePrepare{r.view(), h, b}.encode());
      Bytes junk(crypto::SchnorrSignature::encoded_size(g), 0x5a);
      node.gossip_unchecked(chain::attach_solution(b, std::move(junk)));
      hashes.push_back(to_hex(b.hash()));
      prev = b;
    }
    node.record({{"ev", "premature_flood"}, {"height", tip.height + 1}, {"hashes", hashes}});
  }
};

// Re-grinds nNonce on each signed block it sees and gossips that copy: in
// place of its own finalized block, or after adopting someone else's.
struct NonceTweakScript : pbft::Behavior {
  explicit NonceTweakScript(MinerNode& n) : node(n) {}
  MinerNode& node;
  std::uint64_t last = 0;

  void tweak(const chain::Block& signed_block) {
    if (signed_block.height <= last) return;
    last = signed_block.height;
    chain::Block t = signed_block;
    do {
      ++t.header.nonce;
    } while (!chain::meets_target(t.hash(), t.header.nbits));
    node.record({{"ev", "nonce_tweak"}, {"height", t.height}, {"original", to_hex(signed_block.hash())},
                 {"tweaked", to_hex(t.hash())}});
    node.gossip_unchecked(t);
  }

  bool intercept_solution(pbft::Replica&, const chain::Block& signed_block) override {
    tweak(signed_block);
    return true;
  }
  void on_tip(pbft::Replica&, const chain::Block& tip) override {
    if (tip.height > 0) tweak(tip);
  }
};

std::unique_ptr<pbft::Behavior> make_script(const std::string& name, MinerNode& node) {
  if (name == "silent") return std::make_unique<SilentScript>();
  if (name == "mute") return std::make_unique<MuteScript>();
  if (name == "equivocate") return std::make_unique<EquivocateScript>();
  if (name == "invalid-share") return std::make_unique<InvalidShareScript>();
  if (name == "premature-block") return std::make_unique<PrematureScript>(node);
  if (name == "nonce-tweak") return std::make_unique<NonceTweakScript>(node);
  throw ConfigError("unknown byzantine script '" + name + "'");
}

// Ring plus a chord to the opposite side.
std::vector<std::uint32_t> mesh_peers(std::uint32_t i, std::uint32_t total) {
  if (total <= 1) return {};
  std::vector<std::uint32_t> p{(i + 1) % total, (i + total - 1) % total};
  if (total > 4) p.push_back((i + total / 2) % total);
  return p;
}

}  // namespace

RunOutput run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const std::uint32_t n = cfg.n();
  const std::uint32_t q = cfg.q();
  const std::uint32_t k = cfg.k();
  const std::uint32_t total = cfg.total_nodes();
  const crypto::Group& g = crypto::group_by_name(cfg.ciphersuite);
  const double t0 = static_cast<double>(cfg.t0);

  // Key material comes from its own stream so the network schedule does not
  // depend on how many random draws key generation made.
  Rng keys_rng(derive_seed(cfg.seed, "keys"));
  std::vector<crypto::KeyPair> auth, signer;
  std::vector<crypto::Element> auth_pub, signer_pub;
  for (std::uint32_t i = 0; i < n; ++i) {
    auth.push_back(crypto::generate_keypair(g, keys_rng));
    auth_pub.push_back(auth.back().public_key);
    signer.push_back(crypto::generate_keypair(g, keys_rng));
    signer_pub.push_back(signer.back().public_key);
  }

  chain::ChainParams params;
  params.t0 = cfg.t0;
  params.tau = cfg.tau;
  params.nbits = cfg.nbits;
  params.future_delta = cfg.future_delta;
  params.subsidy = cfg.subsidy;
  params.challenge.group = &g;
  std::map<frost::ParticipantId, frost::KeyMaterial> frost_keys;
  std::vector<frost::ExtendedNonce> hd;
  std::vector<frost::ExtendedCommitment> published;
  if (cfg.mode == ProtocolMode::PlainConcat) {
    params.challenge.mode = chain::ChallengeMode::Multisig;
    params.challenge.signer_keys = signer_pub;
    params.challenge.required = q;
  } else {
    frost_keys = frost::dkg_run(n, k, g, keys_rng);
    params.challenge.mode = chain::ChallengeMode::AggregateKey;
    params.challenge.aggregate_key = frost_keys.begin()->second.group_public_key();
    if (cfg.mode == ProtocolMode::Fbft3) {
      for (std::uint32_t i = 0; i < n; ++i) {
        hd.push_back(frost::generate_extended_nonce(g, keys_rng));
        published.push_back(hd.back().public_part());
      }
    }
  }

  sim::DelayModel delays = cfg.delays;
  delays.gst += t0;
  for (auto& w : delays.partitions) {
    w.start += t0;
    w.end += t0;
  }

  RunOutput out;
  std::vector<std::uint32_t> byz_ids, crash_ids;
  for (const auto& b : cfg.byzantine) byz_ids.push_back(b.node);
  for (const auto& c : cfg.crashes) crash_ids.push_back(c.node);
  out.trace.record({{"t", 0},
                    {"ev", "scenario"},
                    {"config", scenario_to_json(cfg)},
                    {"n", n},
                    {"q", q},
                    {"k", k},
                    {"miners", n},
                    {"nodes", total},
                    {"byzantine", byz_ids},
                    {"crashed", crash_ids},
                    {"fault_budget_ok", cfg.within_fault_budget()},
                    {"genesis", chain::genesis_to_json(params)}});

  Network net(cfg, out.trace, delays);
  Rng skew_rng(derive_seed(cfg.seed, "skew"));
  for (std::uint32_t i = 0; i < total; ++i) {
    net.nodes.push_back(std::make_unique<MinerNode>(net, i));
    const double skew = cfg.clock_skew > 0 ? skew_rng.uniform_real(-cfg.clock_skew, cfg.clock_skew) : 0.0;
    net.sim.add_node(net.nodes.back().get(), skew);
  }
  std::map<std::uint32_t, std::string> scripts;
  for (const auto& b : cfg.byzantine) scripts[b.node] = b.script;

  for (std::uint32_t i = 0; i < total; ++i) {
    MinerNode& node = *net.nodes[i];
    node.participant = std::make_unique<chain::Participant>(i, params, mesh_peers(i, total), node.gossip());
    if (i >= n) continue;

    pbft::ReplicaConfig rc;
    rc.n = n;
    rc.q = q;
    rc.f_b = static_cast<std::uint32_t>(cfg.f_b);
    rc.f_c = static_cast<std::uint32_t>(cfg.f_c);
    rc.id = i;
    rc.t0 = cfg.t0;
    rc.tau = cfg.tau;
    rc.lead_delta = cfg.lead_delta;
    rc.future_delta = static_cast<double>(cfg.future_delta);
    rc.view_change_timeout = cfg.view_change_timeout;
    rc.view_change_enabled = cfg.view_change;
    rc.max_height = cfg.rounds;

    std::unique_ptr<pbft::SigningMode> mode;
    try {
      switch (cfg.mode) {
        case ProtocolMode::PlainConcat:
          mode = std::make_unique<pbft::PlainMode>(signer[i], signer_pub);
          break;
        case ProtocolMode::Fbft3:
          mode = std::make_unique<fbft::Fbft3Mode>(frost_keys.at(frost::ParticipantId{i + 1}), hd[i], published);
          break;
        case ProtocolMode::Fbft5:
          mode = std::make_unique<fbft::Fbft5Mode>(frost_keys.at(frost::ParticipantId{i + 1}), cfg.session_timeout);
          break;
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    pbft::Behavior* behavior = nullptr;
    if (auto it = scripts.find(i); it != scripts.end()) {
      net.behaviors.push_back(make_script(it->second, node));
      behavior = net.behaviors.back().get();
    }
    node.replica = std::make_unique<pbft::Replica>(rc, pbft::ReplicaKeys{auth[i], auth_pub}, std::move(mode),
                                                   node.consensus(), node, net.sim.rng().fork("replica" + std::to_string(i)),
                                                   behavior);
    pbft::Replica* r = node.replica.get();
    node.participant->on_adopt = [r](const chain::Block& b) { r->on_checkpoint(b); };
  }

  for (const auto& c : cfg.crashes) {
    const std::uint32_t id = c.node;
    net.sim.at(t0 + c.at, sim::kNoOwner, [&net, id] { net.sim.crash(id); });
    if (c.recover) net.sim.at(t0 + *c.recover, sim::kNoOwner, [&net, id] { net.sim.recover(id); });
  }
  // Background transactions, one batch halfway through each round.
  Rng tx_rng(derive_seed(cfg.seed, "txs"));
  for (std::uint64_t r = 1; r <= cfg.rounds && cfg.txs_per_round > 0; ++r) {
    for (std::uint32_t j = 0; j < cfg.txs_per_round; ++j) {
      const std::uint32_t target = static_cast<std::uint32_t>(tx_rng.uniform(total));
      const std::string payload = "tx-" + std::to_string(r) + "-" + std::to_string(j);
      const double at = t0 + (static_cast<double>(r) - 0.5) * static_cast<double>(cfg.tau);
      net.sim.at(at, target, [&net, target, payload] {
        net.nodes[target]->participant->submit_tx(chain::Transaction{to_bytes(payload), false, 0, std::nullopt});
      });
    }
  }

  net.sim.at(t0, sim::kNoOwner, [&net] { net.sim.start(); });
  const double end = t0 + static_cast<double>(cfg.rounds * cfg.tau + cfg.tau);
  net.sim.run_until(end);
  out.trace.record({{"t", end}, {"ev", "end"}, {"events", net.sim.events_processed()}});

  out.report = evaluate_trace(out.trace);
  out.pass = out.report.at("pass").get<bool>();
  return out;
}

}  // namespace poa::harness
