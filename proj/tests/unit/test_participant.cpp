#include <memory>

#include "doctest.h"
#include "poa/chain/participant.hpp"
#include "poa/crypto/schnorr.hpp"
#include "poa/sim/simulator.hpp"

using namespace poa;
using namespace poa::chain;
using nlohmann::json;

namespace {

struct Peer : sim::Node, GossipContext {
  sim::Simulator& sim;
  sim::Trace& tr;
  std::uint32_t id;
  std::unique_ptr<Participant> p;

  Peer(sim::Simulator& s, sim::Trace& t, std::uint32_t i) : sim(s), tr(t), id(i) {}
  void on_message(sim::NodeId from, const Bytes& msg) override { p->on_message(from, msg); }
  void send(std::uint32_t peer, const Bytes& msg) override { sim.send(id, peer, msg, "gossip"); }
  double local_clock() const override { return sim.local_clock(id); }
  void schedule(double local_time, std::function<void()> fn) override {
    sim.at(std::max(sim.now(), sim.when_local(id, local_time)), id, std::move(fn));
  }
  void trace(json rec) override {
    rec["t"] = sim.now();
    tr.record(std::move(rec));
  }
};

struct Ring {
  sim::Trace trace;
  sim::Simulator sim;
  crypto::KeyPair key;
  ChainParams params;
  std::vector<std::unique_ptr<Peer>> peers;

  explicit Ring(std::size_t n, std::vector<double> skews = {}) : sim(sim::DelayModel{}, 4, &trace) {
    Rng rng(8);
    key = crypto::generate_keypair(crypto::curve_group(), rng);
    params.challenge.mode = ChallengeMode::AggregateKey;
    params.challenge.group = &crypto::curve_group();
    params.challenge.aggregate_key = key.public_key;
    for (std::uint32_t i = 0; i < n; ++i) {
      peers.push_back(std::make_unique<Peer>(sim, trace, i));
      sim.add_node(peers.back().get(), i < skews.size() ? skews[i] : 0);
    }
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto nn = static_cast<std::uint32_t>(n);
      peers[i]->p = std::make_unique<Participant>(i, params, std::vector<std::uint32_t>{(i + 1) % nn, (i + nn - 1) % nn},
                                                  *peers[i]);
    }
  }

  Block signed_block(const Chain& base, std::string_view tag = "x") {
    Block b = grind(build_template(base, Mempool{}, base.height() + 1, as_bytes(tag)));
    Rng rng(b.height);
    return attach_solution(b, crypto::schnorr_sign(key, b.hash(), rng).encode());
  }

  std::size_t count(std::string_view ev) const {
    std::size_t k = 0;
    for (const auto& r : trace.records()) k += r.value("ev", "") == ev;
    return k;
  }
};

}  // namespace

TEST_CASE("valid block floods to every participant") {
  Ring r(5);
  r.sim.run_until(static_cast<double>(r.params.t0 + r.params.tau));
  const Block b = r.signed_block(r.peers[0]->p->chain());
  CHECK(r.peers[0]->p->submit_block(b) == RejectReason::Accept);
  r.sim.run_until(r.sim.now() + 5);
  for (const auto& p : r.peers) {
    CHECK(p->p->chain().height() == 1);
    CHECK(p->p->chain().tip_hash() == b.hash());
  }
  CHECK(r.count("adopt") == 5);
  CHECK(r.count("reject") == 0);

  // Duplicate delivery changes nothing.
  CHECK(r.peers[2]->p->submit_block(b) == RejectReason::Duplicate);
  r.sim.run_until(r.sim.now() + 5);
  CHECK(r.count("adopt") == 5);
}

TEST_CASE("invalid block is relayed by nobody") {
  Ring r(5);
  r.sim.run_until(static_cast<double>(r.params.t0 + r.params.tau));
  Block b = r.signed_block(r.peers[0]->p->chain());
  b.transactions[0].solution->back() ^= 1;
  // Inject straight into node 1 as if sent by node 0.
  r.sim.send(0, 1, Participant::encode_block(b), "gossip");
  r.sim.run_until(r.sim.now() + 5);
  for (const auto& p : r.peers) CHECK(p->p->chain().height() == 0);
  CHECK(r.count("reject") == 1);
  std::size_t gossip_sends = 0;
  for (const auto& rec : r.trace.records()) gossip_sends += rec.value("ev", "") == "send";
  CHECK(gossip_sends == 1);
}

TEST_CASE("out-of-order blocks are synced") {
  Ring r(3);
  r.sim.run_until(static_cast<double>(r.params.t0 + 3 * r.params.tau));
  Chain ref(r.params);
  std::vector<Block> blocks;
  for (int i = 0; i < 3; ++i) {
    blocks.push_back(r.signed_block(ref));
    REQUIRE(ref.append(blocks.back()) == RejectReason::Accept);
  }
  // Node 0 holds all three; node 1 is handed only the last one.
  for (const auto& b : blocks) REQUIRE(r.peers[0]->p->submit_block(b) == RejectReason::Accept);
  r.sim.run_until(r.sim.now() + 5);
  for (const auto& p : r.peers) CHECK(p->p->chain().height() == 3);

  Ring late(2);
  late.sim.run_until(static_cast<double>(late.params.t0 + 3 * late.params.tau));
  late.sim.crash(1);
  for (const auto& b : blocks) REQUIRE(late.peers[0]->p->submit_block(b) == RejectReason::Accept);
  late.sim.run_until(late.sim.now() + 5);
  late.sim.recover(1);
  CHECK(late.peers[1]->p->chain().height() == 0);
  late.sim.send(0, 1, Participant::encode_block(blocks[2]), "gossip");
  late.sim.run_until(late.sim.now() + 5);
  CHECK(late.peers[1]->p->chain().height() == 3);
}

TEST_CASE("early block waits for the local clock") {
  // Node 1 runs 100 s behind; future_delta is 30.
  Ring r(2, {0, -100});
  r.sim.run_until(static_cast<double>(r.params.t0 + r.params.tau));
  const Block b = r.signed_block(r.peers[0]->p->chain());
  REQUIRE(r.peers[0]->p->submit_block(b) == RejectReason::Accept);
  r.sim.run_until(r.sim.now() + 5);
  CHECK(r.peers[1]->p->chain().height() == 0);
  CHECK(r.count("reject") == 1);
  r.sim.run_until(r.sim.now() + 100);
  CHECK(r.peers[1]->p->chain().height() == 1);
  for (const auto& rec : r.trace.records()) {
    if (rec.value("ev", "") == "adopt") {
      CHECK(rec["ts"].get<double>() <= rec["local_clock"].get<double>() + 30);
    }
  }
}

TEST_CASE("transactions flood once and leave the mempool when mined") {
  Ring r(4);
  r.sim.run_until(static_cast<double>(r.params.t0 + r.params.tau));
  Transaction tx{to_bytes("pay"), false, 0, std::nullopt};
  r.peers[0]->p->submit_tx(tx);
  r.sim.run_until(r.sim.now() + 5);
  for (const auto& p : r.peers) CHECK(p->p->mempool().size() == 1);

  Block b = grind(build_template(r.peers[0]->p->chain(), r.peers[0]->p->mempool(), 1));
  CHECK(b.transactions.size() == 2);
  Rng rng(1);
  b = attach_solution(b, crypto::schnorr_sign(r.key, b.hash(), rng).encode());
  REQUIRE(r.peers[0]->p->submit_block(b) == RejectReason::Accept);
  r.sim.run_until(r.sim.now() + 5);
  for (const auto& p : r.peers) CHECK(p->p->mempool().size() == 0);
}
