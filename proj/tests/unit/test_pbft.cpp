#include <map>
#include <memory>
#include <set>

#include "doctest.h"
#include "cluster.hpp"

using namespace testing_cluster;


TEST_CASE("quorum sizes") {
  CHECK(quorum_sizes(0, 0).n == 1);
  CHECK(quorum_sizes(0, 0).q == 1);
  CHECK(quorum_sizes(1, 0).n == 4);
  CHECK(quorum_sizes(1, 0).q == 3);
  CHECK(quorum_sizes(1, 1).n == 6);
  CHECK(quorum_sizes(1, 1).q == 4);
  CHECK(quorum_sizes(2, 1).n == 9);
  CHECK(quorum_sizes(2, 1).q == 6);
  CHECK(quorum_sizes(0, 2).n == 5);
  CHECK(quorum_sizes(0, 2).q == 3);
  for (int b = 0; b < 20; ++b) {
    for (int c = 0; c < 20; ++c) {
      const QuorumSizes s = quorum_sizes(b, c);
      // Two quorums overlap in more than F_B replicas; a quorum survives F_B + F_C silent ones.
      CHECK(2 * s.q - s.n >= static_cast<std::uint32_t>(b) + 1);
      CHECK(s.n - static_cast<std::uint32_t>(b + c) >= s.q);
    }
  }
  CHECK_THROWS_AS(quorum_sizes(-1, 0), std::invalid_argument);
  ReplicaConfig cfg;
  cfg.n = 5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("message encoding and seals") {
  const crypto::Group& g = crypto::curve_group();
  Rng rng(3);
  const auto k0 = crypto::generate_keypair(g, rng);
  const auto k1 = crypto::generate_keypair(g, rng);
  const std::vector<crypto::Element> keys{k0.public_key, k1.public_key};

  Prepare p{2, 7, {}, to_bytes("xy")};
  p.digest[0] = 9;
  const SignedMessage m = seal(MsgKind::Prepare, 1, p.encode(), k1, rng);
  const SignedMessage back = SignedMessage::decode(m.encode());
  CHECK(back.kind == MsgKind::Prepare);
  CHECK(back.sender == 1);
  CHECK(verify_seal(back, keys));
  const Prepare q = Prepare::decode(back.body);
  CHECK(q.view == 2);
  CHECK(q.height == 7);
  CHECK(q.digest == p.digest);
  CHECK(q.extra == to_bytes("xy"));

  SignedMessage forged = back;
  forged.sender = 0;
  CHECK_FALSE(verify_seal(forged, keys));
  forged = back;
  forged.body.back() ^= 1;
  CHECK_FALSE(verify_seal(forged, keys));
  forged.sender = 5;
  CHECK_FALSE(verify_seal(forged, keys));

  Bytes trailing = m.encode();
  trailing.push_back(0);
  CHECK_THROWS_AS(SignedMessage::decode(trailing), DecodeError);
  Bytes bad_kind = m.encode();
  bad_kind[0] = 9;
  CHECK_THROWS_AS(SignedMessage::decode(bad_kind), DecodeError);

  ViewChange vc{4, 3, PreparedCert{m, {m, m}}};
  const ViewChange vc2 = ViewChange::decode(vc.encode());
  CHECK(vc2.new_view == 4);
  CHECK(vc2.tip_height == 3);
  REQUIRE(vc2.cert);
  CHECK(vc2.cert->prepares.size() == 2);
  CHECK(vc2.cert->preprepare.encode() == m.encode());

  NewView nv{4, {m}, m};
  const NewView nv2 = NewView::decode(nv.encode());
  CHECK(nv2.view == 4);
  CHECK(nv2.view_changes.size() == 1);
  CHECK(nv2.preprepare.has_value());

  const Extension e = Extension::decode(Extension{1, 2, to_bytes("p")}.encode());
  CHECK(e.view == 1);
  CHECK(e.height == 2);
  CHECK(e.payload == to_bytes("p"));
}

TEST_CASE("fault-free cluster commits one block per round") {
  Cluster c(1, 0, 5, 11);
  c.run(kT0 + 7 * kTau);
  for (const auto& h : c.hosts) {
    CHECK(h->ch.height() == 5);
    CHECK(h->replica->view() == 0);
  }
  CHECK(no_fork(c));
  CHECK(c.events("view_change").empty());
  // Every block is adopted at or after its nominal time minus the request lead.
  for (const auto& a : c.events("adopt")) {
    CHECK(a["t"].get<double>() >= static_cast<double>(kT0 + a["height"].get<std::uint64_t>() * kTau) - 15);
  }
}

TEST_CASE("n=6 with one crash fault") {
  Cluster c(1, 1, 4, 5);
  c.sim.crash(3);
  c.run(kT0 + 6 * kTau);
  for (std::uint32_t i = 0; i < 6; ++i) {
    if (i != 3) CHECK(c.hosts[i]->ch.height() == 4);
  }
  CHECK(c.hosts[3]->ch.height() == 0);
  CHECK(no_fork(c));
}

TEST_CASE("silent primary is replaced") {
  std::map<std::uint32_t, std::unique_ptr<Behavior>> byz;
  byz[0] = std::make_unique<Silent>();
  Cluster c(1, 0, 4, 7, std::move(byz));
  c.run(kT0 + 20 * kTau);
  CHECK(common_height(c) == 4);
  CHECK(no_fork(c));
  CHECK_FALSE(c.events("new_view").empty());
  for (std::uint32_t i = 1; i < 4; ++i) CHECK(c.hosts[i]->replica->view() >= 1);
}

TEST_CASE("silent primary without view change stalls") {
  std::map<std::uint32_t, std::unique_ptr<Behavior>> byz;
  byz[0] = std::make_unique<Silent>();
  Cluster c(1, 0, 4, 7, std::move(byz), false);
  c.run(kT0 + 20 * kTau);
  CHECK(common_height(c) == 0);
}

TEST_CASE("equivocating primary cannot fork") {
  std::map<std::uint32_t, std::unique_ptr<Behavior>> byz;
  byz[0] = std::make_unique<Equivocate>();
  Cluster c(1, 0, 4, 9, std::move(byz));
  c.run(kT0 + 20 * kTau);
  CHECK_FALSE(c.events("equivocate").empty());
  CHECK(no_fork(c));
  CHECK(common_height(c) == 4);
}

TEST_CASE("withheld and corrupt commit signatures are tolerated") {
  SUBCASE("withhold") {
    std::map<std::uint32_t, std::unique_ptr<Behavior>> byz;
    byz[2] = std::make_unique<Withhold>();
    Cluster c(1, 0, 3, 13, std::move(byz));
    c.run(kT0 + 5 * kTau);
    CHECK(common_height(c) == 3);
    for (const auto& f : c.events("finalize")) CHECK(f["signers"].size() == 3);
  }
  SUBCASE("corrupt") {
    std::map<std::uint32_t, std::unique_ptr<Behavior>> byz;
    byz[1] = std::make_unique<Corrupt>();
    Cluster c(1, 0, 3, 13, std::move(byz));
    c.run(kT0 + 5 * kTau);
    CHECK(common_height(c) == 3);
    CHECK_FALSE(c.events("commit_invalid").empty());
    for (const auto& f : c.events("finalize")) {
      for (const auto& s : f["signers"]) CHECK(s.get<std::uint32_t>() != 1);
    }
  }
}

TEST_CASE("traces are reproducible per seed") {
  Cluster a(1, 0, 3, 21), b(1, 0, 3, 21);
  a.run(kT0 + 5 * kTau);
  b.run(kT0 + 5 * kTau);
  CHECK(a.trace.hash() == b.trace.hash());
}
