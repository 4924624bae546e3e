#include <map>
#include <set>

#include "cluster.hpp"
#include "doctest.h"
#include "poa/fbft/combinations.hpp"

using namespace testing_cluster;
using poa::fbft::binomial;
using poa::fbft::Combination;
using poa::fbft::enumerate_combinations;
using poa::fbft::Fbft3Mode;
using poa::fbft::Fbft5Mode;

namespace {

// Swallows its own signed blocks, so nobody learns the solution from it.
struct Swallow : Behavior {
  bool intercept_solution(Replica&, const chain::Block&) override { return true; }
};

std::uint64_t pascal(std::uint32_t n, std::uint32_t k) {
  std::vector<std::vector<std::uint64_t>> t(n + 1, std::vector<std::uint64_t>(n + 1, 0));
  for (std::uint32_t i = 0; i <= n; ++i) {
    t[i][0] = 1;
    for (std::uint32_t j = 1; j <= i; ++j) t[i][j] = t[i - 1][j - 1] + (j <= i - 1 ? t[i - 1][j] : 0);
  }
  return t[n][k];
}

void check_solutions(const Cluster& c) {
  for (std::uint32_t i = 0; i < c.qs.n; ++i) {
    if (!c.correct(i)) continue;
    const auto& blocks = c.hosts[i]->ch.blocks();
    for (std::size_t h = 1; h < blocks.size(); ++h) {
      const Bytes* sol = blocks[h].solution();
      REQUIRE(sol);
      CHECK(crypto::schnorr_verify(c.frost_keys.group_public_key, blocks[h].hash(), *sol));
    }
  }
}

std::map<std::uint64_t, std::uint64_t> sessions_per_height(const Cluster& c) {
  std::map<std::uint64_t, std::uint64_t> out;
  for (const auto& e : c.events("signing_complete")) {
    out[e["height"].get<std::uint64_t>()] = e["sessions"].get<std::uint64_t>();
  }
  return out;
}

}  // namespace

TEST_CASE("combinations") {
  const std::vector<Combination> want{{1, 2, 3}, {1, 2, 4}, {1, 3, 4}, {2, 3, 4}};
  CHECK(enumerate_combinations(4, 3) == want);
  CHECK(enumerate_combinations(3, 3) == std::vector<Combination>{{1, 2, 3}});
  CHECK(enumerate_combinations(6, 4).size() == 15);
  CHECK(binomial(6, 4) == 6 * 5 * 4 * 3 / (4 * 3 * 2 * 1));
  for (std::uint32_t n = 1; n <= 9; ++n) {
    for (std::uint32_t k = 1; k <= n; ++k) {
      const auto all = enumerate_combinations(n, k);
      CHECK(all.size() == pascal(n, k));
      CHECK(binomial(n, k) == pascal(n, k));
      CHECK(std::ranges::is_sorted(all));
      CHECK(std::set<Combination>(all.begin(), all.end()).size() == all.size());
      for (const auto& c : all) {
        CHECK(c.size() == k);
        CHECK(std::ranges::is_sorted(c));
        CHECK(std::adjacent_find(c.begin(), c.end()) == c.end());
        CHECK(c.front() >= 1);
        CHECK(c.back() <= n);
      }
    }
  }
  CHECK_THROWS_AS(enumerate_combinations(3, 4), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_combinations(3, 0), std::invalid_argument);
  CHECK(binomial(3, 4) == 0);
}

TEST_CASE("fbft3 refuses oversized combination sets") {
  const crypto::Group& g = crypto::tiny_group();
  Rng rng(2);
  auto keys = frost::dkg_run(12, 6, g, rng);  // C(12,6) = 924
  std::vector<frost::ExtendedCommitment> pub;
  for (int i = 0; i < 12; ++i) pub.push_back(frost::generate_extended_nonce(g, rng).public_part());
  CHECK_THROWS_AS(Fbft3Mode(keys.begin()->second, frost::generate_extended_nonce(g, rng), pub),
                  std::invalid_argument);
  auto small = frost::dkg_run(12, 2, g, rng);  // C(12,2) = 66
  CHECK_NOTHROW(Fbft3Mode(small.begin()->second, frost::generate_extended_nonce(g, rng), pub));
  pub.pop_back();
  CHECK_THROWS_AS(Fbft3Mode(small.begin()->second, frost::generate_extended_nonce(g, rng), pub),
                  std::invalid_argument);
}

TEST_CASE("fbft3 share vectors") {
  Options o;
  o.mode = Mode::Fbft3;
  o.rounds = 0;
  o.seed = 4;
  Cluster c(std::move(o));
  auto& m1 = dynamic_cast<Fbft3Mode&>(c.hosts[1]->replica->mode());
  CHECK(m1.combinations().size() == 4);
  CHECK(m1.shares_per_commit() == 3);
  CHECK(m1.index_of({1, 2, 3}) == 1);
  CHECK(m1.index_of({2, 3, 4}) == 4);
  CHECK(m1.index_of({1, 2}) == 0);

  const chain::Block block = chain::grind(c.hosts[1]->build_template(1));
  const RoundRef ref{0, 1};
  const Bytes payload = *m1.commit_payload(block, ref);
  const auto shares = Fbft3Mode::decode_shares(c.frost_keys.group(), payload);
  REQUIRE(shares.size() == 3);
  // Participant 2 belongs to {1,2,3}, {1,2,4} and {2,3,4}.
  CHECK(shares[0].first == 1);
  CHECK(shares[1].first == 2);
  CHECK(shares[2].first == 4);
  auto& m0 = dynamic_cast<Fbft3Mode&>(c.hosts[0]->replica->mode());
  CHECK(m0.check_commit_payload(1, block, ref, payload));
  for (const auto& [j, z] : shares) {
    CHECK(frost::verify_share({frost::ParticipantId{2}, z}, m0.list_for(ref, j), block.hash(), c.frost_keys));
  }
  // Wrong claimed sender, wrong round, tampered share: all refused.
  CHECK_FALSE(m0.check_commit_payload(2, block, ref, payload));
  CHECK_FALSE(m0.check_commit_payload(1, block, RoundRef{1, 1}, payload));
  auto bad = shares;
  bad[1].second += bad[1].second.group().one();
  CHECK_FALSE(m0.check_commit_payload(1, block, ref, Fbft3Mode::encode_shares(bad)));
  CHECK_FALSE(m0.check_commit_payload(1, block, ref, Bytes{1, 2}));
  // One commit per round.
  CHECK_FALSE(m1.commit_payload(block, ref).has_value());

  // Another height derives different commitment lists.
  const auto& l1 = m0.list_for({0, 1}, 1);
  const auto& l2 = m0.list_for({0, 2}, 1);
  CHECK(l1.entries()[0].D != l2.entries()[0].D);
}

TEST_CASE("fbft3 with a crashed backup") {
  Options o;
  o.mode = Mode::Fbft3;
  o.rounds = 8;
  o.seed = 6;
  Cluster c(std::move(o));
  c.sim.crash(3);
  c.run(kT0 + 10 * kTau);
  for (std::uint32_t i = 0; i < 3; ++i) CHECK(c.hosts[i]->ch.height() == 8);
  CHECK(no_fork(c));
  const auto aggs = c.events("aggregate");
  CHECK_FALSE(aggs.empty());
  // Commit senders are {0,1,2}, so j* is combination 1 = {1,2,3} everywhere.
  for (const auto& a : aggs) CHECK(a["j"] == 1);
  for (std::uint32_t i = 0; i < 3; ++i) {
    const auto& blocks = c.hosts[i]->ch.blocks();
    for (std::size_t h = 1; h < blocks.size(); ++h) {
      CHECK(crypto::schnorr_verify(c.frost_keys.group_public_key, blocks[h].hash(), *blocks[h].solution()));
    }
  }
}

TEST_CASE("fbft3 excludes a corrupt signer") {
  Options o;
  o.mode = Mode::Fbft3;
  o.rounds = 5;
  o.seed = 8;
  o.byz[1] = std::make_unique<Corrupt>();
  Cluster c(std::move(o));
  c.run(kT0 + 7 * kTau);
  CHECK(common_height(c) == 5);
  CHECK_FALSE(c.events("commit_invalid").empty());
  for (const auto& f : c.events("finalize")) {
    for (const auto& s : f["signers"]) CHECK(s.get<std::uint32_t>() != 1);
  }
  check_solutions(c);
}

TEST_CASE("fbft5 fault-free uses one session per block") {
  for (const char* group : {"tiny", "curve"}) {
    Options o;
    o.mode = Mode::Fbft5;
    o.f_b = 1;
    o.f_c = 1;
    o.rounds = 6;
    o.seed = 10;
    o.group = group;
    Cluster c(std::move(o));
    c.run(kT0 + 8 * kTau);
    CHECK(common_height(c) == 6);
    CHECK(no_fork(c));
    const auto per = sessions_per_height(c);
    CHECK(per.size() == 6);
    for (const auto& [h, n] : per) CHECK(n == 1);
    for (const auto& s : c.events("session_open")) CHECK(s["signers"].size() == 2);
    check_solutions(c);
  }
}

TEST_CASE("fbft5 session bound with mute signers") {
  // N = 6, k = F_B + 1 = 2, so at most N - k + 1 = 5 sessions per block.
  for (std::uint32_t f = 1; f <= 4; ++f) {
    CAPTURE(f);
    Options o;
    o.mode = Mode::Fbft5;
    o.f_b = 1;
    o.f_c = 1;
    o.rounds = 10;
    o.seed = 100 + f;
    for (std::uint32_t r = 1; r <= f; ++r) o.byz[r] = std::make_unique<Withhold>();
    Cluster c(std::move(o));
    c.run(kT0 + 12 * kTau);
    CHECK(c.hosts[0]->ch.height() == 10);
    const auto per = sessions_per_height(c);
    CHECK(per.size() == 10);
    for (const auto& [h, n] : per) CHECK(n <= 5);
    CHECK_FALSE(c.events("session_abandoned").empty());
    check_solutions(c);
  }
}

TEST_CASE("fbft5 marks an invalid signer malicious") {
  Options o;
  o.mode = Mode::Fbft5;
  o.f_b = 1;
  o.f_c = 1;
  o.rounds = 10;
  o.seed = 12;
  o.byz[2] = std::make_unique<Corrupt>();
  Cluster c(std::move(o));
  c.run(kT0 + 12 * kTau);
  CHECK(common_height(c) == 10);
  check_solutions(c);
  // Once flagged at a height, replica 2 is never chosen again for that block.
  std::set<std::uint64_t> flagged;
  for (const auto& r : c.trace.records()) {
    const std::string ev = r.value("ev", "");
    if (ev == "malicious") {
      CHECK(r["replica"] == 2);
      flagged.insert(r["height"].get<std::uint64_t>());
    } else if (ev == "session_open" && flagged.contains(r["height"].get<std::uint64_t>())) {
      for (const auto& s : r["signers"]) CHECK(s.get<std::uint32_t>() != 2);
    }
  }
  CHECK_FALSE(flagged.empty());
  for (const auto& f : c.events("finalize")) {
    for (const auto& s : f["signers"]) CHECK(s.get<std::uint32_t>() != 2);
  }
}

TEST_CASE("fbft5 resumes signing under a new primary") {
  Options o;
  o.mode = Mode::Fbft5;
  o.f_b = 1;
  o.f_c = 1;
  o.rounds = 3;
  o.seed = 14;
  o.byz[0] = std::make_unique<Swallow>();
  Cluster c(std::move(o));
  c.run(kT0 + 20 * kTau);
  CHECK(common_height(c) == 3);
  CHECK_FALSE(c.events("new_view").empty());
  // The block content committed in view 0 is what gets signed later.
  std::string proposed;
  for (const auto& r : c.events("preprepare_sent")) {
    if (r["height"] == 1 && r["view"] == 0) proposed = r["digest"];
  }
  REQUIRE_FALSE(proposed.empty());
  CHECK(to_hex(c.hosts[1]->ch.hash_at(1)) == proposed);
  check_solutions(c);
}

TEST_CASE("fbft traces are reproducible") {
  auto run = [](Mode m) {
    Options o;
    o.mode = m;
    o.rounds = 3;
    o.seed = 77;
    Cluster c(std::move(o));
    c.run(kT0 + 5 * kTau);
    return c.trace.hash();
  };
  CHECK(run(Mode::Fbft3) == run(Mode::Fbft3));
  CHECK(run(Mode::Fbft5) == run(Mode::Fbft5));
}
