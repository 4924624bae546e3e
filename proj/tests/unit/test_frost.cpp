#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "doctest.h"
#include "poa/frost/hd.hpp"
#include "poa/frost/keygen.hpp"
#include "poa/frost/signing.hpp"

using namespace poa;
using namespace poa::crypto;
using namespace poa::frost;

namespace {

constexpr std::uint64_t q = TinyParams::q;

std::uint64_t mod_pow(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1;
  b %= m;
  while (e) {
    if (e & 1) r = r * b % m;
    b = b * b % m;
    e >>= 1;
  }
  return r;
}

std::uint64_t as_int(const Scalar& s) {
  Bytes b = s.encode();
  return (std::uint64_t{b[0]} << 8) | b[1];
}

// Integer Lagrange interpolation at zero over Z_q.
std::uint64_t interpolate_at_zero(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& pts) {
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::uint64_t num = 1, den = 1;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      num = num * pts[j].first % q;
      den = den * ((pts[j].first + q - pts[i].first) % q) % q;
    }
    acc = (acc + pts[i].second * num % q * mod_pow(den, q - 2, q)) % q;
  }
  return acc;
}

std::uint64_t tiny_dlog(const Element& y) {
  const Group& g = tiny_group();
  for (std::uint64_t a = 0; a < q; ++a) {
    if (g.exp_generator(g.scalar(a)) == y) return a;
  }
  FAIL("element outside the subgroup");
  return 0;
}

std::vector<std::vector<std::uint32_t>> subsets(std::uint32_t n, std::uint32_t k) {
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> cur;
  auto rec = [&](auto&& self, std::uint32_t next) -> void {
    if (cur.size() == k) {
      out.push_back(cur);
      return;
    }
    for (std::uint32_t i = next; i <= n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 1);
  return out;
}

struct Round {
  CommitmentList list;
  std::vector<SignatureShare> shares;
};

Round sign_round(const std::map<ParticipantId, KeyMaterial>& keys, const std::vector<std::uint32_t>& ids,
                 ByteView msg, Rng& rng) {
  std::map<std::uint32_t, NonceCommitmentPair> nonces;
  std::vector<CommitmentEntry> entries;
  for (std::uint32_t id : ids) {
    auto p = preprocess(1, keys.at({id}), rng).front();
    entries.push_back({{id}, p.D, p.E});
    nonces.emplace(id, p);
  }
  Round r{CommitmentList(entries), {}};
  for (std::uint32_t id : ids) r.shares.push_back(sign_share(keys.at({id}), nonces.at(id), msg, r.list));
  return r;
}

}  // namespace

TEST_CASE("dkg n=2 k=1 yields constant-term shares") {
  const Group& g = tiny_group();
  Rng rng(1);
  auto keys = dkg_run(2, 1, g, rng);
  REQUIRE(keys.size() == 2);
  // Degree zero: both participants hold the same share and it is the group secret.
  CHECK(keys.at({1}).secret_share == keys.at({2}).secret_share);
  CHECK(g.exp_generator(keys.at({1}).secret_share) == keys.at({1}).group_public_key());
  CHECK(keys.at({1}).group_public_key() == keys.at({2}).group_public_key());
}

TEST_CASE("dkg n=3 k=2 on the tiny group interpolates to the group secret") {
  const Group& g = tiny_group();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    auto keys = dkg_run(3, 2, g, rng);
    const Element y = keys.at({1}).group_public_key();
    const std::uint64_t a0 = tiny_dlog(y);
    for (const auto& [id, km] : keys) {
      CHECK(km.group_public_key() == y);
      CHECK(g.exp_generator(km.secret_share) == km.public_keys.verification_share(id));
    }
    for (const auto& s : subsets(3, 2)) {
      std::vector<std::pair<std::uint64_t, std::uint64_t>> pts;
      for (std::uint32_t i : s) pts.emplace_back(i, as_int(keys.at({i}).secret_share));
      CHECK(interpolate_at_zero(pts) == a0);
    }
    // One share is consistent with every candidate secret: exactly one line
    // through (0, a) and (1, s_1) for each a.
    const std::uint64_t s1 = as_int(keys.at({1}).secret_share);
    std::set<std::uint64_t> slopes;
    for (std::uint64_t a = 0; a < q; ++a) slopes.insert((s1 + q - a) % q);
    CHECK(slopes.size() == q);
  }
}

TEST_CASE("dkg interpolation soundness for every k-subset") {
  for (auto [n, k] : {std::pair{4u, 3u}, std::pair{6u, 4u}, std::pair{5u, 2u}}) {
    Rng rng(n * 100 + k);
    auto keys = dkg_run(n, k, tiny_group(), rng);
    const std::uint64_t a0 = tiny_dlog(keys.at({1}).group_public_key());
    for (const auto& s : subsets(n, k)) {
      std::vector<std::pair<std::uint64_t, std::uint64_t>> pts;
      for (std::uint32_t i : s) pts.emplace_back(i, as_int(keys.at({i}).secret_share));
      CHECK(interpolate_at_zero(pts) == a0);
    }
  }
}

TEST_CASE("dkg flags a dealer whose share contradicts its commitments") {
  Rng rng(5);
  auto tamper = [](ParticipantId dealer, ParticipantId receiver, Scalar& s) {
    if (dealer.value == 2 && receiver.value == 3) s = s + s.group().one();
  };
  try {
    dkg_run(3, 2, tiny_group(), rng, tamper);
    FAIL("expected DkgError");
  } catch (const DkgError& e) {
    CHECK(e.dealer == ParticipantId{2});
    CHECK(e.receiver == ParticipantId{3});
  }
}

TEST_CASE("lagrange coefficients") {
  const Group& g = tiny_group();
  CHECK(lagrange_coefficient(g, {1}, {{1}}) == g.one());
  CHECK(lagrange_coefficient(g, {1}, {{1}, {2}}) == g.scalar(2));
  CHECK(lagrange_coefficient(g, {2}, {{1}, {2}}) == g.scalar(q - 1));
  CHECK_THROWS_AS(lagrange_coefficient(g, {3}, {{1}, {2}}), std::invalid_argument);
  CHECK_THROWS_AS(lagrange_coefficient(g, {1}, {{1}, {1}}), std::invalid_argument);
  CHECK_THROWS_AS(lagrange_coefficient(g, {0}, {{0}, {1}}), std::invalid_argument);

  Rng rng(99);
  const std::vector<ParticipantId> set = {{1}, {2}, {3}};
  for (int trial = 0; trial < 100; ++trial) {
    const std::uint64_t c0 = rng.uniform(q), c1 = rng.uniform(q), c2 = rng.uniform(q);
    Scalar acc = g.zero();
    for (ParticipantId i : set) {
      const std::uint64_t x = i.value;
      const std::uint64_t fx = (c0 + c1 * x + c2 * x % q * x) % q;
      acc += lagrange_coefficient(g, i, set) * g.scalar(fx);
    }
    CHECK(as_int(acc) == c0);
  }
}

TEST_CASE("preprocess") {
  Rng rng(2);
  auto keys = dkg_run(3, 2, tiny_group(), rng);
  const Group& g = tiny_group();
  auto one = preprocess(1, keys.at({1}), rng);
  REQUIRE(one.size() == 1);
  CHECK(one[0].D == g.exp_generator(one[0].d));
  CHECK(one[0].E == g.exp_generator(one[0].e));
  CHECK_FALSE(one[0].used);

  auto three = preprocess(3, keys.at({1}), rng);
  REQUIRE(three.size() == 3);
  std::set<std::uint64_t> ds, es;
  for (const auto& p : three) {
    ds.insert(as_int(p.d));
    es.insert(as_int(p.e));
  }
  CHECK(ds.size() == 3);
  CHECK(es.size() == 3);
  CHECK_THROWS_AS(preprocess(0, keys.at({1}), rng), std::invalid_argument);
}

TEST_CASE("commitment list ordering") {
  const Group& g = tiny_group();
  const Element e = g.generator();
  CHECK_THROWS_AS(CommitmentList({{{2}, e, e}, {{1}, e, e}}), std::invalid_argument);
  CHECK_THROWS_AS(CommitmentList({{{1}, e, e}, {{1}, e, e}}), std::invalid_argument);
  CommitmentList l({{{1}, e, e}, {{4}, e, e}});
  CHECK(l.contains({4}));
  CHECK_FALSE(l.contains({2}));
  CHECK(l.encode().size() == 2 * (4 + 2 * g.element_size()));
}

TEST_CASE("single signer degenerate case") {
  for (const Group* g : {&tiny_group(), &curve_group()}) {
    Rng rng(4);
    auto keys = dkg_run(1, 1, *g, rng);
    const ByteView block = as_bytes("block");
    const Bytes msg(block.begin(), block.end());
    Round r = sign_round(keys, {1}, msg, rng);
    const SchnorrSignature sig{SigningPackage(r.list, msg, keys.at({1}).group_public_key()).R, r.shares[0].z};
    CHECK(schnorr_verify(keys.at({1}).group_public_key(), msg, sig));
  }
}

TEST_CASE("sign_share consumes the nonce") {
  Rng rng(6);
  auto keys = dkg_run(3, 2, tiny_group(), rng);
  const Bytes msg = from_hex("abcd");
  auto n1 = preprocess(1, keys.at({1}), rng).front();
  auto n2 = preprocess(1, keys.at({2}), rng).front();
  CommitmentList l({{{1}, n1.D, n1.E}, {{2}, n2.D, n2.E}});
  sign_share(keys.at({1}), n1, msg, l);
  CHECK(n1.used);
  CHECK_THROWS_AS(sign_share(keys.at({1}), n1, msg, l), NonceReuseError);

  auto n3 = preprocess(1, keys.at({3}), rng).front();
  CHECK_THROWS_AS(sign_share(keys.at({3}), n3, msg, l), std::invalid_argument);
  CommitmentList short_list({{{2}, n2.D, n2.E}});
  CHECK_THROWS_AS(sign_share(keys.at({2}), n2, msg, short_list), std::invalid_argument);
  CHECK_FALSE(n2.used);
}

TEST_CASE("verify_share accepts exactly the honest share on the tiny group") {
  const Group& g = tiny_group();
  Rng rng(8);
  auto keys = dkg_run(3, 2, g, rng);
  const Bytes msg = from_hex("0badf00d");
  Round r = sign_round(keys, {1, 3}, msg, rng);
  const PublicKeyPackage& pub = keys.at({1}).public_keys;
  for (const SignatureShare& honest : r.shares) {
    CHECK(verify_share(honest, r.list, msg, pub));
    std::size_t accepted = 0;
    for (std::uint64_t z = 0; z < q; ++z) {
      if (verify_share({honest.signer, g.scalar(z)}, r.list, msg, pub)) ++accepted;
    }
    CHECK(accepted == 1);
    CHECK_FALSE(verify_share({honest.signer, honest.z + g.one()}, r.list, msg, pub));
  }

  // Same signers, different commitment list: binding values change.
  Round other = sign_round(keys, {1, 3}, msg, rng);
  CHECK_FALSE(verify_share(r.shares[0], other.list, msg, pub));
  CHECK_FALSE(verify_share(r.shares[0], r.list, from_hex("0badf00e"), pub));
}

TEST_CASE("aggregate verifies for every k-subset") {
  for (const Group* g : {&tiny_group(), &curve_group()}) {
    for (auto [n, k] : {std::pair{3u, 2u}, std::pair{6u, 4u}}) {
      CAPTURE(g->name());
      CAPTURE(n);
      Rng rng(n * 31 + k);
      auto keys = dkg_run(n, k, *g, rng);
      const Element y = keys.at({1}).group_public_key();
      const Bytes msg = from_hex("00112233");
      std::size_t ok = 0;
      const auto all = subsets(n, k);
      for (const auto& s : all) {
        Round r = sign_round(keys, s, msg, rng);
        SchnorrSignature sig = aggregate(r.shares, r.list, msg, keys.at({1}).public_keys);
        if (schnorr_verify(y, msg, sig)) ++ok;
      }
      CHECK(ok == all.size());
      CHECK(all.size() == (n == 3 ? 3u : 15u));
    }
  }
}

TEST_CASE("aggregate with more than k signers") {
  Rng rng(12);
  auto keys = dkg_run(5, 3, curve_group(), rng);
  const Bytes msg = from_hex("ff");
  Round r = sign_round(keys, {1, 2, 4, 5}, msg, rng);
  CHECK(schnorr_verify(keys.at({1}).group_public_key(), msg, aggregate(r.shares, r.list, msg, keys.at({1}).public_keys)));
}

TEST_CASE("aggregate names a corrupted signer") {
  Rng rng(13);
  auto keys = dkg_run(3, 2, tiny_group(), rng);
  const Bytes msg = from_hex("01");
  Round r = sign_round(keys, {2, 3}, msg, rng);
  r.shares[1].z = r.shares[1].z + tiny_group().one();
  try {
    aggregate(r.shares, r.list, msg, keys.at({1}).public_keys);
    FAIL("expected AggregationError");
  } catch (const AggregationError& e) {
    CHECK(e.signer == ParticipantId{3});
  }
  r.shares.pop_back();
  CHECK_THROWS_AS(aggregate(r.shares, r.list, msg, keys.at({1}).public_keys), std::invalid_argument);
}

TEST_CASE("hd derivation") {
  for (const Group* g : {&tiny_group(), &curve_group()}) {
    CAPTURE(g->name());
    Rng rng(21);
    const ExtendedNonce secret = generate_extended_nonce(*g, rng);
    const ExtendedCommitment pub = secret.public_part();
    const ExtendedCommitment copy = pub;
    std::set<Bytes> tweaks;
    for (std::uint64_t h = 1; h <= 4; ++h) {
      for (std::uint64_t v = 0; v < 2; ++v) {
        for (std::uint32_t j = 0; j < 5; ++j) {
          const HdIndex idx{h, v, j};
          auto [D, E] = derive_commitment(pub, idx);
          auto [D2, E2] = derive_commitment(copy, idx);
          NonceCommitmentPair n = derive_nonce(secret, idx);
          CHECK(D == D2);
          CHECK(E == E2);
          CHECK(n.D == D);
          CHECK(n.E == E);
          CHECK(g->exp_generator(n.d) == D);
          Bytes t = hd_tweak(*g, pub.chain_code, 'D', idx).encode();
          append(t, hd_tweak(*g, pub.chain_code, 'E', idx).encode());
          tweaks.insert(t);
        }
      }
    }
    CHECK(tweaks.size() == 4 * 2 * 5);
  }
}

TEST_CASE("hd-derived nonces sign like fresh ones") {
  Rng rng(22);
  auto keys = dkg_run(4, 3, curve_group(), rng);
  std::map<std::uint32_t, ExtendedNonce> ext;
  for (std::uint32_t i = 1; i <= 4; ++i) ext.emplace(i, generate_extended_nonce(curve_group(), rng));
  const Bytes msg = from_hex("c0ffee");
  const HdIndex idx{7, 0, 2};
  std::vector<CommitmentEntry> entries;
  for (std::uint32_t i : {1u, 2u, 4u}) {
    auto [D, E] = derive_commitment(ext.at(i).public_part(), idx);
    entries.push_back({{i}, D, E});
  }
  CommitmentList l(entries);
  std::vector<SignatureShare> shares;
  for (std::uint32_t i : {1u, 2u, 4u}) {
    NonceCommitmentPair n = derive_nonce(ext.at(i), idx);
    shares.push_back(sign_share(keys.at({i}), n, msg, l));
  }
  CHECK(schnorr_verify(keys.at({1}).group_public_key(), msg, aggregate(shares, l, msg, keys.at({1}).public_keys)));
}
