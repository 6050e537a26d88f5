#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <numeric>
#include <vector>

#include "fixtures.hpp"
#include "ranksec/nirank.hpp"
#include "ranksec/rank_core.hpp"

using namespace ranksec;
using testfix::fixed_key;

namespace {

Int dealer_signed(const KeyMaterial& km, const Ciphertext& c) {
  return to_signed(km.params, decrypt_with_dealer(km.params, km.dealer, c));
}

Ciphertext fold_shares(const PublicParams& pp, const std::vector<ReshareOutput>& shares) {
  Ciphertext acc = shares[0].enc_share;
  for (size_t i = 1; i < shares.size(); ++i) acc = hom_add(pp, acc, shares[i].enc_share);
  return acc;
}

}  // namespace

TEST_CASE("distributed decryption round-trips signed values") {
  const KeyMaterial& km = fixed_key(512, 3, 1);
  WorkerSet ws = worker_set(km);
  Rng rng(3101);
  CHECK(ddec(ws, encrypt(km.params, Int(-7), rng).ct, rng) == -7);
  CHECK(ddec(ws, encrypt(km.params, Int(0), rng).ct, rng) == 0);
  CHECK(ddec(ws, encrypt(km.params, Int(123456), rng).ct, rng) == 123456);
}

TEST_CASE("a forged partial decryption names the worker") {
  const KeyMaterial& km = fixed_key(512, 3, 1);
  WorkerSet ws = worker_set(km);
  ws.misbehavior.forge_partial = 2;
  Rng rng(3102);
  Ciphertext c = encrypt(km.params, Int(5), rng).ct;
  try {
    ddec(ws, c, rng);
    FAIL("expected an abort");
  } catch (const IdentifiableAbort& abort) {
    CHECK(abort.culprit == "worker 2");
    CHECK(abort.reason == "partial decryption proof rejected");
  }
}

TEST_CASE("reshare splits a ciphertext into consistent additive shares") {
  const KeyMaterial& km = fixed_key(512, 3, 1);
  const PublicParams& pp = km.params;
  WorkerSet ws = worker_set(km);
  Rng rng(3103);

  for (std::int64_t x : {std::int64_t(10), std::int64_t(0), std::int64_t(-42)}) {
    Ciphertext c = encrypt(pp, Int(x), rng).ct;
    std::vector<ReshareOutput> shares = reshare(ws, c, rng);
    REQUIRE(shares.size() == 3);

    Int plain_sum = 0;
    for (const ReshareOutput& ro : shares) {
      plain_sum += ro.plain_share;
      // the holder's randomness really is the witness for its share
      CHECK(encrypt_with_randomness(pp, to_signed(pp, ro.plain_share), mod(ro.rand, pp.n2)) ==
            ro.enc_share);
      CHECK(dealer_signed(km, ro.enc_share) == to_signed(pp, ro.plain_share));
    }
    CHECK(to_signed(pp, mod(plain_sum, pp.n)) == x);
    CHECK(ddec(ws, fold_shares(pp, shares), rng) == x);
  }
}

TEST_CASE("shared multiplication recovers theta times delta") {
  const KeyMaterial& km = fixed_key(512, 3, 1);
  const PublicParams& pp = km.params;
  WorkerSet ws = worker_set(km);
  Rng rng(3104);

  auto product = [&](std::int64_t theta, std::int64_t delta) {
    Ciphertext enc_theta = encrypt(pp, Int(theta), rng).ct;
    std::vector<ReshareOutput> shares = reshare(ws, encrypt(pp, Int(delta), rng).ct, rng);
    Ciphertext out = shared_mul(ws, enc_theta, shares, rng);
    return ddec(ws, out, rng);
  };
  CHECK(product(6, 7) == 42);
  CHECK(product(11, 1) == 11);
  CHECK(product(-3, -5) == 15);
  CHECK(product(0, 9) == 0);
}

TEST_CASE("a junk multiplication proof names the worker") {
  const KeyMaterial& km = fixed_key(512, 3, 1);
  const PublicParams& pp = km.params;
  WorkerSet ws = worker_set(km);
  ws.misbehavior.bad_mul_proof = 3;
  Rng rng(3105);
  Ciphertext enc_theta = encrypt(pp, Int(4), rng).ct;
  WorkerSet honest = worker_set(km);
  std::vector<ReshareOutput> shares = reshare(honest, encrypt(pp, Int(2), rng).ct, rng);
  try {
    shared_mul(ws, enc_theta, shares, rng);
    FAIL("expected an abort");
  } catch (const IdentifiableAbort& abort) {
    CHECK(abort.culprit == "worker 3");
    CHECK(abort.reason == "share multiplication proof rejected");
  }
}

TEST_CASE("preprocessing chains produce valid masking triples") {
  const KeyMaterial& km = fixed_key(512, 3, 1);
  const PublicParams& pp = km.params;
  WorkerSet ws = worker_set(km);
  Rng rng(3106);
  MaskingConfig cfg{Int(0), Int(8)};
  Int global = randomness_bound(pp.n, cfg.low, cfg.high);
  Int budget = per_party_bound(global, 3);

  std::vector<PrepTriple> triples = prep_chain(cfg, ws, 2, rng);
  REQUIRE(triples.size() == 2);
  for (const PrepTriple& t : triples) {
    Int r = ddec(ws, t.enc_r, rng);
    Int sign = ddec(ws, t.enc_sign_r, rng);
    CHECK(r != 0);
    CHECK(abs(r) <= global);
    CHECK(sign == ((r > 0) ? 1 : -1));

    REQUIRE(t.audit.size() == 3);
    CHECK_FALSE(t.audit[0].link_r.has_value());
    CHECK(t.audit[1].link_r.has_value());
    CHECK(t.audit[2].link_sign.has_value());
    Int chain_product = 1;
    for (const ChainStep& step : t.audit) {
      Int rj = dealer_signed(km, step.bundle.enc_r);
      CHECK(rj != 0);
      CHECK(abs(rj) <= budget);
      CHECK(dealer_signed(km, step.bundle.enc_sign) == ((rj > 0) ? 1 : -1));
      chain_product *= rj;
    }
    CHECK(chain_product == r);

    CHECK(ddec(ws, fold_shares(pp, t.shares_r), rng) == r);
    CHECK(ddec(ws, fold_shares(pp, t.shares_sign), rng) == sign);
  }
}

TEST_CASE("a corrupted chain proof aborts at the right worker") {
  const KeyMaterial& km = fixed_key(512, 3, 1);
  MaskingConfig cfg{Int(0), Int(8)};
  for (unsigned slot : {0u, 2u, 4u, 5u, 6u}) {
    WorkerSet ws = worker_set(km);
    ws.misbehavior.bad_chain_proof = 2;
    ws.misbehavior.chain_slot = slot;
    Rng rng(3107 + slot);
    try {
      prep_chain(cfg, ws, 1, rng);
      FAIL("expected an abort at slot ", slot);
    } catch (const IdentifiableAbort& abort) {
      CHECK(abort.culprit == "worker 2");
      CHECK(abort.reason.find("preprocessing") != std::string::npos);
    }
  }
}

TEST_CASE("a degenerate masking space still yields unit triples") {
  const KeyMaterial& km = fixed_key(512, 3, 1);
  WorkerSet ws = worker_set(km);
  MaskingConfig cfg{Int(0), Int(8)};
  cfg.zero_freq = 1.0;  // degenerate sampler: every prime kept out, magnitude 1
  bool saw_plus_one = false;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Rng rng(4000 + seed);
    std::vector<PrepTriple> triples = prep_chain(cfg, ws, 1, rng);
    Int r = ddec(ws, triples[0].enc_r, rng);
    Int sign = ddec(ws, triples[0].enc_sign_r, rng);
    CHECK(abs(r) == 1);
    CHECK(sign == r);
    if (r == 1) saw_plus_one = true;
  }
  CHECK(saw_plus_one);
}

TEST_CASE("non-interactive rounds reproduce the interactive z sequence") {
  const KeyMaterial& km = fixed_key(512, 3, 1);
  const PublicParams& pp = km.params;
  WorkerSet ws = worker_set(km);
  Rng rng(3108);
  const std::int64_t eta = 2;
  std::vector<std::int64_t> xs = {1, 2, 3, 4, 5};
  SearchSpec spec;
  spec.low = 0;
  spec.high = 8;
  spec.n_inputs = 5;

  std::vector<Ciphertext> enc_xs;
  for (std::int64_t x : xs) enc_xs.push_back(encrypt(pp, Int(x), rng).ct);

  MaskingConfig cfg{Int(spec.low), Int(spec.high)};
  unsigned budget_triples = spec.n_inputs * max_rounds(spec);
  std::vector<PrepTriple> triples = prep_chain(cfg, ws, budget_triples, rng);
  TripleBank bank;
  for (PrepTriple& t : triples) bank.add(std::move(t));

  SearchState st = search_begin(spec);
  std::vector<std::int64_t> z_seq;
  OpCounts ops;
  while (!st.done) {
    std::vector<Ciphertext> enc_qs;
    std::vector<PrepTriple> round_triples;
    for (size_t i = 0; i < enc_xs.size(); ++i) {
      enc_qs.push_back(compute_enc_q(pp, enc_xs[i], st.guess, eta));
      round_triples.push_back(bank.take(static_cast<unsigned>(i), st.round));
    }
    std::int64_t z = nirank_round(ws, enc_qs, round_triples, 0, rng, {}, nullptr, &ops);
    z_seq.push_back(z);
    st = search_step(spec, st, z);
  }

  PlainRunResult mirror = run_plain_search(spec, xs);
  CHECK(z_seq == mirror.z_sequence);
  CHECK(st.result == mirror.result);

  // per-round operation counts, accumulated over both rounds
  unsigned long rounds = mirror.rounds, n = xs.size();
  CHECK(ops.enc == rounds * n);
  CHECK(ops.dec == rounds * (n + 1));
  CHECK(ops.cmul == rounds * 2 * n);
  CHECK(ops.cadd == rounds * (n - 1));
}

TEST_CASE("the triple bank enforces single use and order") {
  TripleBank bank;
  for (int i = 0; i < 3; ++i) bank.add(PrepTriple{});
  CHECK(bank.remaining() == 3);
  bank.take(0, 0);
  bank.take(1, 0);
  CHECK(bank.remaining() == 1);
  CHECK_THROWS_AS(bank.take(0, 0), std::logic_error);  // (user, round) reuse
  bank.take(0, 1);
  CHECK_THROWS_AS(bank.take(2, 0), std::runtime_error);  // exhausted
}

TEST_CASE("triple banks persist and reload byte-identically") {
  const KeyMaterial& km = fixed_key(512, 3, 1);
  const PublicParams& pp = km.params;
  WorkerSet ws = worker_set(km);
  Rng rng(3109);
  MaskingConfig cfg{Int(0), Int(8)};
  std::vector<PrepTriple> triples = prep_chain(cfg, ws, 2, rng);
  TripleBank bank;
  for (PrepTriple& t : triples) bank.add(std::move(t));

  Bytes wire = bank.serialize(pp);
  TripleBank back = TripleBank::parse(pp, wire);
  CHECK(back.size() == 2);
  CHECK(back.serialize(pp) == wire);

  // reloaded triples carry everything the online round needs
  const PrepTriple& t = back.take(0, 0);
  Ciphertext enc_q = encrypt(pp, Int(-3), rng).ct;
  Ciphertext masked = shared_mul(ws, enc_q, t.shares_r, rng);
  Int y = ddec(ws, masked, rng);
  Int r = ddec(ws, t.enc_r, rng);
  CHECK(y == Int(-3) * r);

  Bytes broken = wire;
  broken[0] ^= 0xff;
  CHECK_THROWS_AS(TripleBank::parse(pp, broken), std::invalid_argument);
  Bytes padded = wire;
  padded.push_back(0);
  CHECK_THROWS_AS(TripleBank::parse(pp, padded), std::invalid_argument);

  std::string path = "triple_bank_test.bin";
  bank.save(path, pp);
  TripleBank loaded = TripleBank::load(path, pp);
  CHECK(loaded.serialize(pp) == wire);
  std::remove(path.c_str());
}

TEST_CASE("masked decryptions never expose a zero") {
  const KeyMaterial& km = fixed_key(512, 3, 1);
  const PublicParams& pp = km.params;
  WorkerSet ws = worker_set(km);
  Rng rng(3110);
  MaskingConfig cfg{Int(0), Int(16)};
  std::vector<PrepTriple> triples = prep_chain(cfg, ws, 4, rng);
  for (const PrepTriple& t : triples) {
    for (std::int64_t q : {std::int64_t(1), std::int64_t(-9), std::int64_t(31)}) {
      Ciphertext enc_q = encrypt(pp, Int(q), rng).ct;
      Int y = ddec(ws, shared_mul(ws, enc_q, t.shares_r, rng), rng);
      CHECK(y != 0);
      Int sign_q = ddec(ws, shared_mul(ws, encrypt_with_randomness(pp, (y > 0) ? Int(1) : Int(-1), 1),
                                       t.shares_sign, rng),
                        rng);
      CHECK(sign_q == ((q > 0) ? 1 : -1));
    }
  }
}
