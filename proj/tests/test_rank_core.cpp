#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <vector>

#include "fixtures.hpp"
#include "ranksec/rank_core.hpp"

using namespace ranksec;
using testfix::fixed_key;

namespace {

SearchSpec median_spec(std::int64_t low, std::int64_t high, unsigned n, std::int64_t delta = 0) {
  SearchSpec spec;
  spec.low = low;
  spec.high = high;
  spec.n_inputs = n;
  spec.delta_tol = delta;
  return spec;
}

SearchSpec rank_spec(std::int64_t low, std::int64_t high, unsigned n, std::int64_t k,
                     std::int64_t delta = 0) {
  SearchSpec spec = median_spec(low, high, n, delta);
  spec.rank = k;
  return spec;
}

}  // namespace

TEST_CASE("first guess sits at the interval midpoint, half-odd") {
  CHECK(search_begin(median_spec(0, 100, 5)).guess == HalfInt{101});   // 50.5
  CHECK(search_begin(median_spec(0, 8, 5)).guess == HalfInt{9});       // 4.5
  CHECK(search_begin(median_spec(-16, 16, 3)).guess == HalfInt{1});    // 0.5
  CHECK(search_begin(median_spec(-15, -7, 3)).guess == HalfInt{-21});  // -10.5
}

TEST_CASE("rank mode weights the first guess by k/N") {
  CHECK(search_begin(rank_spec(0, 100, 10001, 2501)).guess == HalfInt{51});   // 25.5
  CHECK(search_begin(rank_spec(0, 100, 10001, 5001)).guess == HalfInt{101});  // 50.5
  CHECK(search_begin(rank_spec(0, 100, 10001, 7501)).guess == HalfInt{151});  // 75.5
  CHECK(search_begin(rank_spec(10, 20, 2, 1)).guess == HalfInt{31});          // 15.5
}

TEST_CASE("width-two intervals finish before any round") {
  SearchState st = search_begin(median_spec(3, 5, 1));
  CHECK(st.done);
  CHECK(st.round == 0);
  CHECK(st.result == 4);
  CHECK_THROWS_AS(search_step(median_spec(3, 5, 1), st, 0), std::logic_error);
}

TEST_CASE("spec validation rejects malformed instances") {
  CHECK_THROWS_AS(search_begin(median_spec(5, 5, 3)), std::invalid_argument);
  CHECK_THROWS_AS(search_begin(median_spec(0, 8, 0)), std::invalid_argument);
  CHECK_THROWS_AS(search_begin(rank_spec(0, 8, 5, 0)), std::invalid_argument);
  CHECK_THROWS_AS(search_begin(rank_spec(0, 8, 5, 6)), std::invalid_argument);
  SearchSpec bad = median_spec(0, 8, 5);
  bad.delta_tol = -1;
  CHECK_THROWS_AS(search_begin(bad), std::invalid_argument);
}

TEST_CASE("sign aggregate on plain inputs") {
  std::vector<std::int64_t> xs = {1, 2, 3, 4, 5};
  SearchSpec spec = median_spec(0, 8, 5);
  CHECK(aggregate_plain(xs, HalfInt{9}, spec) == -3);  // m = 4.5
  CHECK(aggregate_plain(xs, HalfInt{5}, spec) == 1);   // m = 2.5
  SearchSpec k4 = rank_spec(0, 8, 5, 4);
  CHECK(aggregate_plain(xs, HalfInt{5}, k4) == 4);  // 1 + (2*4 - 5)
}

TEST_CASE("median search walks the frozen trajectory") {
  std::vector<std::int64_t> xs = {1, 2, 3, 4, 5};
  PlainRunResult res = run_plain_search(median_spec(0, 8, 5), xs);
  CHECK(res.result == 3);
  CHECK(res.rounds == 2);
  CHECK(res.z_sequence == std::vector<std::int64_t>{-3, 1});
}

TEST_CASE("early stop fires on |z| within tolerance") {
  std::vector<std::int64_t> xs = {1, 2, 3, 4, 5};
  PlainRunResult res = run_plain_search(median_spec(0, 8, 5, 1), xs);
  CHECK(res.result == 3);  // round two guess 2.5 sees z = 1 and rounds up
  CHECK(res.rounds == 2);
}

TEST_CASE("speculative guesses come out in breadth-first order") {
  SearchState wide = search_begin(median_spec(0, 100, 5));
  auto d1 = speculative_guesses(wide, 1);
  REQUIRE(d1.size() == 3);
  CHECK(d1[0] == HalfInt{101});  // 50.5
  CHECK(d1[1] == HalfInt{51});   // 25.5
  CHECK(d1[2] == HalfInt{151});  // 75.5

  auto d2 = speculative_guesses(wide, 2);
  REQUIRE(d2.size() == 7);
  CHECK(d2[3] == HalfInt{25});   // 12.5
  CHECK(d2[4] == HalfInt{75});   // 37.5
  CHECK(d2[5] == HalfInt{125});  // 62.5
  CHECK(d2[6] == HalfInt{175});  // 87.5

  SearchState narrow = search_begin(median_spec(0, 8, 5));
  auto n1 = speculative_guesses(narrow, 1);
  REQUIRE(n1.size() == 3);
  CHECK(n1[0] == HalfInt{9});   // 4.5
  CHECK(n1[1] == HalfInt{5});   // 2.5
  CHECK(n1[2] == HalfInt{13});  // 6.5
}

TEST_CASE("speculative expansion skips terminal branches") {
  SearchState st = search_begin_at(median_spec(0, 8, 5), 0, 4, HalfInt{5});
  auto guesses = speculative_guesses(st, 3);
  REQUIRE(guesses.size() == 1);  // both children have width 2
  CHECK(guesses[0] == HalfInt{5});
  CHECK(speculative_guesses(search_begin(median_spec(3, 5, 1)), 2).empty());
}

TEST_CASE("round count never exceeds the log bound") {
  Rng rng(2201);
  for (unsigned b = 4; b <= 8; ++b) {
    std::int64_t width = std::int64_t(1) << b;
    SearchSpec spec = median_spec(0, width, 7);
    CHECK(max_rounds(spec) == b - 1);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::int64_t> xs;
      for (int i = 0; i < 7; ++i)
        xs.push_back(static_cast<std::int64_t>(rng.u64() % (width + 1)));
      PlainRunResult res = run_plain_search(spec, xs);
      CHECK(res.rounds <= b - 1);
      CHECK(std::llabs(res.result - median_oracle(xs)) <= 1);
    }
  }
}

TEST_CASE("rank mode gets one extra round of slack") {
  Rng rng(2202);
  for (unsigned b = 4; b <= 7; ++b) {
    std::int64_t width = std::int64_t(1) << b;
    for (int trial = 0; trial < 150; ++trial) {
      unsigned n = 1 + static_cast<unsigned>(rng.u64() % 15);
      std::int64_t k = 1 + static_cast<std::int64_t>(rng.u64() % n);
      SearchSpec spec = rank_spec(0, width, n, k);
      CHECK(max_rounds(spec) == b);
      std::vector<std::int64_t> xs;
      for (unsigned i = 0; i < n; ++i)
        xs.push_back(static_cast<std::int64_t>(rng.u64() % (width + 1)));
      PlainRunResult res = run_plain_search(spec, xs);
      CHECK(res.rounds <= max_rounds(spec));
    }
  }
}

TEST_CASE("exhaustive small medians land within one of the oracle") {
  // all multisets of sizes 1 and 3 over [0, 8); larger sweeps live in the
  // acceptance run
  for (std::int64_t a = 0; a < 8; ++a) {
    std::vector<std::int64_t> one = {a};
    PlainRunResult res = run_plain_search(median_spec(0, 7, 1), one);
    CHECK(std::llabs(res.result - a) <= 1);
  }
  for (std::int64_t a = 0; a < 8; ++a)
    for (std::int64_t b = a; b < 8; ++b)
      for (std::int64_t c = b; c < 8; ++c) {
        std::vector<std::int64_t> xs = {a, b, c};
        PlainRunResult res = run_plain_search(median_spec(0, 7, 3), xs);
        CHECK(std::llabs(res.result - b) <= 1);
      }
}

TEST_CASE("rank search targets every k") {
  Rng rng(2203);
  for (int trial = 0; trial < 300; ++trial) {
    unsigned n = 1 + static_cast<unsigned>(rng.u64() % 12);
    std::vector<std::int64_t> xs;
    for (unsigned i = 0; i < n; ++i) xs.push_back(static_cast<std::int64_t>(rng.u64() % 33));
    for (std::int64_t k = 1; k <= static_cast<std::int64_t>(n); ++k) {
      PlainRunResult res = run_plain_search(rank_spec(0, 32, n, k), xs);
      // a z = 0 stop certifies exactly k inputs below the reported point;
      // otherwise the interval pins the k-th element within 1
      std::int64_t below = 0;
      for (auto x : xs)
        if (2 * x < 2 * res.result) ++below;
      bool generalized_ok = (below <= k) && (k <= below + std::count(xs.begin(), xs.end(), res.result) + 1);
      bool close = std::llabs(res.result - rank_oracle(xs, k)) <= 1;
      CHECK((generalized_ok || close));
    }
  }
}

// --- moments ---------------------------------------------------------------

TEST_CASE("moments of 1..5 are exact rationals") {
  std::vector<std::int64_t> xs = {1, 2, 3, 4, 5};
  MomentsReport mr = moments_plain(xs);
  CHECK(mr.mean == mpq_class(3));
  CHECK(mr.variance == mpq_class(2));
  CHECK(mr.skew_num == mpq_class(0));
  CHECK(mr.kurt_num == mpq_class(34, 5));
  CHECK(mr.kurtosis == mpq_class(17, 10));
  CHECK(mr.std_dev == doctest::Approx(std::sqrt(2.0)));
  CHECK(mr.skewness == doctest::Approx(0.0));
  CHECK_FALSE(mr.degenerate);
}

TEST_CASE("constant data reports degenerate spread") {
  std::vector<std::int64_t> xs = {7, 7, 7};
  MomentsReport mr = moments_plain(xs);
  CHECK(mr.mean == mpq_class(7));
  CHECK(mr.variance == 0);
  CHECK(mr.degenerate);
  CHECK(mr.std_dev == 0.0);
}

TEST_CASE("moments from power sums match the direct computation") {
  Rng rng(2204);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::int64_t> xs;
    unsigned n = 2 + static_cast<unsigned>(rng.u64() % 20);
    for (unsigned i = 0; i < n; ++i)
      xs.push_back(static_cast<std::int64_t>(rng.u64() % 1000) - 500);
    MomentsReport direct = moments_plain(xs);
    MomentsReport from_sums =
        moments_from_sums(direct.n, direct.s1, direct.s2, direct.s3, direct.s4);
    CHECK(direct.mean == from_sums.mean);
    CHECK(direct.variance == from_sums.variance);
    CHECK(direct.skew_num == from_sums.skew_num);
    CHECK(direct.kurt_num == from_sums.kurt_num);
  }
}

TEST_CASE("moment init narrows the interval to mean +- sigma") {
  MomentsReport mr;
  mr.n = 1;
  mr.mean = 100;
  mr.variance = 256;
  mr.std_dev = 16.0;
  MomentsInit init = init_range_from_moments(mr, 0, 255);
  CHECK(init.alpha == 84);
  CHECK(init.beta == 116);
  CHECK(init.first_guess == HalfInt{201});  // 100.5

  MomentsInit clamped = init_range_from_moments(moments_plain(std::vector<std::int64_t>{0, 8}), 0, 8);
  CHECK(clamped.alpha == 0);
  CHECK(clamped.beta == 8);

  MomentsInit flat = init_range_from_moments(moments_plain(std::vector<std::int64_t>{7, 7}), 0, 100);
  CHECK(flat.alpha < 7);
  CHECK(flat.beta > 7);
  CHECK(flat.beta - flat.alpha >= 2);
}

TEST_CASE("moment-initialised search still finds the median") {
  Rng rng(2205);
  for (int trial = 0; trial < 100; ++trial) {
    unsigned n = 3 + 2 * static_cast<unsigned>(rng.u64() % 6);  // odd sizes
    std::vector<std::int64_t> xs;
    for (unsigned i = 0; i < n; ++i) xs.push_back(static_cast<std::int64_t>(rng.u64() % 101));
    SearchSpec spec = median_spec(0, 100, n);
    MomentsInit init = init_range_from_moments(moments_plain(xs), 0, 100);
    std::int64_t med = median_oracle(xs);
    // the one-sigma interval always contains the median, so the narrowed
    // search must agree with the full-range one
    REQUIRE(init.alpha <= med);
    REQUIRE(med <= init.beta);
    SearchState st = search_begin_at(spec, init.alpha, init.beta, init.first_guess);
    PlainRunResult res = run_plain_search_from(spec, st, xs);
    CHECK(std::llabs(res.result - med) <= 1);
  }
}

// --- encrypted pieces ------------------------------------------------------

TEST_CASE("registration proves the input range") {
  const KeyMaterial& km = fixed_key(512, 3, 1);
  const PublicParams& pp = km.params;
  Rng rng(2301);
  Encryption ex = encrypt(pp, Int(5), rng);
  RegisteredInput reg = register_input(pp, ex, 5, 0, 16, rng);
  CHECK(verify_registration(pp, reg, 0, 16));
  CHECK_FALSE(verify_registration(pp, reg, 0, 8));  // different statement
  CHECK_THROWS_AS(register_input(pp, encrypt(pp, Int(20), rng), 20, 0, 16, rng),
                  std::domain_error);
}

TEST_CASE("submissions verify and decrypt to the right signs") {
  const KeyMaterial& km = fixed_key(512, 3, 1);
  const PublicParams& pp = km.params;
  Rng rng(2302);
  const std::int64_t eta = 2, low = 0, high = 8;
  HalfInt guess{9};  // 4.5
  std::vector<Ciphertext> enc_signs;
  std::vector<std::int64_t> xs = {1, 2, 3, 4, 5};
  for (std::int64_t x : xs) {
    Encryption ex = encrypt(pp, Int(x), rng);
    SignSubmission sub = make_submission(pp, ex, x, guess, eta, low, high, rng);
    std::string why;
    CHECK(verify_submission(pp, ex.ct, guess, eta, low, high, sub, {}, &why));
    CHECK(why.empty());
    Int sign = to_signed(pp, decrypt_with_dealer(pp, km.dealer, sub.enc_sign));
    CHECK(sign == ((2 * x > guess.twice) ? 1 : -1));
    Int absq = to_signed(pp, decrypt_with_dealer(pp, km.dealer, sub.enc_abs));
    CHECK(absq == abs(Int(eta) * Int(x) - scale_encode(guess, eta)));
    enc_signs.push_back(sub.enc_sign);
  }

  unsigned adds = 0;
  Ciphertext agg = aggregate_signs(pp, enc_signs, 0, &adds);
  CHECK(adds == 4);
  CHECK(to_signed(pp, decrypt_with_dealer(pp, km.dealer, agg)) == -3);

  Ciphertext agg_rank = aggregate_signs(pp, enc_signs, 2 * 4 - 5, &adds);
  CHECK(adds == 5);
  CHECK(to_signed(pp, decrypt_with_dealer(pp, km.dealer, agg_rank)) == 0);
}

TEST_CASE("an integer guess is rejected up front") {
  const KeyMaterial& km = fixed_key(512, 3, 1);
  Rng rng(2303);
  Encryption ex = encrypt(km.params, Int(3), rng);
  CHECK_THROWS_AS(make_submission(km.params, ex, 3, HalfInt{8}, 2, 0, 8, rng),
                  std::invalid_argument);
}

TEST_CASE("full crypto search reproduces the plain z sequence") {
  const KeyMaterial& km = fixed_key(512, 3, 1);
  const PublicParams& pp = km.params;
  Rng rng(2304);
  const std::int64_t eta = 2;
  std::vector<std::int64_t> xs = {1, 2, 3, 4, 5};
  SearchSpec spec = median_spec(0, 8, 5);

  std::vector<Encryption> inputs;
  for (std::int64_t x : xs) inputs.push_back(encrypt(pp, Int(x), rng));

  SearchState st = search_begin(spec);
  std::vector<std::int64_t> crypto_z;
  while (!st.done) {
    std::vector<Ciphertext> signs;
    for (size_t i = 0; i < xs.size(); ++i) {
      SignSubmission sub = make_submission(pp, inputs[i], xs[i], st.guess, eta, 0, 8, rng);
      REQUIRE(verify_submission(pp, inputs[i].ct, st.guess, eta, 0, 8, sub));
      signs.push_back(sub.enc_sign);
    }
    Ciphertext agg = aggregate_signs(pp, signs, 0);
    std::int64_t z = to_signed(pp, decrypt_with_dealer(pp, km.dealer, agg)).get_si();
    crypto_z.push_back(z);
    st = search_step(spec, st, z);
  }
  PlainRunResult mirror = run_plain_search(spec, xs);
  CHECK(crypto_z == mirror.z_sequence);
  CHECK(st.result == mirror.result);
  CHECK(st.round == mirror.rounds);
}

TEST_CASE("submission bytes round-trip at the documented size") {
  const KeyMaterial& km = fixed_key(512, 3, 1);
  const PublicParams& pp = km.params;
  Rng rng(2305);
  Encryption ex = encrypt(pp, Int(6), rng);
  SignSubmission sub = make_submission(pp, ex, 6, HalfInt{9}, 2, 0, 8, rng);

  Bytes wire = sub.serialize(pp);
  CHECK(wire.size() == 60 * pp.base_width());  // 15 KB at a 2048-bit modulus
  SignSubmission back = SignSubmission::parse(pp, wire);
  CHECK(back.serialize(pp) == wire);
  CHECK(verify_submission(pp, ex.ct, HalfInt{9}, 2, 0, 8, back));

  Bytes truncated(wire.begin(), wire.end() - 1);
  CHECK_THROWS(SignSubmission::parse(pp, truncated));
  Bytes padded = wire;
  padded.push_back(0);
  CHECK_THROWS(SignSubmission::parse(pp, padded));
}

TEST_CASE("verification failures name the offending piece") {
  const KeyMaterial& km = fixed_key(512, 3, 1);
  const PublicParams& pp = km.params;
  Rng rng(2306);
  const std::int64_t eta = 2, low = 0, high = 8;
  HalfInt guess{9};
  Encryption ex = encrypt(pp, Int(2), rng);
  SignSubmission good = make_submission(pp, ex, 2, guess, eta, low, high, rng);
  std::string why;

  SignSubmission bad = good;
  bad.enc_q = hom_add(pp, bad.enc_q, encrypt_with_randomness(pp, Int(1), 1));
  CHECK_FALSE(verify_submission(pp, ex.ct, guess, eta, low, high, bad, {}, &why));
  CHECK(why == "comparison ciphertext mismatch");

  bad = good;
  bad.enc_sign = encrypt(pp, Int(1), rng).ct;  // proof no longer matches
  CHECK_FALSE(verify_submission(pp, ex.ct, guess, eta, low, high, bad, {}, &why));
  CHECK(why == "sign proof rejected");

  bad = good;
  bad.enc_abs = encrypt(pp, Int(5), rng).ct;
  CHECK_FALSE(verify_submission(pp, ex.ct, guess, eta, low, high, bad, {}, &why));
  CHECK(why == "product proof rejected");

  // the guess travels in the statement: verifying against another round fails
  CHECK_FALSE(verify_submission(pp, ex.ct, HalfInt{5}, eta, low, high, good, {}, &why));
  CHECK(why == "comparison ciphertext mismatch");
}

TEST_CASE("power submissions chain x through x^4") {
  const KeyMaterial& km = fixed_key(512, 3, 1);
  const PublicParams& pp = km.params;
  Rng rng(2308);
  for (std::int64_t x : {std::int64_t(5), std::int64_t(-3), std::int64_t(0)}) {
    Encryption ex = encrypt(pp, Int(x), rng);
    PowerSubmission sub = make_power_submission(pp, ex, x, rng);
    std::string why;
    CHECK(verify_power_submission(pp, sub, {}, &why));
    CHECK(to_signed(pp, decrypt_with_dealer(pp, km.dealer, sub.enc_x2)) == Int(x) * x);
    CHECK(to_signed(pp, decrypt_with_dealer(pp, km.dealer, sub.enc_x3)) == Int(x) * x * x);
    CHECK(to_signed(pp, decrypt_with_dealer(pp, km.dealer, sub.enc_x4)) == Int(x) * x * x * x);

    Bytes wire = sub.serialize(pp);
    CHECK(wire.size() == (4 * 2 + 3 * 9) * pp.base_width());
    PowerSubmission back = PowerSubmission::parse(pp, wire);
    CHECK(back.serialize(pp) == wire);
  }

  // a substituted cube is caught by the linkage proof
  Encryption ex = encrypt(pp, Int(4), rng);
  PowerSubmission sub = make_power_submission(pp, ex, 4, rng);
  sub.enc_x3 = encrypt(pp, Int(63), rng).ct;
  std::string why;
  CHECK_FALSE(verify_power_submission(pp, sub, {}, &why));
  CHECK(why == "cube linkage proof rejected");
}

TEST_CASE("submission proofs bind to the supplied context") {
  const KeyMaterial& km = fixed_key(512, 3, 1);
  const PublicParams& pp = km.params;
  Rng rng(2307);
  Bytes round_tag = {0x01, 0x02, 0x03};
  Bytes other_tag = {0x01, 0x02, 0x04};
  Encryption ex = encrypt(pp, Int(7), rng);
  SignSubmission sub = make_submission(pp, ex, 7, HalfInt{9}, 2, 0, 8, rng, round_tag);
  CHECK(verify_submission(pp, ex.ct, HalfInt{9}, 2, 0, 8, sub, round_tag));
  std::string why;
  CHECK_FALSE(verify_submission(pp, ex.ct, HalfInt{9}, 2, 0, 8, sub, other_tag, &why));
  CHECK(why == "sign proof rejected");
}
