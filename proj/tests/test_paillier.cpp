#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "ranksec/paillier.hpp"

using namespace ranksec;

namespace {

Int threshold_decrypt(const KeyMaterial& km, const Ciphertext& c) {
  std::vector<PartialDecryption> parts;
  for (const auto& sh : km.shares) parts.push_back(partial_decrypt(km.params, sh, c));
  return combine(km.params, parts);
}

}  // namespace

TEST_CASE("keygen produces a consistent dealer view") {
  const KeyMaterial& km = testfix::fresh_key(512, 3, 7);
  const PublicParams& pp = km.params;
  CHECK(pp.bits == 512);
  CHECK(bit_length(pp.n) == 512);
  CHECK(pp.n == km.dealer.p * km.dealer.q);
  CHECK(km.dealer.d % km.dealer.m == 0);
  CHECK(mod(km.dealer.d, pp.n) == 1);
  CHECK(pp.delta == 6);
  CHECK(pp.verification_keys.size() == 3);
  // v is a square and a unit
  Int g;
  mpz_gcd(g.get_mpz_t(), pp.v.get_mpz_t(), pp.n2.get_mpz_t());
  CHECK(g == 1);
}

TEST_CASE("share polynomial reconstructs the dealer exponent") {
  const KeyMaterial& km = testfix::fresh_key(512, 3, 7);
  // Lagrange interpolation at 0 over Z_{n*m}, all three shares.
  Int nm = km.params.n * km.dealer.m;
  Int delta = km.params.delta;
  Int acc = 0;
  for (unsigned i = 0; i < 3; ++i) {
    Int num = delta, den = 1;
    for (unsigned j = 0; j < 3; ++j) {
      if (j == i) continue;
      num *= -static_cast<long>(km.shares[j].index);
      den *= static_cast<long>(km.shares[i].index) - static_cast<long>(km.shares[j].index);
    }
    REQUIRE(num % den == 0);
    acc = mod(acc + (num / den) * km.shares[i].s, nm);
  }
  // interpolation carries the delta factor
  CHECK(acc == mod(delta * km.dealer.d, nm));
}

TEST_CASE("encrypt/threshold-decrypt round trip") {
  const KeyMaterial& km = testfix::fresh_key(512, 3, 7);
  Rng rng(100);
  Encryption e = encrypt(km.params, 42, rng);
  CHECK(threshold_decrypt(km, e.ct) == 42);
  CHECK(decrypt_with_dealer(km.params, km.dealer, e.ct) == 42);
}

TEST_CASE("signed plaintexts decode across the full range") {
  const KeyMaterial& km = testfix::fixed_key(512, 3, 1);
  const PublicParams& pp = km.params;
  Rng rng(5);
  for (Int value : {Int(0), Int(1), Int(-1), Int(1000000), Int(-1000000), pp.max_plain(),
                    Int(-pp.max_plain())}) {
    Encryption e = encrypt(pp, value, rng);
    CHECK(threshold_decrypt(km, e.ct) == value);
  }
  CHECK_THROWS_AS(encrypt(pp, pp.max_plain() + 1, rng), std::domain_error);
  CHECK_THROWS_AS(encrypt(pp, -(pp.max_plain() + 1), rng), std::domain_error);
}

TEST_CASE("homomorphic operations act on plaintexts") {
  const KeyMaterial& km = testfix::fixed_key(512, 3, 1);
  const PublicParams& pp = km.params;
  Rng rng(6);
  Encryption a = encrypt(pp, 37, rng);
  Encryption b = encrypt(pp, -15, rng);
  CHECK(threshold_decrypt(km, hom_add(pp, a.ct, b.ct)) == 22);
  CHECK(threshold_decrypt(km, hom_sub(pp, a.ct, b.ct)) == 52);
  CHECK(threshold_decrypt(km, hom_scalar_mul(pp, a.ct, -3)) == -111);
  Encryption c = hom_scalar_mul_rerand(pp, a.ct, 5, rng);
  CHECK(threshold_decrypt(km, c.ct) == 185);
  // re-randomization changes the ciphertext, not the plaintext
  CHECK_FALSE(c.ct == hom_scalar_mul(pp, a.ct, 5));
}

TEST_CASE("combining a strict subset of shares fails to recover") {
  const KeyMaterial& km = testfix::fixed_key(512, 3, 1);
  const PublicParams& pp = km.params;
  Rng rng(8);
  int misses = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Int value = rng.between(-1000, 1000);
    Encryption e = encrypt(pp, value, rng);
    std::vector<PartialDecryption> two = {partial_decrypt(pp, km.shares[0], e.ct),
                                          partial_decrypt(pp, km.shares[1], e.ct)};
    auto got = interpolate_plaintext(pp, two);
    if (!got || *got != value) ++misses;
  }
  CHECK(misses == 100);
}

TEST_CASE("combine validates the partial set") {
  const KeyMaterial& km = testfix::fixed_key(512, 3, 1);
  const PublicParams& pp = km.params;
  Rng rng(9);
  Encryption e = encrypt(pp, 5, rng);
  std::vector<PartialDecryption> parts;
  for (const auto& sh : km.shares) parts.push_back(partial_decrypt(pp, sh, e.ct));

  std::vector<PartialDecryption> missing(parts.begin(), parts.begin() + 2);
  CHECK_THROWS_AS(combine(pp, missing), std::invalid_argument);

  std::vector<PartialDecryption> dup = parts;
  dup[2] = dup[0];
  CHECK_THROWS_AS(combine(pp, dup), std::invalid_argument);
}

TEST_CASE("keygen rejects bad arguments") {
  Rng rng(1);
  CHECK_THROWS_AS(keygen(500, 3, rng), std::invalid_argument);
  CHECK_THROWS_AS(keygen(512, 1, rng), std::invalid_argument);
  // not safe primes
  CHECK_THROWS_AS(keygen_from_primes(Int(65537), Int(65539), 3, rng), std::invalid_argument);
}

TEST_CASE("scale_encode maps half-integers to integers") {
  CHECK(scale_encode(HalfInt{7}, 2) == 7);    // 3.5 * 2
  CHECK(scale_encode(HalfInt{-1}, 2) == -1);  // -0.5 * 2
  CHECK(scale_encode(HalfInt::from_int(3), 4) == 12);
  CHECK_THROWS_AS(scale_encode(HalfInt{1}, 3), std::invalid_argument);
  CHECK_THROWS_AS(scale_encode(HalfInt{1}, 0), std::invalid_argument);
}

TEST_CASE("half-integer rounding") {
  CHECK(HalfInt{7}.floor() == 3);
  CHECK(HalfInt{7}.round_half_up() == 4);
  CHECK(HalfInt{-1}.floor() == -1);
  CHECK(HalfInt{-1}.round_half_up() == 0);
  CHECK(HalfInt{-3}.round_half_up() == -1);
  CHECK(HalfInt::from_int(5).round_half_up() == 5);
  CHECK(HalfInt::mid(1, 4).to_double() == doctest::Approx(2.5));
}

TEST_CASE("fixture primes are genuine safe primes") {
  for (auto [p, q] : {testfix::primes_512(), testfix::primes_2048()}) {
    CHECK(is_probable_prime(p));
    CHECK(is_probable_prime(q));
    CHECK(is_probable_prime((p - 1) / 2));
    CHECK(is_probable_prime((q - 1) / 2));
  }
}

TEST_CASE("2048-bit round trip on fixture key") {
  const KeyMaterial& km = testfix::fixed_key(2048, 3, 2);
  CHECK(km.params.bits == 2048);
  Rng rng(11);
  Encryption e = encrypt(km.params, -123456789, rng);
  CHECK(threshold_decrypt(km, e.ct) == -123456789);
}

TEST_CASE("byte codec round trips at fixed width") {
  Bytes out;
  append_be(out, Int("0x1234"), 4);
  CHECK(to_hex(out) == "00001234");
  ByteReader rd(out);
  CHECK(rd.take(4) == Int(0x1234));
  CHECK(rd.done());
  CHECK_THROWS_AS(append_be(out, Int("0x123456789a"), 4), std::length_error);
  CHECK(from_hex("00ff10") == Bytes({0x00, 0xff, 0x10}));
}
