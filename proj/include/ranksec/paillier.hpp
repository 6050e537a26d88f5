#pragma once

// Additively homomorphic encryption with threshold decryption.
//
// Key material is produced by a trusted dealer: modulus n = p*q from safe
// primes, secret exponent d (d = 0 mod p'q', d = 1 mod n) split into J
// Shamir shares over Z_{n*p'q'}.  Decryption needs all J shares; each share
// holder publishes a partial decryption c^(2*delta*s_i) that anyone can
// combine by Lagrange interpolation in the exponent.
//
// Plaintexts are signed: the range [-(n-1)/2, (n-1)/2] maps onto Z_n with
// the upper half representing negatives.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ranksec/bigint.hpp"

namespace ranksec {

// Exact half-integer (value = twice/2).  Rank searches guess at points
// strictly between adjacent integers, so guesses and thresholds are carried
// as half-integers end to end and only scaled up when they enter the
// ciphertext domain.
struct HalfInt {
  std::int64_t twice = 0;

  static HalfInt from_int(std::int64_t v) { return {2 * v}; }
  static HalfInt mid(std::int64_t a, std::int64_t b) { return {a + b}; }  // (a+b)/2

  bool is_integer() const { return twice % 2 == 0; }
  std::int64_t floor() const {
    return (twice >= 0) ? twice / 2 : -((-twice + 1) / 2);
  }
  // Round halves toward +infinity: 3.5 -> 4, -0.5 -> 0, integers unchanged.
  std::int64_t round_half_up() const {
    std::int64_t t = twice + 1;
    return (t >= 0) ? t / 2 : -((-t + 1) / 2);
  }
  double to_double() const { return static_cast<double>(twice) / 2.0; }

  friend bool operator==(HalfInt a, HalfInt b) { return a.twice == b.twice; }
};

// Scale a half-integer by an even factor eta, landing on an exact integer.
// scale_encode(3.5, 2) = 7, scale_encode(-0.5, 2) = -1.
Int scale_encode(HalfInt x, std::int64_t eta);

struct Ciphertext {
  Int c;  // element of Z_{n^2}^*
  friend bool operator==(const Ciphertext& a, const Ciphertext& b) { return a.c == b.c; }
};

// A ciphertext together with the randomness used to produce it.  Provers
// need the randomness as witness material.
struct Encryption {
  Ciphertext ct;
  Int r;  // unit mod n
};

struct PublicParams {
  unsigned bits = 0;   // modulus size: 512, 1024, 1536 or 2048
  unsigned parties = 0;  // J = number of share holders = threshold
  Int n;
  Int n2;              // n^2, cached
  Int delta;           // J!
  Int v;               // verification base, a square in Z_{n^2}^*
  std::vector<Int> verification_keys;  // v_i = v^(delta * s_i), index i-1
  Int inv_four_delta_sq;               // (4*delta^2)^-1 mod n

  Int g() const { return n + 1; }
  Int max_plain() const { return (n - 1) / 2; }
  size_t base_width() const { return (bits + 7) / 8; }      // one Z_n element
  size_t squared_width() const { return 2 * base_width(); }  // one Z_{n^2} element
};

struct SecretKeyShare {
  unsigned index = 0;  // evaluation point, 1..J
  Int s;               // f(index) mod n*m
};

// What the dealer knows and then forgets.  Kept around only so tests can
// check the arithmetic that normally stays hidden.
struct DealerSecrets {
  Int p, q;        // safe primes
  Int p_sub, q_sub;  // p = 2*p_sub + 1, q = 2*q_sub + 1
  Int m;           // p_sub * q_sub
  Int d;           // 0 mod m, 1 mod n
};

struct KeyMaterial {
  PublicParams params;
  std::vector<SecretKeyShare> shares;
  DealerSecrets dealer;
};

// Fresh key generation.  bits must be one of {512, 1024, 1536, 2048};
// parties >= 2.  Both safe primes are drawn from rng, so a fixed seed gives
// a fixed key.
KeyMaterial keygen(unsigned bits, unsigned parties, Rng& rng);

// Dealer step alone, for pre-generated safe primes (p = 2p'+1, q = 2q'+1,
// both prime, p != q).  Validates the primes.
KeyMaterial keygen_from_primes(const Int& p, const Int& q, unsigned parties, Rng& rng);

// value must lie in [-(n-1)/2, (n-1)/2].
Encryption encrypt(const PublicParams& pp, const Int& value, Rng& rng);
Ciphertext encrypt_with_randomness(const PublicParams& pp, const Int& value, const Int& r);

// E(a)*E(b) = E(a+b), E(a)/E(b) = E(a-b), E(a)^k = E(k*a).
Ciphertext hom_add(const PublicParams& pp, const Ciphertext& a, const Ciphertext& b);
Ciphertext hom_sub(const PublicParams& pp, const Ciphertext& a, const Ciphertext& b);
Ciphertext hom_scalar_mul(const PublicParams& pp, const Ciphertext& a, const Int& k);
// Scalar multiply and re-randomize in one step; returns the fresh factor so
// the caller can prove the relation between input and output.
Encryption hom_scalar_mul_rerand(const PublicParams& pp, const Ciphertext& a, const Int& k,
                                 Rng& rng);

struct PartialDecryption {
  unsigned index = 0;
  Int value;  // c^(2 * delta * s_index) mod n^2
};

PartialDecryption partial_decrypt(const PublicParams& pp, const SecretKeyShare& share,
                                  const Ciphertext& c);

// Lagrange combination over whatever distinct indices are present.  Returns
// nullopt when the interpolated value does not decode (wrong or missing
// shares).  No count check: analysis and negative tests use this directly.
std::optional<Int> interpolate_plaintext(const PublicParams& pp,
                                         std::span<const PartialDecryption> parts);

// Checked combination: requires exactly one partial from every share holder.
// Throws std::invalid_argument on missing or duplicate indices, and
// std::runtime_error if the parts fail to decode.
Int combine(const PublicParams& pp, std::span<const PartialDecryption> parts);

// Direct decryption with the dealer exponent; test oracle only.
Int decrypt_with_dealer(const PublicParams& pp, const DealerSecrets& dealer,
                        const Ciphertext& c);

// Signed decode of a Z_n residue.
Int to_signed(const PublicParams& pp, const Int& residue);

}  // namespace ranksec
