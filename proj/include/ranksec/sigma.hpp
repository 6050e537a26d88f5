#pragma once

// Non-interactive zero-knowledge proofs over the threshold cryptosystem
// (sigma protocols made non-interactive via Fiat-Shamir).  Five statements:
//
//   product    E(z) encrypts x*y given E(x), E(y)
//   sign_bit   E(x) encrypts -1 or +1
//   range      E(x) encrypts a value in [0, B]   (three-squares technique)
//   nonzero    E(x) encrypts a value with an inverse mod n
//   dec_share  a partial decryption matches the holder's verification key
//
// Verifiers recompute the challenge from the statement and commitments, so
// challenges never travel.  Every proof kind hashes under its own domain
// tag, and callers may bind proofs to an outer context (user, round, bundle)
// by passing the same context bytes to prover and verifier.
//
// Wire format: one kind byte, then fixed-width big-endian fields in the
// order commitments, challenge-or-hash, responses.  Widths come from the
// modulus: base = one Z_n element, squared = one Z_{n^2} element.

#include <functional>
#include <optional>
#include <string_view>

#include "ranksec/fiat_shamir.hpp"
#include "ranksec/paillier.hpp"

namespace ranksec {

enum class ProofKind : std::uint8_t {
  product = 1,
  sign_bit = 2,
  range = 3,
  nonzero = 4,
  dec_share = 5,
};

std::string_view proof_kind_name(ProofKind k);

// Serialized body size (no kind byte) in bytes for the given modulus.
size_t proof_body_size(ProofKind k, const PublicParams& pp);

using Context = std::span<const std::uint8_t>;

// --- product ---------------------------------------------------------------

struct ProductProof {
  Int enc_m;    // commitment E(m)
  Int enc_xm;   // commitment E(x*m)
  Int p;        // m + e*y mod n
  Int w, u;     // randomness responses

  static constexpr ProofKind kind = ProofKind::product;
  Bytes serialize_body(const PublicParams& pp) const;
  static ProductProof parse_body(const PublicParams& pp, std::span<const std::uint8_t> in);
};

// Witness: the multiplier y, the randomness gamma of E(y), and the factor nu
// with E(z) = E(x)^y * nu^n.  The prover does not need to know x.
ProductProof prove_product(const PublicParams& pp, const Ciphertext& ex, const Ciphertext& ey,
                           const Ciphertext& ez, const Int& y, const Int& gamma, const Int& nu,
                           Rng& rng, Context ctx = {});
bool verify_product(const PublicParams& pp, const Ciphertext& ex, const Ciphertext& ey,
                    const Ciphertext& ez, const ProductProof& pf, Context ctx = {});

// --- sign_bit --------------------------------------------------------------

struct SignBitProof {
  Int enc_m;         // E(m)
  Int enc_double_mx; // E(2*m*x)
  Int enc_m_sq;      // E(m^2)
  Int p;             // m + e*x mod n
  Int w, u;

  static constexpr ProofKind kind = ProofKind::sign_bit;
  Bytes serialize_body(const PublicParams& pp) const;
  static SignBitProof parse_body(const PublicParams& pp, std::span<const std::uint8_t> in);
};

// Witness: x and the randomness gamma of E(x).  The proof is built for any
// x, but only verifies when x is -1 or +1.
SignBitProof prove_sign_bit(const PublicParams& pp, const Ciphertext& ex, const Int& x,
                            const Int& gamma, Rng& rng, Context ctx = {});
bool verify_sign_bit(const PublicParams& pp, const Ciphertext& ex, const SignBitProof& pf,
                     Context ctx = {});

// --- range -----------------------------------------------------------------

struct RangeProof {
  Int enc_sq1, enc_sq2, enc_sq3;  // encryptions of the three squares' roots
  Int d;                          // aggregate commitment
  Int commit_hash;                // hash binding the masked commitments
  Int p0, p1, p2, p3;             // integer responses (no modular reduction)
  Int w0, w1, w2, w3;
  Int tau;

  static constexpr ProofKind kind = ProofKind::range;
  Bytes serialize_body(const PublicParams& pp) const;
  static RangeProof parse_body(const PublicParams& pp, std::span<const std::uint8_t> in);
};

// Proves the value of E(x) lies in [0, bound].  Witness: x and the
// encryption randomness r of E(x).  Throws std::domain_error when x is
// outside the range (dishonest use is caught before any work happens).
RangeProof prove_range(const PublicParams& pp, const Ciphertext& ex, const Int& x, const Int& r,
                       const Int& bound, Rng& rng, Context ctx = {});
bool verify_range(const PublicParams& pp, const Ciphertext& ex, const Int& bound,
                  const RangeProof& pf, Context ctx = {});

// Interval variant: proves the value lies in [lo, hi] by shifting the
// statement to [0, hi-lo].  Same wire format.
RangeProof prove_range_interval(const PublicParams& pp, const Ciphertext& ex, const Int& x,
                                const Int& r, const Int& lo, const Int& hi, Rng& rng,
                                Context ctx = {});
bool verify_range_interval(const PublicParams& pp, const Ciphertext& ex, const Int& lo,
                           const Int& hi, const RangeProof& pf, Context ctx = {});

// --- nonzero ---------------------------------------------------------------

struct NonZeroProof {
  Int enc_inv;  // E(x^-1)
  Int enc_m;    // E(m)
  Int enc_xm;   // E(x*m)
  Int p;
  Int w, u;

  static constexpr ProofKind kind = ProofKind::nonzero;
  Bytes serialize_body(const PublicParams& pp) const;
  static NonZeroProof parse_body(const PublicParams& pp, std::span<const std::uint8_t> in);
};

// Witness: x and the randomness r of E(x).  Throws std::domain_error for
// x = 0 (no inverse exists, so no proof can be formed).
NonZeroProof prove_nonzero(const PublicParams& pp, const Ciphertext& ex, const Int& x,
                           const Int& r, Rng& rng, Context ctx = {});
bool verify_nonzero(const PublicParams& pp, const Ciphertext& ex, const NonZeroProof& pf,
                    Context ctx = {});

// --- dec_share -------------------------------------------------------------

struct DecShareProof {
  Int e;  // challenge (verifier recomputes the commitments from it)
  Int z;  // blinded integer response, about twice the modulus width

  static constexpr ProofKind kind = ProofKind::dec_share;
  Bytes serialize_body(const PublicParams& pp) const;
  static DecShareProof parse_body(const PublicParams& pp, std::span<const std::uint8_t> in);
};

DecShareProof prove_dec_share(const PublicParams& pp, const SecretKeyShare& share,
                              const Ciphertext& c, const PartialDecryption& part, Rng& rng,
                              Context ctx = {});
bool verify_dec_share(const PublicParams& pp, const Ciphertext& c, const PartialDecryption& part,
                      const DecShareProof& pf, Context ctx = {});

// Partial decryption together with its correctness proof.
struct ProvedPartial {
  PartialDecryption part;
  DecShareProof proof;
};

ProvedPartial partial_decrypt_proved(const PublicParams& pp, const SecretKeyShare& share,
                                     const Ciphertext& c, Rng& rng, Context ctx = {});
bool verify_proved_partial(const PublicParams& pp, const Ciphertext& c, const ProvedPartial& pd,
                           Context ctx = {});

// --- three squares ---------------------------------------------------------

struct ThreeSquares {
  Int a, b, c;
};

// Writes t as a^2 + b^2 + c^2.  Exhaustive (largest-first, deterministic)
// for t <= 10^6, randomized two-square completion above that.  Returns
// nullopt for t of the form 4^a(8b+7), which have no such decomposition.
std::optional<ThreeSquares> decompose_three_squares(const Int& t, Rng& rng);

// --- generic helpers -------------------------------------------------------

// Deterministic challenge in [0, bound) from a finished transcript.
Int fiat_shamir_challenge(const FsTranscript& tr, const Int& bound);

// Enumerates a proof's fields in wire order for structural tests.
template <typename Proof, typename Fn>
void for_each_field(Proof& pf, Fn&& fn) {
  if constexpr (std::is_same_v<Proof, ProductProof>) {
    fn("enc_m", pf.enc_m);
    fn("enc_xm", pf.enc_xm);
    fn("p", pf.p);
    fn("w", pf.w);
    fn("u", pf.u);
  } else if constexpr (std::is_same_v<Proof, SignBitProof>) {
    fn("enc_m", pf.enc_m);
    fn("enc_double_mx", pf.enc_double_mx);
    fn("enc_m_sq", pf.enc_m_sq);
    fn("p", pf.p);
    fn("w", pf.w);
    fn("u", pf.u);
  } else if constexpr (std::is_same_v<Proof, RangeProof>) {
    fn("enc_sq1", pf.enc_sq1);
    fn("enc_sq2", pf.enc_sq2);
    fn("enc_sq3", pf.enc_sq3);
    fn("d", pf.d);
    fn("commit_hash", pf.commit_hash);
    fn("p0", pf.p0);
    fn("p1", pf.p1);
    fn("p2", pf.p2);
    fn("p3", pf.p3);
    fn("w0", pf.w0);
    fn("w1", pf.w1);
    fn("w2", pf.w2);
    fn("w3", pf.w3);
    fn("tau", pf.tau);
  } else if constexpr (std::is_same_v<Proof, NonZeroProof>) {
    fn("enc_inv", pf.enc_inv);
    fn("enc_m", pf.enc_m);
    fn("enc_xm", pf.enc_xm);
    fn("p", pf.p);
    fn("w", pf.w);
    fn("u", pf.u);
  } else if constexpr (std::is_same_v<Proof, DecShareProof>) {
    fn("e", pf.e);
    fn("z", pf.z);
  } else {
    static_assert(sizeof(Proof) == 0, "unknown proof type");
  }
}

}  // namespace ranksec
