#pragma once

// Rank-statistic search: interactive binary search over an integer range
// where each round only learns the sign-aggregate z of the encrypted
// comparisons.  The plain state machine is shared by the plaintext mirror
// and both protocol drivers, so crypto and mirror runs produce identical
// z sequences by construction.
//
// Conventions: inputs are integers in [low, high]; guesses are half-odd
// integers so comparisons never tie; z counts (above - below) plus the rank
// offset 2k - N when a specific rank k is requested.  |z| <= delta ends the
// search, otherwise the guess interval halves until its width is at most 2.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ranksec/paillier.hpp"
#include "ranksec/sigma.hpp"

namespace ranksec {

// --- plain search ----------------------------------------------------------

struct SearchSpec {
  std::int64_t low = 0;
  std::int64_t high = 0;
  unsigned n_inputs = 0;
  std::optional<std::int64_t> rank;  // 1-based k; empty means plain median
  std::int64_t delta_tol = 0;        // early-stop tolerance on |z|

  void validate() const;
};

struct SearchState {
  std::int64_t alpha = 0;
  std::int64_t beta = 0;
  unsigned round = 0;  // aggregation rounds completed
  HalfInt guess;       // guess for the next round (meaningless once done)
  bool done = false;
  std::int64_t result = 0;
};

// Fresh state: full range, round-one guess (rank-weighted when k is set).
SearchState search_begin(const SearchSpec& spec);

// Start from a narrowed interval (moments-based initialisation).
SearchState search_begin_at(const SearchSpec& spec, std::int64_t alpha, std::int64_t beta,
                            HalfInt first_guess);

// Sign aggregate for plain inputs at m: sum of sign(x_i - m) plus 2k - N.
std::int64_t aggregate_plain(std::span<const std::int64_t> xs, HalfInt guess,
                             const SearchSpec& spec);

// One protocol round: consume z, emit the successor state.
SearchState search_step(const SearchSpec& spec, SearchState st, std::int64_t z);

// Upper bound on aggregation rounds for the spec's range and mode.
unsigned max_rounds(const SearchSpec& spec);

// Breadth-first guess candidates for speculative execution: the current
// guess, then for each node its low-branch and high-branch successors.
std::vector<HalfInt> speculative_guesses(const SearchState& st, unsigned depth);

struct PlainRunResult {
  std::int64_t result = 0;
  unsigned rounds = 0;
  std::vector<std::int64_t> z_sequence;
};

PlainRunResult run_plain_search(const SearchSpec& spec, std::span<const std::int64_t> xs);
PlainRunResult run_plain_search_from(const SearchSpec& spec, SearchState st,
                                     std::span<const std::int64_t> xs);

// Sorting oracles the protocol is measured against.
std::int64_t rank_oracle(std::vector<std::int64_t> xs, std::int64_t k);
std::int64_t median_oracle(std::vector<std::int64_t> xs);  // lower middle when even

// --- moments ---------------------------------------------------------------

struct MomentsReport {
  unsigned n = 0;
  Int s1, s2, s3, s4;  // power sums
  mpq_class mean;
  mpq_class variance;   // exact
  mpq_class skew_num;   // third central moment (exact)
  mpq_class kurt_num;   // fourth central moment (exact)
  mpq_class kurtosis;   // kurt_num / variance^2, exact when variance > 0
  double std_dev = 0.0;
  double skewness = 0.0;  // skew_num / variance^1.5
  bool degenerate = false;  // variance == 0: skew/kurtosis undefined
};

MomentsReport moments_from_sums(unsigned n, const Int& s1, const Int& s2, const Int& s3,
                                const Int& s4);
MomentsReport moments_plain(std::span<const std::int64_t> xs);

// Search interval [mu - sigma, mu + sigma] clamped to the data range, plus
// the first guess at mu.
struct MomentsInit {
  std::int64_t alpha = 0;
  std::int64_t beta = 0;
  HalfInt first_guess;
};
MomentsInit init_range_from_moments(const MomentsReport& mr, std::int64_t low, std::int64_t high);

// --- encrypted protocol pieces --------------------------------------------

// Registration: the encrypted input plus the proof that it lies in range.
struct RegisteredInput {
  Ciphertext enc_x;
  RangeProof range_pf;
};

RegisteredInput register_input(const PublicParams& pp, const Encryption& enc_x, std::int64_t x,
                               std::int64_t low, std::int64_t high, Rng& rng, Context ctx = {});
bool verify_registration(const PublicParams& pp, const RegisteredInput& reg, std::int64_t low,
                         std::int64_t high, Context ctx = {});

// The deterministic comparison ciphertext E(eta*(x - m)) derived from the
// registered E(x); the round constant is encrypted with fixed randomness 1
// so every party computes the same bytes.
Ciphertext compute_enc_q(const PublicParams& pp, const Ciphertext& enc_x, HalfInt guess,
                         std::int64_t eta);

// What a user sends each round: the comparison ciphertext, the claimed sign
// and magnitude, and proofs tying all three together.
struct SignSubmission {
  Ciphertext enc_q;     // eta*(x - m); workers recompute and compare
  Ciphertext enc_sign;  // phi(q), fresh encryption
  Ciphertext enc_abs;   // phi(q)*q = |q|
  SignBitProof sign_pf;
  ProductProof prod_pf;      // enc_abs = enc_sign * q
  RangeProof abs_range_pf;   // |q| in [0, eta*(high-low)]
  NonZeroProof nonzero_pf;   // |q| != 0

  Bytes serialize(const PublicParams& pp) const;
  static SignSubmission parse(const PublicParams& pp, std::span<const std::uint8_t> in);
};

SignSubmission make_submission(const PublicParams& pp, const Encryption& enc_x, std::int64_t x,
                               HalfInt guess, std::int64_t eta, std::int64_t low,
                               std::int64_t high, Rng& rng, Context ctx = {});

// Full worker-side check; on failure *why names the offending piece.
bool verify_submission(const PublicParams& pp, const Ciphertext& enc_x, HalfInt guess,
                       std::int64_t eta, std::int64_t low, std::int64_t high,
                       const SignSubmission& sub, Context ctx = {}, std::string* why = nullptr);

// Homomorphic fold of the sign ciphertexts plus the rank offset (encrypted
// with randomness 1 when nonzero).  hom_adds, when provided, receives the
// number of ciphertext additions performed.
Ciphertext aggregate_signs(const PublicParams& pp, std::span<const Ciphertext> enc_signs,
                           std::int64_t offset, unsigned* hom_adds = nullptr);

// Power submission for the moments pipeline: encryptions of x^2..x^4, each
// linked to the previous power by a product proof, so verifiers know the
// chain really is the powers of the registered enc_x.
struct PowerSubmission {
  Ciphertext enc_x;
  Ciphertext enc_x2, enc_x3, enc_x4;
  ProductProof link2;  // enc_x2 = enc_x  * x
  ProductProof link3;  // enc_x3 = enc_x2 * x
  ProductProof link4;  // enc_x4 = enc_x3 * x

  Bytes serialize(const PublicParams& pp) const;
  static PowerSubmission parse(const PublicParams& pp, std::span<const std::uint8_t> in);
};

PowerSubmission make_power_submission(const PublicParams& pp, const Encryption& enc_x,
                                      std::int64_t x, Rng& rng, Context ctx = {});
bool verify_power_submission(const PublicParams& pp, const PowerSubmission& sub, Context ctx = {},
                             std::string* why = nullptr);

}  // namespace ranksec
