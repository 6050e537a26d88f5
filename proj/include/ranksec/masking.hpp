#pragma once

// Multiplicative masking of comparison results.  Each party contributes a
// signed product of primes drawn from the plaintext space; the joint mask
// r = prod r_j hides the magnitude of q in y = q * r while phi(q) stays
// recoverable as phi(y) * phi(r).  Hiding is statistical: a factor of the
// space is absent from the mask with a probability the closed form below
// predicts, and tests check the prediction by Monte Carlo.

#include <span>
#include <utility>
#include <vector>

#include "ranksec/bigint.hpp"

namespace ranksec {

struct MaskingConfig {
  Int low = 0;            // plaintext space X = [low, high] with 0 removed
  Int high = 0;
  double zero_freq = 0.25;  // per-party probability a prime keeps frequency 0
  unsigned max_freq = 3;    // frequencies are otherwise uniform in [1, max_freq]
};

// Number of values in X.
unsigned long masking_space_size(const MaskingConfig& cfg);

// Largest admissible |mask| so that masked comparisons stay decodable:
// (n - 1) / (16 * (high - low)).
Int randomness_bound(const Int& n, const Int& low, const Int& high);

// Per-party budget: floor of the parties-th root of the global bound, so
// the product of all contributions respects it.
Int per_party_bound(const Int& global_bound, unsigned parties);

struct PartyRandomness {
  Int magnitude;  // product of sampled prime powers, >= 1
  int sign = 1;   // uniform sign flip
  std::vector<std::pair<Int, unsigned>> factors;  // (prime, frequency) actually taken

  Int value() const { return sign < 0 ? Int(-magnitude) : magnitude; }
};

// Draw one party's mask contribution: primes of X in random order, a
// frequency for each (zero with probability zero_freq), greedily capped by
// party_bound.  The result is never zero.
PartyRandomness sample_party_randomness(const MaskingConfig& cfg, const Int& party_bound,
                                        Rng& rng);

// q * r, guarded against leaving the decodable plaintext range.
Int mask_value(const Int& q, const Int& r, const Int& plain_bound);

// phi(q) = phi(y) * phi(r).
int unmask_sign(int sign_y, int sign_r);

// Probability that at least one value of the space has frequency zero in
// every party's draw: 1 - (1 - prod p_j)^space_size.
double zero_freq_probability(std::span<const double> p_per_party, unsigned long space_size);

// Monte Carlo estimate of the same event under the per-value frequency
// model; converges on zero_freq_probability.
double mc_zero_freq_estimate(std::span<const double> p_per_party, unsigned long space_size,
                             unsigned trials, Rng& rng);

}  // namespace ranksec
