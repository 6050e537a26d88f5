#include "ranksec/masking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ranksec {

namespace {

std::vector<Int> primes_in_space(const MaskingConfig& cfg) {
  std::vector<Int> primes;
  Int p = cfg.low > 2 ? Int(cfg.low - 1) : Int(1);
  for (;;) {
    mpz_nextprime(p.get_mpz_t(), p.get_mpz_t());
    if (p > cfg.high || primes.size() >= 4096) break;
    primes.push_back(p);
  }
  return primes;
}

}  // namespace

unsigned long masking_space_size(const MaskingConfig& cfg) {
  if (cfg.high < cfg.low) throw std::invalid_argument("masking: empty space");
  Int count = cfg.high - cfg.low + 1;
  if (cfg.low <= 0 && cfg.high >= 0) count -= 1;  // 0 is excluded
  return mpz_get_ui(count.get_mpz_t());
}

Int randomness_bound(const Int& n, const Int& low, const Int& high) {
  if (high <= low) throw std::invalid_argument("randomness_bound: empty range");
  return (n - 1) / (16 * (high - low));
}

Int per_party_bound(const Int& global_bound, unsigned parties) {
  if (global_bound < 1 || parties == 0)
    throw std::invalid_argument("per_party_bound: bad arguments");
  return iroot(global_bound, parties);
}

PartyRandomness sample_party_randomness(const MaskingConfig& cfg, const Int& party_bound,
                                        Rng& rng) {
  if (party_bound < 1) throw std::invalid_argument("sample_party_randomness: bound below 1");
  std::vector<Int> primes = primes_in_space(cfg);
  // Fisher-Yates on the candidate order; greedy fill below
  for (size_t i = primes.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rng.u64() % i);
    std::swap(primes[i - 1], primes[j]);
  }
  PartyRandomness out;
  out.magnitude = 1;
  for (const Int& prime : primes) {
    unsigned freq = 0;
    if (rng.real01() >= cfg.zero_freq && cfg.max_freq > 0)
      freq = 1 + static_cast<unsigned>(rng.u64() % cfg.max_freq);
    unsigned taken = 0;
    for (unsigned k = 0; k < freq && out.magnitude * prime <= party_bound; ++k) {
      out.magnitude *= prime;
      ++taken;
    }
    if (taken > 0) out.factors.emplace_back(prime, taken);
  }
  out.sign = (rng.u64() & 1) ? 1 : -1;
  return out;
}

Int mask_value(const Int& q, const Int& r, const Int& plain_bound) {
  if (r == 0) throw std::invalid_argument("mask_value: zero mask");
  Int y = q * r;
  if (abs(y) > plain_bound) throw std::overflow_error("mask_value: masked value out of range");
  return y;
}

int unmask_sign(int sign_y, int sign_r) {
  if ((sign_y != 1 && sign_y != -1) || (sign_r != 1 && sign_r != -1))
    throw std::invalid_argument("unmask_sign: signs must be +/-1");
  return sign_y * sign_r;
}

double zero_freq_probability(std::span<const double> p_per_party, unsigned long space_size) {
  double all_zero = 1.0;
  for (double p : p_per_party) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("zero_freq_probability: bad probability");
    all_zero *= p;
  }
  return 1.0 - std::pow(1.0 - all_zero, static_cast<double>(space_size));
}

double mc_zero_freq_estimate(std::span<const double> p_per_party, unsigned long space_size,
                             unsigned trials, Rng& rng) {
  unsigned hits = 0;
  for (unsigned t = 0; t < trials; ++t) {
    bool some_value_missing = false;
    for (unsigned long v = 0; v < space_size && !some_value_missing; ++v) {
      bool all_parties_zero = true;
      for (double p : p_per_party) {
        if (rng.real01() >= p) {  // this party gave the value a nonzero frequency
          all_parties_zero = false;
          break;
        }
      }
      some_value_missing = all_parties_zero;
    }
    if (some_value_missing) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace ranksec
