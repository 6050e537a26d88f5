#pragma once

// Shared test fixtures.  Key generation from scratch hunts for safe primes,
// which is cheap at 512 bits but takes tens of seconds at 2048, so the large
// tests run against these pre-generated primes (checked for safety at load).
// The fixed dealer seed keeps shares and verification keys reproducible.

#include <map>
#include <tuple>

#include "ranksec/paillier.hpp"

namespace ranksec::testfix {

inline std::pair<Int, Int> primes_512() {
  return {Int("0xf0e854a7501e0da9e80caf1475ad532aa0b2d225907d17469161ed2f652a06b7"),
          Int("0xa16d6696ef70e4549c7c7c30271bb07be1cf93d7903b6f71e012800b9463e2e3")};
}

inline std::pair<Int, Int> primes_2048() {
  return {Int("0xae5b1cf1de2fc8bb311b59f718b86a0f6fdf372c3457930747b5262930dfb694"
              "e68e168351c2b68ca2b8fab3a5248d729912faa62b00925fc259eff35e8ddda7"
              "8bcbdced69dbf78fe0d3aadd10cbe6ec87dd7e1d25fdfcb624dd818486ae8045"
              "f813c4b60595cacc6e4ba70a481a16122f43db89fea063b54fa9cb05baa303b3"),
          Int("0xd1542a83eea2870d64ad8c9e478f5300bb42738c25f8c67aacdb213b0d3fc877"
              "37045ad139566a3078ea07e4912fccc0c936d810993a5d015f8e8242fbd645ad"
              "f34078ce19159315b594f3ec648a900b589be8d309f59d9d353e04032a6162e9"
              "459558daad45ae223c7230bcccf1e19407d08e02f2a5fb4265e75b4479f44193")};
}

// Dealer step over the frozen primes; memoized per (bits, parties, seed).
inline const KeyMaterial& fixed_key(unsigned bits, unsigned parties, std::uint64_t seed) {
  static std::map<std::tuple<unsigned, unsigned, std::uint64_t>, KeyMaterial> cache;
  auto key = std::make_tuple(bits, parties, seed);
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto [p, q] = (bits == 2048) ? primes_2048() : primes_512();
    Rng rng(seed);
    it = cache.emplace(key, keygen_from_primes(p, q, parties, rng)).first;
  }
  return it->second;
}

// Full key generation (prime search included); memoized as well.
inline const KeyMaterial& fresh_key(unsigned bits, unsigned parties, std::uint64_t seed) {
  static std::map<std::tuple<unsigned, unsigned, std::uint64_t>, KeyMaterial> cache;
  auto key = std::make_tuple(bits, parties, seed);
  auto it = cache.find(key);
  if (it == cache.end()) {
    Rng rng(seed);
    it = cache.emplace(key, keygen(bits, parties, rng)).first;
  }
  return it->second;
}

}  // namespace ranksec::testfix
