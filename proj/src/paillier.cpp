#include "ranksec/paillier.hpp"

#include <algorithm>
#include <stdexcept>

namespace ranksec {

namespace {

bool valid_bits(unsigned bits) {
  return bits == 512 || bits == 1024 || bits == 1536 || bits == 2048;
}

// Safe prime of exactly `bits` bits: p = 2p'+1 with p' prime.  Walks odd
// candidates for p' and keeps the top bit pinned so products reach the full
// modulus size.
Int gen_safe_prime(unsigned bits, Rng& rng) {
  const unsigned sub_bits = bits - 1;
  for (;;) {
    Int ps = rng.bits(sub_bits);
    mpz_setbit(ps.get_mpz_t(), sub_bits - 1);
    mpz_setbit(ps.get_mpz_t(), 0);
    // march forward from the random start until both halves are prime
    for (int steps = 0; steps < 4096; ++steps, ps += 2) {
      if (!is_probable_prime(ps)) continue;
      Int p = 2 * ps + 1;
      if (is_probable_prime(p) && bit_length(p) == bits) return p;
    }
  }
}

Int factorial(unsigned j) {
  Int f = 1;
  for (unsigned i = 2; i <= j; ++i) f *= i;
  return f;
}

}  // namespace

Int scale_encode(HalfInt x, std::int64_t eta) {
  if (eta <= 0 || eta % 2 != 0)
    throw std::invalid_argument("scale_encode: scale factor must be even and positive");
  return Int(eta / 2) * Int(x.twice);
}

KeyMaterial keygen(unsigned bits, unsigned parties, Rng& rng) {
  if (!valid_bits(bits)) throw std::invalid_argument("keygen: unsupported modulus size");
  if (parties < 2) throw std::invalid_argument("keygen: need at least two share holders");
  if (parties > 20) throw std::invalid_argument("keygen: too many share holders");
  for (;;) {
    Int p = gen_safe_prime(bits / 2, rng);
    Int q = gen_safe_prime(bits / 2, rng);
    if (p == q) continue;
    Int n = p * q;
    if (bit_length(n) != bits) continue;  // insist on full-size modulus
    return keygen_from_primes(p, q, parties, rng);
  }
}

KeyMaterial keygen_from_primes(const Int& p, const Int& q, unsigned parties, Rng& rng) {
  if (parties < 2 || parties > 20)
    throw std::invalid_argument("keygen: share holder count out of range");
  Int p_sub = (p - 1) / 2, q_sub = (q - 1) / 2;
  if (p == q || !is_probable_prime(p) || !is_probable_prime(q) ||
      !is_probable_prime(p_sub) || !is_probable_prime(q_sub))
    throw std::invalid_argument("keygen: inputs are not distinct safe primes");

  KeyMaterial km;
  DealerSecrets& ds = km.dealer;
  ds.p = p;
  ds.q = q;
  ds.p_sub = p_sub;
  ds.q_sub = q_sub;
  ds.m = p_sub * q_sub;

  PublicParams& pp = km.params;
  pp.bits = static_cast<unsigned>(bit_length(p) + bit_length(q));
  pp.parties = parties;
  pp.n = p * q;
  pp.n2 = pp.n * pp.n;
  pp.delta = factorial(parties);

  // d = m * (m^-1 mod n): divisible by m, congruent to 1 mod n.
  ds.d = ds.m * invmod(ds.m, pp.n);

  // Shamir polynomial of degree J-1 over Z_{n*m} with constant term d, so
  // reconstruction needs every share.
  Int nm = pp.n * ds.m;
  std::vector<Int> coeff(parties);
  coeff[0] = ds.d;
  for (unsigned i = 1; i < parties; ++i) coeff[i] = rng.below(nm);
  km.shares.resize(parties);
  for (unsigned i = 1; i <= parties; ++i) {
    Int x(i), acc = 0;
    for (unsigned c = parties; c-- > 0;) acc = mod(acc * x + coeff[c], nm);
    km.shares[i - 1] = SecretKeyShare{i, acc};
  }

  Int r = rng.unit_mod(pp.n2);
  pp.v = mulm(r, r, pp.n2);
  pp.verification_keys.resize(parties);
  for (unsigned i = 0; i < parties; ++i)
    pp.verification_keys[i] = powm(pp.v, pp.delta * km.shares[i].s, pp.n2);
  pp.inv_four_delta_sq = invmod(mod(4 * pp.delta * pp.delta, pp.n), pp.n);
  return km;
}

Encryption encrypt(const PublicParams& pp, const Int& value, Rng& rng) {
  Int r = rng.unit_mod(pp.n);
  return Encryption{encrypt_with_randomness(pp, value, r), r};
}

Ciphertext encrypt_with_randomness(const PublicParams& pp, const Int& value, const Int& r) {
  if (value > pp.max_plain() || value < -pp.max_plain())
    throw std::domain_error("encrypt: plaintext out of signed range");
  Int theta = mod(value, pp.n);
  // (n+1)^theta = 1 + n*theta mod n^2, cheaper than a powm
  Int gm = mod(1 + pp.n * theta, pp.n2);
  return Ciphertext{mulm(gm, powm(r, pp.n, pp.n2), pp.n2)};
}

Ciphertext hom_add(const PublicParams& pp, const Ciphertext& a, const Ciphertext& b) {
  return Ciphertext{mulm(a.c, b.c, pp.n2)};
}

Ciphertext hom_sub(const PublicParams& pp, const Ciphertext& a, const Ciphertext& b) {
  return Ciphertext{mulm(a.c, invmod(b.c, pp.n2), pp.n2)};
}

Ciphertext hom_scalar_mul(const PublicParams& pp, const Ciphertext& a, const Int& k) {
  return Ciphertext{powm(a.c, mod(k, pp.n), pp.n2)};
}

Encryption hom_scalar_mul_rerand(const PublicParams& pp, const Ciphertext& a, const Int& k,
                                 Rng& rng) {
  Int nu = rng.unit_mod(pp.n);
  Ciphertext scaled = hom_scalar_mul(pp, a, k);
  return Encryption{Ciphertext{mulm(scaled.c, powm(nu, pp.n, pp.n2), pp.n2)}, nu};
}

PartialDecryption partial_decrypt(const PublicParams& pp, const SecretKeyShare& share,
                                  const Ciphertext& c) {
  if (c.c <= 0 || c.c >= pp.n2) throw std::domain_error("partial_decrypt: ciphertext out of range");
  return PartialDecryption{share.index, powm(c.c, 2 * pp.delta * share.s, pp.n2)};
}

std::optional<Int> interpolate_plaintext(const PublicParams& pp,
                                         std::span<const PartialDecryption> parts) {
  if (parts.empty()) return std::nullopt;
  // lambda_i = delta * prod_{j != i} (-x_j) / (x_i - x_j); delta = J! makes
  // every lambda an integer for any subset of {1..J}.
  Int acc = 1;
  for (size_t i = 0; i < parts.size(); ++i) {
    Int num = pp.delta, den = 1;
    for (size_t j = 0; j < parts.size(); ++j) {
      if (j == i) continue;
      num *= -static_cast<long>(parts[j].index);
      den *= static_cast<long>(parts[i].index) - static_cast<long>(parts[j].index);
    }
    if (num % den != 0) return std::nullopt;  // duplicate indices land here
    Int lambda = num / den;
    acc = mulm(acc, powm(parts[i].value, 2 * lambda, pp.n2), pp.n2);
  }
  // acc should now be c^(4*delta^2*d), an element of the form 1 + n*t.
  Int shifted = acc - 1;
  if (shifted % pp.n != 0) return std::nullopt;
  Int t = shifted / pp.n;
  return to_signed(pp, mulm(mod(t, pp.n), pp.inv_four_delta_sq, pp.n));
}

Int combine(const PublicParams& pp, std::span<const PartialDecryption> parts) {
  if (parts.size() != pp.parties)
    throw std::invalid_argument("combine: need a partial from every share holder");
  std::vector<bool> seen(pp.parties + 1, false);
  for (const auto& part : parts) {
    if (part.index < 1 || part.index > pp.parties)
      throw std::invalid_argument("combine: partial with unknown index");
    if (seen[part.index]) throw std::invalid_argument("combine: duplicate index");
    seen[part.index] = true;
  }
  auto value = interpolate_plaintext(pp, parts);
  if (!value) throw std::runtime_error("combine: partial decryptions do not decode");
  return *value;
}

Int decrypt_with_dealer(const PublicParams& pp, const DealerSecrets& dealer,
                        const Ciphertext& c) {
  // Exponent 4d: the factor 4 collapses the order-4 component left over
  // from the randomizer (the unit group has order 4*n*m).
  Int a = powm(c.c, 4 * dealer.d, pp.n2);
  Int shifted = a - 1;
  if (shifted % pp.n != 0) throw std::runtime_error("decrypt: malformed ciphertext");
  Int t = mod(shifted / pp.n, pp.n);
  return to_signed(pp, mulm(t, invmod(Int(4), pp.n), pp.n));
}

Int to_signed(const PublicParams& pp, const Int& residue) {
  Int r = mod(residue, pp.n);
  return (r > pp.max_plain()) ? Int(r - pp.n) : r;
}

}  // namespace ranksec
