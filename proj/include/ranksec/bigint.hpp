#pragma once

// Thin helpers around GMP's C++ interface: deterministic randomness,
// modular arithmetic that tolerates negative exponents, primality, and
// fixed-width big-endian serialization.

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ranksec {

using Int = mpz_class;

using Bytes = std::vector<std::uint8_t>;

// Deterministic random stream (Mersenne Twister state from GMP).
// Every piece of the system that needs randomness takes one of these
// explicitly, so a run is reproducible from its seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    gmp_randinit_mt(state_);
    gmp_randseed_ui(state_, static_cast<unsigned long>(seed));
  }
  ~Rng() { gmp_randclear(state_); }
  Rng(const Rng&) = delete;
  Rng& operator=(const Rng&) = delete;

  // Uniform in [0, bound).
  Int below(const Int& bound) {
    if (bound <= 0) throw std::invalid_argument("Rng::below: bound must be positive");
    Int r;
    mpz_urandomm(r.get_mpz_t(), state_, bound.get_mpz_t());
    return r;
  }

  // Uniform in [lo, hi] inclusive.
  Int between(const Int& lo, const Int& hi) {
    if (hi < lo) throw std::invalid_argument("Rng::between: empty interval");
    return lo + below(hi - lo + 1);
  }

  // Uniform with exactly `bits` random bits, i.e. [0, 2^bits).
  Int bits(unsigned long n_bits) {
    Int r;
    mpz_urandomb(r.get_mpz_t(), state_, n_bits);
    return r;
  }

  // Uniform in [1, n) with gcd(r, n) = 1.
  Int unit_mod(const Int& n) {
    for (;;) {
      Int r = below(n);
      if (r == 0) continue;
      Int g;
      mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t());
      if (g == 1) return r;
    }
  }

  std::uint64_t u64() {
    Int r = bits(64);
    Int hi = r >> 32;
    return (mpz_get_ui(r.get_mpz_t()) & 0xffffffffULL) |
           (static_cast<std::uint64_t>(mpz_get_ui(hi.get_mpz_t())) << 32);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double real01() {
    Int r = bits(53);
    return mpz_get_d(r.get_mpz_t()) / 9007199254740992.0;  // 2^53
  }

  gmp_randstate_t& raw() { return state_; }

 private:
  gmp_randstate_t state_;
};

inline bool is_probable_prime(const Int& n) {
  return mpz_probab_prime_p(n.get_mpz_t(), 40) != 0;
}

// b^e mod m; negative e is handled via modular inverse (m must be coprime).
inline Int powm(const Int& b, const Int& e, const Int& m) {
  Int r;
  if (e < 0) {
    Int inv;
    if (mpz_invert(inv.get_mpz_t(), b.get_mpz_t(), m.get_mpz_t()) == 0)
      throw std::domain_error("powm: base not invertible");
    Int pe = -e;
    mpz_powm(r.get_mpz_t(), inv.get_mpz_t(), pe.get_mpz_t(), m.get_mpz_t());
  } else {
    mpz_powm(r.get_mpz_t(), b.get_mpz_t(), e.get_mpz_t(), m.get_mpz_t());
  }
  return r;
}

inline Int invmod(const Int& a, const Int& m) {
  Int r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0)
    throw std::domain_error("invmod: not invertible");
  return r;
}

inline Int mulm(const Int& a, const Int& b, const Int& m) { return Int((a * b) % m); }

// Canonical representative in [0, m).
inline Int mod(const Int& a, const Int& m) {
  Int r;
  mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

inline Int isqrt(const Int& a) {
  Int r;
  mpz_sqrt(r.get_mpz_t(), a.get_mpz_t());
  return r;
}

inline bool is_perfect_square(const Int& a) {
  return a >= 0 && mpz_perfect_square_p(a.get_mpz_t()) != 0;
}

// Largest g with g^k <= a (integer k-th root, rounded down).
inline Int iroot(const Int& a, unsigned long k) {
  Int r;
  mpz_root(r.get_mpz_t(), a.get_mpz_t(), k);
  return r;
}

inline size_t bit_length(const Int& a) { return mpz_sizeinbase(a.get_mpz_t(), 2); }

// --- fixed-width big-endian codec -----------------------------------------
//
// All wire structures are sequences of unsigned integers written at a fixed
// byte width, most-significant byte first.  Width is dictated by the field's
// domain (modulus size), never by the value.

inline void append_be(Bytes& out, const Int& v, size_t width) {
  if (v < 0) throw std::invalid_argument("append_be: negative value");
  size_t need = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
  if (v == 0) need = 0;
  if (need > width) throw std::length_error("append_be: value wider than field");
  size_t at = out.size();
  out.resize(at + width, 0);
  if (need > 0) {
    size_t count = 0;
    mpz_export(out.data() + at + (width - need), &count, 1, 1, 1, 0, v.get_mpz_t());
  }
}

inline Bytes to_be(const Int& v, size_t width) {
  Bytes out;
  append_be(out, v, width);
  return out;
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  Int take(size_t width) {
    if (pos_ + width > data_.size()) throw std::out_of_range("ByteReader: truncated input");
    Int v;
    mpz_import(v.get_mpz_t(), width, 1, 1, 1, 0, data_.data() + pos_);
    pos_ += width;
    return v;
  }

  std::span<const std::uint8_t> take_raw(size_t len) {
    if (pos_ + len > data_.size()) throw std::out_of_range("ByteReader: truncated input");
    auto s = data_.subspan(pos_, len);
    pos_ += len;
    return s;
  }

  bool done() const { return pos_ == data_.size(); }
  size_t remaining() const { return data_.size() - pos_; }

 private:
  std::span<const std::uint8_t> data_;
  size_t pos_ = 0;
};

inline std::string to_hex(std::span<const std::uint8_t> b) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(b.size() * 2);
  for (auto c : b) {
    s.push_back(digits[c >> 4]);
    s.push_back(digits[c & 0xf]);
  }
  return s;
}

inline Bytes from_hex(const std::string& s) {
  if (s.size() % 2 != 0) throw std::invalid_argument("from_hex: odd length");
  auto nib = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("from_hex: bad digit");
  };
  Bytes out(s.size() / 2);
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>((nib(s[2 * i]) << 4) | nib(s[2 * i + 1]));
  return out;
}

}  // namespace ranksec
