#include "ranksec/sigma.hpp"

#include <stdexcept>

namespace ranksec {

namespace {

// Range proofs use a 128-bit challenge and reject responses outside
// (B*C, B*C*L], which keeps the integer responses from leaking the witness
// while staying far below the modulus.
const Int kRangeChallengeBound = Int(1) << 128;
const Int kRangeSlack = Int(1) << 40;
const Int kWideChallengeBound = Int(1) << 256;

constexpr std::string_view kProductTag = "sigma/product/v1";
constexpr std::string_view kSignBitTag = "sigma/sign-bit/v1";
constexpr std::string_view kRangeTag = "sigma/range/v1";
constexpr std::string_view kRangeCommitTag = "sigma/range/v1/commit";
constexpr std::string_view kNonZeroTag = "sigma/nonzero/v1";
constexpr std::string_view kDecShareTag = "sigma/dec-share/v1";

// Encrypt a raw residue of Z_n (no signed-range policy; commitments live in
// the full group).
Ciphertext enc_residue(const PublicParams& pp, const Int& residue, const Int& r) {
  Int theta = mod(residue, pp.n);
  Int gm = mod(1 + pp.n * theta, pp.n2);
  return Ciphertext{mulm(gm, powm(r, pp.n, pp.n2), pp.n2)};
}

Int g_pow(const PublicParams& pp, const Int& exponent) {
  return mod(1 + pp.n * mod(exponent, pp.n), pp.n2);
}

bool in_group(const PublicParams& pp, const Int& v) { return v > 0 && v < pp.n2; }

Int digest_to_int(const Digest& d) {
  Int v;
  mpz_import(v.get_mpz_t(), d.size(), 1, 1, 1, 0, d.data());
  return v;
}

// Blinding width for dec_share responses: covers e * delta * share (two
// modulus widths plus challenge and delta headroom) with 40 bits of
// statistical slack.
size_t dec_share_blind_bits(const PublicParams& pp) { return 2 * pp.bits + 360; }

std::optional<ThreeSquares> three_squares_exhaustive(const Int& t) {
  for (Int a = isqrt(t); a >= 0; --a) {
    Int rem = t - a * a;
    for (Int b = isqrt(rem); 2 * b * b >= rem; --b) {
      Int rem2 = rem - b * b;
      if (is_perfect_square(rem2)) return ThreeSquares{a, b, isqrt(rem2)};
    }
  }
  return std::nullopt;
}

// p = a^2 + b^2 for a prime p = 1 mod 4: square root of -1, then Euclid
// descent.
std::optional<std::pair<Int, Int>> two_squares_prime(const Int& p, Rng& rng) {
  Int exp = (p - 1) / 4;
  Int z;
  bool found = false;
  for (int tries = 0; tries < 128 && !found; ++tries) {
    Int a = rng.between(2, p - 1);
    z = powm(a, exp, p);
    found = mod(z * z, p) == p - 1;
  }
  if (!found) return std::nullopt;
  Int r0 = p, r1 = z;
  while (r1 * r1 > p) {
    Int next = mod(r0, r1);
    r0 = r1;
    r1 = next;
  }
  Int b2 = p - r1 * r1;
  if (!is_perfect_square(b2)) return std::nullopt;
  return std::make_pair(r1, isqrt(b2));
}

std::optional<ThreeSquares> three_squares_randomized(const Int& t, Rng& rng) {
  Int root = isqrt(t);
  long max_attempts = 400 * static_cast<long>(bit_length(t)) + 1000;
  for (long attempt = 0; attempt < max_attempts; ++attempt) {
    Int a = rng.below(root + 1);
    // steer the remainder toward 1 mod 4 (or 2 mod 4 when t = 3 mod 8)
    Int tm4 = mod(t, 4);
    int want_parity = (tm4 == 1) ? 0 : 1;  // even a keeps t-a^2 = 1 mod 4 iff t = 1 mod 4
    if (mod(a, 2) != want_parity) {
      if (a > 0)
        a -= 1;
      else
        a += 1;
    }
    Int rem = t - a * a;
    if (rem < 0) continue;
    if (rem == 0) return ThreeSquares{a, 0, 0};
    if (rem == 1) return ThreeSquares{a, 1, 0};
    if (rem == 2) return ThreeSquares{a, 1, 1};
    if (is_perfect_square(rem)) return ThreeSquares{a, isqrt(rem), 0};
    if (mod(rem, 4) == 1 && is_probable_prime(rem)) {
      if (auto two = two_squares_prime(rem, rng)) return ThreeSquares{a, two->first, two->second};
    }
    if (mod(rem, 4) == 2) {
      Int h = rem / 2;
      if (mod(h, 4) == 1 && is_probable_prime(h)) {
        if (auto two = two_squares_prime(h, rng)) {
          Int u = two->first + two->second;
          Int v = abs(two->first - two->second);
          return ThreeSquares{a, u, v};  // 2(x^2+y^2) = (x+y)^2 + (x-y)^2
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::string_view proof_kind_name(ProofKind k) {
  switch (k) {
    case ProofKind::product: return "product";
    case ProofKind::sign_bit: return "sign_bit";
    case ProofKind::range: return "range";
    case ProofKind::nonzero: return "nonzero";
    case ProofKind::dec_share: return "dec_share";
  }
  return "?";
}

size_t proof_body_size(ProofKind k, const PublicParams& pp) {
  size_t w = pp.base_width();
  switch (k) {
    case ProofKind::product: return 9 * w;    // 4 squared + 1 base
    case ProofKind::sign_bit: return 11 * w;  // 5 squared + 1 base
    case ProofKind::range: return 23 * w;     // 9 squared + 5 base
    case ProofKind::nonzero: return 11 * w;   // 5 squared + 1 base
    case ProofKind::dec_share: return 5 * w;  // 1 base + response over 2 squared
  }
  throw std::invalid_argument("proof_body_size: unknown kind");
}

Int fiat_shamir_challenge(const FsTranscript& tr, const Int& bound) {
  return tr.challenge(bound);
}

std::optional<ThreeSquares> decompose_three_squares(const Int& t, Rng& rng) {
  if (t < 0) return std::nullopt;
  if (t == 0) return ThreeSquares{0, 0, 0};
  Int m = t, scale = 1;
  while (mod(m, 4) == 0) {
    m /= 4;
    scale *= 2;
  }
  if (mod(m, 8) == 7) return std::nullopt;
  auto inner = (m <= 1000000) ? three_squares_exhaustive(m) : three_squares_randomized(m, rng);
  if (!inner) return std::nullopt;
  return ThreeSquares{inner->a * scale, inner->b * scale, inner->c * scale};
}

// --- product ---------------------------------------------------------------

namespace {
Int product_challenge(const PublicParams& pp, const Ciphertext& ex, const Ciphertext& ey,
                      const Ciphertext& ez, const Int& enc_m, const Int& enc_xm, Context ctx) {
  FsTranscript tr(kProductTag);
  tr.absorb_bytes(ctx);
  tr.absorb(pp.n);
  tr.absorb(ex.c);
  tr.absorb(ey.c);
  tr.absorb(ez.c);
  tr.absorb(enc_m);
  tr.absorb(enc_xm);
  return tr.challenge(kWideChallengeBound);
}
}  // namespace

ProductProof prove_product(const PublicParams& pp, const Ciphertext& ex, const Ciphertext& ey,
                           const Ciphertext& ez, const Int& y, const Int& gamma, const Int& nu,
                           Rng& rng, Context ctx) {
  Int m = rng.unit_mod(pp.n);
  Int theta = rng.unit_mod(pp.n);
  Int lambda = rng.unit_mod(pp.n);
  ProductProof pf;
  pf.enc_m = enc_residue(pp, m, theta).c;
  pf.enc_xm = mulm(powm(ex.c, m, pp.n2), powm(lambda, pp.n, pp.n2), pp.n2);
  Int e = product_challenge(pp, ex, ey, ez, pf.enc_m, pf.enc_xm, ctx);
  Int yhat = mod(y, pp.n);
  Int sum = m + e * yhat;
  pf.p = mod(sum, pp.n);
  Int t = (sum - pf.p) / pp.n;
  pf.w = mulm(theta, powm(gamma, e, pp.n2), pp.n2);
  pf.u = mulm(lambda, mulm(powm(ex.c, t, pp.n2), powm(nu, e, pp.n2), pp.n2), pp.n2);
  return pf;
}

bool verify_product(const PublicParams& pp, const Ciphertext& ex, const Ciphertext& ey,
                    const Ciphertext& ez, const ProductProof& pf, Context ctx) {
  try {
    if (!in_group(pp, ex.c) || !in_group(pp, ey.c) || !in_group(pp, ez.c)) return false;
    if (!in_group(pp, pf.enc_m) || !in_group(pp, pf.enc_xm)) return false;
    if (!in_group(pp, pf.w) || !in_group(pp, pf.u)) return false;
    if (pf.p < 0 || pf.p >= pp.n) return false;
    Int e = product_challenge(pp, ex, ey, ez, pf.enc_m, pf.enc_xm, ctx);
    Int lhs1 = mulm(g_pow(pp, pf.p), powm(pf.w, pp.n, pp.n2), pp.n2);
    Int rhs1 = mulm(pf.enc_m, powm(ey.c, e, pp.n2), pp.n2);
    if (lhs1 != rhs1) return false;
    Int lhs2 = mulm(powm(ex.c, pf.p, pp.n2), powm(pf.u, pp.n, pp.n2), pp.n2);
    Int rhs2 = mulm(pf.enc_xm, powm(ez.c, e, pp.n2), pp.n2);
    return lhs2 == rhs2;
  } catch (const std::exception&) {
    return false;
  }
}

Bytes ProductProof::serialize_body(const PublicParams& pp) const {
  size_t w = pp.base_width();
  Bytes out;
  append_be(out, enc_m, 2 * w);
  append_be(out, enc_xm, 2 * w);
  append_be(out, p, w);
  append_be(out, this->w, 2 * w);
  append_be(out, u, 2 * w);
  return out;
}

ProductProof ProductProof::parse_body(const PublicParams& pp, std::span<const std::uint8_t> in) {
  size_t w = pp.base_width();
  ByteReader rd(in);
  ProductProof pf;
  pf.enc_m = rd.take(2 * w);
  pf.enc_xm = rd.take(2 * w);
  pf.p = rd.take(w);
  pf.w = rd.take(2 * w);
  pf.u = rd.take(2 * w);
  if (!rd.done()) throw std::invalid_argument("product proof: trailing bytes");
  return pf;
}

// --- sign_bit --------------------------------------------------------------

namespace {
Int sign_bit_challenge(const PublicParams& pp, const Ciphertext& ex, const SignBitProof& pf,
                       Context ctx) {
  FsTranscript tr(kSignBitTag);
  tr.absorb_bytes(ctx);
  tr.absorb(pp.n);
  tr.absorb(ex.c);
  tr.absorb(pf.enc_m);
  tr.absorb(pf.enc_double_mx);
  tr.absorb(pf.enc_m_sq);
  return tr.challenge(kWideChallengeBound);
}
}  // namespace

SignBitProof prove_sign_bit(const PublicParams& pp, const Ciphertext& ex, const Int& x,
                            const Int& gamma, Rng& rng, Context ctx) {
  Int m = rng.unit_mod(pp.n);
  Int lambda = rng.unit_mod(pp.n);
  Int theta = rng.unit_mod(pp.n);
  Int nu = rng.unit_mod(pp.n);
  Int xhat = mod(x, pp.n);
  SignBitProof pf;
  pf.enc_m = enc_residue(pp, m, lambda).c;
  pf.enc_double_mx = enc_residue(pp, mod(2 * m * xhat, pp.n), theta).c;
  pf.enc_m_sq = enc_residue(pp, mod(m * m, pp.n), nu).c;
  Int e = sign_bit_challenge(pp, ex, pf, ctx);
  pf.p = mod(m + e * xhat, pp.n);
  pf.w = mulm(lambda, powm(gamma, e, pp.n2), pp.n2);
  pf.u = mulm(nu, powm(theta, e, pp.n2), pp.n2);
  return pf;
}

bool verify_sign_bit(const PublicParams& pp, const Ciphertext& ex, const SignBitProof& pf,
                     Context ctx) {
  try {
    if (!in_group(pp, ex.c) || !in_group(pp, pf.enc_m) || !in_group(pp, pf.enc_double_mx) ||
        !in_group(pp, pf.enc_m_sq) || !in_group(pp, pf.w) || !in_group(pp, pf.u))
      return false;
    if (pf.p < 0 || pf.p >= pp.n) return false;
    Int e = sign_bit_challenge(pp, ex, pf, ctx);
    Int lhs1 = mulm(g_pow(pp, pf.p), powm(pf.w, pp.n, pp.n2), pp.n2);
    Int rhs1 = mulm(pf.enc_m, powm(ex.c, e, pp.n2), pp.n2);
    if (lhs1 != rhs1) return false;
    // p^2 - e^2 = m^2 + e*(2mx) mod n exactly when x^2 = 1
    Int lhs2 = mulm(g_pow(pp, pf.p * pf.p - e * e), powm(pf.u, pp.n, pp.n2), pp.n2);
    Int rhs2 = mulm(pf.enc_m_sq, powm(pf.enc_double_mx, e, pp.n2), pp.n2);
    return lhs2 == rhs2;
  } catch (const std::exception&) {
    return false;
  }
}

Bytes SignBitProof::serialize_body(const PublicParams& pp) const {
  size_t w = pp.base_width();
  Bytes out;
  append_be(out, enc_m, 2 * w);
  append_be(out, enc_double_mx, 2 * w);
  append_be(out, enc_m_sq, 2 * w);
  append_be(out, p, w);
  append_be(out, this->w, 2 * w);
  append_be(out, u, 2 * w);
  return out;
}

SignBitProof SignBitProof::parse_body(const PublicParams& pp, std::span<const std::uint8_t> in) {
  size_t w = pp.base_width();
  ByteReader rd(in);
  SignBitProof pf;
  pf.enc_m = rd.take(2 * w);
  pf.enc_double_mx = rd.take(2 * w);
  pf.enc_m_sq = rd.take(2 * w);
  pf.p = rd.take(w);
  pf.w = rd.take(2 * w);
  pf.u = rd.take(2 * w);
  if (!rd.done()) throw std::invalid_argument("sign_bit proof: trailing bytes");
  return pf;
}

// --- range -----------------------------------------------------------------

namespace {

Int range_commit_hash(const Int& f0, const Int& f1, const Int& f2, const Int& f3, const Int& f) {
  FsTranscript tr(kRangeCommitTag);
  tr.absorb(f0);
  tr.absorb(f1);
  tr.absorb(f2);
  tr.absorb(f3);
  tr.absorb(f);
  return digest_to_int(tr.digest());
}

Int range_challenge(const PublicParams& pp, const Ciphertext& ex, const Int& bound,
                    const RangeProof& pf, Context ctx) {
  FsTranscript tr(kRangeTag);
  tr.absorb_bytes(ctx);
  tr.absorb(pp.n);
  tr.absorb(ex.c);
  tr.absorb(bound);
  tr.absorb(pf.enc_sq1);
  tr.absorb(pf.enc_sq2);
  tr.absorb(pf.enc_sq3);
  tr.absorb(pf.d);
  tr.absorb(pf.commit_hash);
  return tr.challenge(kRangeChallengeBound);
}

// E(B - x) derived publicly from the statement.
Int complement_ct(const PublicParams& pp, const Ciphertext& ex, const Int& bound) {
  return mulm(g_pow(pp, bound), invmod(ex.c, pp.n2), pp.n2);
}

}  // namespace

RangeProof prove_range(const PublicParams& pp, const Ciphertext& ex, const Int& x, const Int& r,
                       const Int& bound, Rng& rng, Context ctx) {
  if (bound < 1) throw std::domain_error("prove_range: empty range");
  if (x < 0 || x > bound) throw std::domain_error("prove_range: witness outside range");
  Int target = 4 * x * (bound - x) + 1;
  auto squares = decompose_three_squares(target, rng);
  if (!squares) throw std::runtime_error("prove_range: decomposition failed");

  const Int x0 = bound - x;
  const Int roots[3] = {squares->a, squares->b, squares->c};
  const Int resp_lo = bound * kRangeChallengeBound;          // B*C
  const Int resp_hi = resp_lo * kRangeSlack;                 // B*C*L
  const Int r0 = invmod(r, pp.n2);

  for (;;) {
    Int r_enc[3], s[4], m[4];
    RangeProof pf;
    Int enc_m[4];
    for (int i = 0; i < 3; ++i) r_enc[i] = rng.unit_mod(pp.n);
    for (int i = 0; i < 4; ++i) {
      s[i] = rng.unit_mod(pp.n);
      m[i] = rng.between(1, resp_hi);
    }
    pf.enc_sq1 = enc_residue(pp, roots[0], r_enc[0]).c;
    pf.enc_sq2 = enc_residue(pp, roots[1], r_enc[1]).c;
    pf.enc_sq3 = enc_residue(pp, roots[2], r_enc[2]).c;
    for (int i = 0; i < 4; ++i) enc_m[i] = enc_residue(pp, mod(m[i], pp.n), s[i]).c;
    Int rho = rng.unit_mod(pp.n);
    const Int* enc_roots[3] = {&pf.enc_sq1, &pf.enc_sq2, &pf.enc_sq3};
    Int d = powm(ex.c, 4 * m[0], pp.n2);
    for (int i = 0; i < 3; ++i) d = mulm(d, powm(*enc_roots[i], -m[i + 1], pp.n2), pp.n2);
    d = mulm(d, powm(rho, pp.n, pp.n2), pp.n2);
    pf.d = d;
    pf.commit_hash = range_commit_hash(enc_m[0], enc_m[1], enc_m[2], enc_m[3], d);
    Int e = range_challenge(pp, ex, bound, pf, ctx);

    Int p[4] = {m[0] + e * x0, m[1] + e * roots[0], m[2] + e * roots[1], m[3] + e * roots[2]};
    bool ok = true;
    for (int i = 0; i < 4; ++i) ok = ok && p[i] > resp_lo && p[i] <= resp_hi;
    if (!ok) continue;  // resample so responses stay statistically blinded

    pf.p0 = p[0];
    pf.p1 = p[1];
    pf.p2 = p[2];
    pf.p3 = p[3];
    pf.w0 = mulm(s[0], powm(r0, e, pp.n2), pp.n2);
    pf.w1 = mulm(s[1], powm(r_enc[0], e, pp.n2), pp.n2);
    pf.w2 = mulm(s[2], powm(r_enc[1], e, pp.n2), pp.n2);
    pf.w3 = mulm(s[3], powm(r_enc[2], e, pp.n2), pp.n2);
    Int tau = rho;
    for (int i = 0; i < 3; ++i) tau = mulm(tau, powm(r_enc[i], e * roots[i], pp.n2), pp.n2);
    tau = mulm(tau, powm(r, -4 * e * x0, pp.n2), pp.n2);
    pf.tau = tau;
    return pf;
  }
}

bool verify_range(const PublicParams& pp, const Ciphertext& ex, const Int& bound,
                  const RangeProof& pf, Context ctx) {
  try {
    if (bound < 1) return false;
    if (!in_group(pp, ex.c) || !in_group(pp, pf.enc_sq1) || !in_group(pp, pf.enc_sq2) ||
        !in_group(pp, pf.enc_sq3) || !in_group(pp, pf.d) || !in_group(pp, pf.w0) ||
        !in_group(pp, pf.w1) || !in_group(pp, pf.w2) || !in_group(pp, pf.w3) ||
        !in_group(pp, pf.tau))
      return false;
    const Int resp_cap = bound * kRangeChallengeBound * (kRangeSlack + 1);  // B*C*(L+1)
    const Int* ps[4] = {&pf.p0, &pf.p1, &pf.p2, &pf.p3};
    for (const Int* p : ps)
      if (*p < 0 || *p > resp_cap) return false;
    Int e = range_challenge(pp, ex, bound, pf, ctx);
    Int ex0 = complement_ct(pp, ex, bound);
    const Int* encs[4] = {&ex0, &pf.enc_sq1, &pf.enc_sq2, &pf.enc_sq3};
    const Int* ws[4] = {&pf.w0, &pf.w1, &pf.w2, &pf.w3};
    Int f[4];
    for (int i = 0; i < 4; ++i) {
      f[i] = mulm(mulm(g_pow(pp, *ps[i]), powm(*ws[i], pp.n, pp.n2), pp.n2),
                  powm(*encs[i], -e, pp.n2), pp.n2);
    }
    Int agg = mulm(powm(pf.tau, pp.n, pp.n2), g_pow(pp, e), pp.n2);
    agg = mulm(agg, powm(ex.c, 4 * pf.p0, pp.n2), pp.n2);
    agg = mulm(agg, powm(pf.enc_sq1, -pf.p1, pp.n2), pp.n2);
    agg = mulm(agg, powm(pf.enc_sq2, -pf.p2, pp.n2), pp.n2);
    agg = mulm(agg, powm(pf.enc_sq3, -pf.p3, pp.n2), pp.n2);
    return range_commit_hash(f[0], f[1], f[2], f[3], agg) == pf.commit_hash;
  } catch (const std::exception&) {
    return false;
  }
}

RangeProof prove_range_interval(const PublicParams& pp, const Ciphertext& ex, const Int& x,
                                const Int& r, const Int& lo, const Int& hi, Rng& rng,
                                Context ctx) {
  if (hi <= lo) throw std::domain_error("prove_range_interval: empty interval");
  Ciphertext shifted{mulm(ex.c, g_pow(pp, -lo), pp.n2)};
  return prove_range(pp, shifted, x - lo, r, hi - lo, rng, ctx);
}

bool verify_range_interval(const PublicParams& pp, const Ciphertext& ex, const Int& lo,
                           const Int& hi, const RangeProof& pf, Context ctx) {
  if (hi <= lo) return false;
  try {
    Ciphertext shifted{mulm(ex.c, g_pow(pp, -lo), pp.n2)};
    return verify_range(pp, shifted, hi - lo, pf, ctx);
  } catch (const std::exception&) {
    return false;
  }
}

Bytes RangeProof::serialize_body(const PublicParams& pp) const {
  size_t w = pp.base_width();
  Bytes out;
  append_be(out, enc_sq1, 2 * w);
  append_be(out, enc_sq2, 2 * w);
  append_be(out, enc_sq3, 2 * w);
  append_be(out, d, 2 * w);
  append_be(out, commit_hash, w);
  append_be(out, p0, w);
  append_be(out, p1, w);
  append_be(out, p2, w);
  append_be(out, p3, w);
  append_be(out, w0, 2 * w);
  append_be(out, w1, 2 * w);
  append_be(out, w2, 2 * w);
  append_be(out, w3, 2 * w);
  append_be(out, tau, 2 * w);
  return out;
}

RangeProof RangeProof::parse_body(const PublicParams& pp, std::span<const std::uint8_t> in) {
  size_t w = pp.base_width();
  ByteReader rd(in);
  RangeProof pf;
  pf.enc_sq1 = rd.take(2 * w);
  pf.enc_sq2 = rd.take(2 * w);
  pf.enc_sq3 = rd.take(2 * w);
  pf.d = rd.take(2 * w);
  pf.commit_hash = rd.take(w);
  pf.p0 = rd.take(w);
  pf.p1 = rd.take(w);
  pf.p2 = rd.take(w);
  pf.p3 = rd.take(w);
  pf.w0 = rd.take(2 * w);
  pf.w1 = rd.take(2 * w);
  pf.w2 = rd.take(2 * w);
  pf.w3 = rd.take(2 * w);
  pf.tau = rd.take(2 * w);
  if (!rd.done()) throw std::invalid_argument("range proof: trailing bytes");
  return pf;
}

// --- nonzero ---------------------------------------------------------------

namespace {
Int nonzero_challenge(const PublicParams& pp, const Ciphertext& ex, const NonZeroProof& pf,
                      Context ctx) {
  FsTranscript tr(kNonZeroTag);
  tr.absorb_bytes(ctx);
  tr.absorb(pp.n);
  tr.absorb(ex.c);
  tr.absorb(pf.enc_inv);
  tr.absorb(pf.enc_m);
  tr.absorb(pf.enc_xm);
  return tr.challenge(kWideChallengeBound);
}
}  // namespace

NonZeroProof prove_nonzero(const PublicParams& pp, const Ciphertext& ex, const Int& x,
                           const Int& r, Rng& rng, Context ctx) {
  Int xhat = mod(x, pp.n);
  Int y;
  if (xhat == 0 || mpz_invert(y.get_mpz_t(), xhat.get_mpz_t(), pp.n.get_mpz_t()) == 0)
    throw std::domain_error("prove_nonzero: value has no inverse");
  Int r_y = rng.unit_mod(pp.n);
  Int r_m = rng.unit_mod(pp.n);
  Int rho = rng.unit_mod(pp.n);
  Int m = rng.unit_mod(pp.n);
  NonZeroProof pf;
  pf.enc_inv = enc_residue(pp, y, r_y).c;
  pf.enc_m = enc_residue(pp, m, r_m).c;
  pf.enc_xm = mulm(powm(ex.c, m, pp.n2), powm(rho, pp.n, pp.n2), pp.n2);
  Int e = nonzero_challenge(pp, ex, pf, ctx);
  Int sum = m + e * y;
  pf.p = mod(sum, pp.n);
  pf.w = mulm(r_m, powm(r_y, e, pp.n2), pp.n2);
  // m - p = t*n - e*y, so r^(m-p) supplies exactly the correction factor
  pf.u = mulm(powm(r, m - pf.p, pp.n2), rho, pp.n2);
  return pf;
}

bool verify_nonzero(const PublicParams& pp, const Ciphertext& ex, const NonZeroProof& pf,
                    Context ctx) {
  try {
    if (!in_group(pp, ex.c) || !in_group(pp, pf.enc_inv) || !in_group(pp, pf.enc_m) ||
        !in_group(pp, pf.enc_xm) || !in_group(pp, pf.w) || !in_group(pp, pf.u))
      return false;
    if (pf.p < 0 || pf.p >= pp.n) return false;
    Int e = nonzero_challenge(pp, ex, pf, ctx);
    Int lhs1 = mulm(g_pow(pp, pf.p), powm(pf.w, pp.n, pp.n2), pp.n2);
    Int rhs1 = mulm(pf.enc_m, powm(pf.enc_inv, e, pp.n2), pp.n2);
    if (lhs1 != rhs1) return false;
    Int lhs2 = mulm(powm(ex.c, pf.p, pp.n2), powm(pf.u, pp.n, pp.n2), pp.n2);
    Int rhs2 = mulm(pf.enc_xm, g_pow(pp, e), pp.n2);
    return lhs2 == rhs2;
  } catch (const std::exception&) {
    return false;
  }
}

Bytes NonZeroProof::serialize_body(const PublicParams& pp) const {
  size_t w = pp.base_width();
  Bytes out;
  append_be(out, enc_inv, 2 * w);
  append_be(out, enc_m, 2 * w);
  append_be(out, enc_xm, 2 * w);
  append_be(out, p, w);
  append_be(out, this->w, 2 * w);
  append_be(out, u, 2 * w);
  return out;
}

NonZeroProof NonZeroProof::parse_body(const PublicParams& pp, std::span<const std::uint8_t> in) {
  size_t w = pp.base_width();
  ByteReader rd(in);
  NonZeroProof pf;
  pf.enc_inv = rd.take(2 * w);
  pf.enc_m = rd.take(2 * w);
  pf.enc_xm = rd.take(2 * w);
  pf.p = rd.take(w);
  pf.w = rd.take(2 * w);
  pf.u = rd.take(2 * w);
  if (!rd.done()) throw std::invalid_argument("nonzero proof: trailing bytes");
  return pf;
}

// --- dec_share -------------------------------------------------------------

namespace {
Int dec_share_challenge(const PublicParams& pp, const Ciphertext& c, const PartialDecryption& part,
                        const Int& a, const Int& b, Context ctx) {
  FsTranscript tr(kDecShareTag);
  tr.absorb_bytes(ctx);
  tr.absorb(pp.n);
  tr.absorb(pp.v);
  tr.absorb(Int(part.index));
  tr.absorb(pp.verification_keys.at(part.index - 1));
  tr.absorb(c.c);
  tr.absorb(part.value);
  tr.absorb(a);
  tr.absorb(b);
  return tr.challenge(kWideChallengeBound);
}
}  // namespace

DecShareProof prove_dec_share(const PublicParams& pp, const SecretKeyShare& share,
                              const Ciphertext& c, const PartialDecryption& part, Rng& rng,
                              Context ctx) {
  if (share.index != part.index) throw std::invalid_argument("prove_dec_share: index mismatch");
  Int r = rng.bits(static_cast<unsigned long>(dec_share_blind_bits(pp)));
  Int a = powm(c.c, 4 * r, pp.n2);
  Int b = powm(pp.v, r, pp.n2);
  DecShareProof pf;
  pf.e = dec_share_challenge(pp, c, part, a, b, ctx);
  pf.z = r + pf.e * pp.delta * share.s;
  return pf;
}

bool verify_dec_share(const PublicParams& pp, const Ciphertext& c, const PartialDecryption& part,
                      const DecShareProof& pf, Context ctx) {
  try {
    if (part.index < 1 || part.index > pp.parties) return false;
    if (!in_group(pp, c.c) || !in_group(pp, part.value)) return false;
    if (pf.e < 0 || pf.e >= kWideChallengeBound) return false;
    if (pf.z < 0 || bit_length(pf.z) > dec_share_blind_bits(pp) + 2) return false;
    const Int& vk = pp.verification_keys.at(part.index - 1);
    Int a = mulm(powm(c.c, 4 * pf.z, pp.n2), powm(part.value, -2 * pf.e, pp.n2), pp.n2);
    Int b = mulm(powm(pp.v, pf.z, pp.n2), powm(vk, -pf.e, pp.n2), pp.n2);
    return dec_share_challenge(pp, c, part, a, b, ctx) == pf.e;
  } catch (const std::exception&) {
    return false;
  }
}

Bytes DecShareProof::serialize_body(const PublicParams& pp) const {
  size_t w = pp.base_width();
  Bytes out;
  append_be(out, e, w);
  append_be(out, z, 4 * w);  // response spans two squared-width slots
  return out;
}

DecShareProof DecShareProof::parse_body(const PublicParams& pp, std::span<const std::uint8_t> in) {
  size_t w = pp.base_width();
  ByteReader rd(in);
  DecShareProof pf;
  pf.e = rd.take(w);
  pf.z = rd.take(4 * w);
  if (!rd.done()) throw std::invalid_argument("dec_share proof: trailing bytes");
  return pf;
}

ProvedPartial partial_decrypt_proved(const PublicParams& pp, const SecretKeyShare& share,
                                     const Ciphertext& c, Rng& rng, Context ctx) {
  ProvedPartial out;
  out.part = partial_decrypt(pp, share, c);
  out.proof = prove_dec_share(pp, share, c, out.part, rng, ctx);
  return out;
}

bool verify_proved_partial(const PublicParams& pp, const Ciphertext& c, const ProvedPartial& pd,
                           Context ctx) {
  return verify_dec_share(pp, c, pd.part, pd.proof, ctx);
}

}  // namespace ranksec
