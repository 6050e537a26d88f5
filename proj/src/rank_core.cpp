#include "ranksec/rank_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace ranksec {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b, r = a % b;
  return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

HalfInt midpoint_guess(std::int64_t alpha, std::int64_t beta) {
  return HalfInt{2 * floor_div(alpha + beta, 2) + 1};
}

unsigned ceil_log2(std::uint64_t w) {
  unsigned b = 0;
  while ((std::uint64_t(1) << b) < w) ++b;
  return b;
}

}  // namespace

void SearchSpec::validate() const {
  if (high <= low) throw std::invalid_argument("search: range must contain at least two values");
  if (n_inputs == 0) throw std::invalid_argument("search: no inputs");
  if (rank && (*rank < 1 || *rank > static_cast<std::int64_t>(n_inputs)))
    throw std::invalid_argument("search: rank outside [1, N]");
  if (delta_tol < 0) throw std::invalid_argument("search: negative tolerance");
}

SearchState search_begin(const SearchSpec& spec) {
  spec.validate();
  HalfInt first;
  if (spec.rank) {
    std::int64_t base =
        floor_div((spec.high - spec.low) * *spec.rank, static_cast<std::int64_t>(spec.n_inputs)) +
        spec.low;
    // Keep the guess strictly inside (low, high): a top-rank cut would land
    // on the upper edge, where a comparison can exceed the range-proof bound
    // and a high verdict would not shrink the interval.
    if (base >= spec.high) base = spec.high - 1;
    first = HalfInt{2 * base + 1};
  } else {
    first = midpoint_guess(spec.low, spec.high);
  }
  return search_begin_at(spec, spec.low, spec.high, first);
}

SearchState search_begin_at(const SearchSpec& spec, std::int64_t alpha, std::int64_t beta,
                            HalfInt first_guess) {
  spec.validate();
  SearchState st;
  st.alpha = alpha;
  st.beta = beta;
  st.guess = first_guess;
  if (beta - alpha <= 2) {
    st.done = true;
    st.result = HalfInt::mid(alpha, beta).round_half_up();
  }
  return st;
}

std::int64_t aggregate_plain(std::span<const std::int64_t> xs, HalfInt guess,
                             const SearchSpec& spec) {
  std::int64_t z = 0;
  for (std::int64_t x : xs) z += (2 * x > guess.twice) ? 1 : -1;
  if (spec.rank) z += 2 * *spec.rank - static_cast<std::int64_t>(xs.size());
  return z;
}

SearchState search_step(const SearchSpec& spec, SearchState st, std::int64_t z) {
  if (st.done) throw std::logic_error("search_step: already finished");
  st.round += 1;
  if (std::llabs(z) <= spec.delta_tol) {
    st.done = true;
    st.result = st.guess.round_half_up();
    return st;
  }
  if (z > 0)
    st.alpha = st.guess.floor();
  else
    st.beta = st.guess.floor();
  if (st.beta - st.alpha <= 2) {
    st.done = true;
    st.result = HalfInt::mid(st.alpha, st.beta).round_half_up();
    return st;
  }
  st.guess = midpoint_guess(st.alpha, st.beta);
  return st;
}

unsigned max_rounds(const SearchSpec& spec) {
  unsigned b = ceil_log2(static_cast<std::uint64_t>(spec.high - spec.low));
  unsigned mid_bound = (b > 0) ? b - 1 : 0;
  // the rank-weighted first guess may land on the interval edge and shrink
  // nothing, costing one extra round over the midpoint bound
  return spec.rank ? mid_bound + 1 : mid_bound;
}

std::vector<HalfInt> speculative_guesses(const SearchState& st, unsigned depth) {
  std::vector<HalfInt> out;
  if (st.done) return out;
  struct Node {
    std::int64_t alpha, beta;
    HalfInt guess;
  };
  std::vector<Node> level = {{st.alpha, st.beta, st.guess}};
  out.push_back(st.guess);
  for (unsigned d = 0; d < depth; ++d) {
    std::vector<Node> next;
    for (const Node& node : level) {
      std::int64_t cut = node.guess.floor();
      // low branch: z < 0 moves beta down; high branch: z > 0 moves alpha up
      if (cut - node.alpha > 2) {
        Node child{node.alpha, cut, midpoint_guess(node.alpha, cut)};
        out.push_back(child.guess);
        next.push_back(child);
      }
      if (node.beta - cut > 2) {
        Node child{cut, node.beta, midpoint_guess(cut, node.beta)};
        out.push_back(child.guess);
        next.push_back(child);
      }
    }
    level = std::move(next);
  }
  return out;
}

PlainRunResult run_plain_search(const SearchSpec& spec, std::span<const std::int64_t> xs) {
  return run_plain_search_from(spec, search_begin(spec), xs);
}

PlainRunResult run_plain_search_from(const SearchSpec& spec, SearchState st,
                                     std::span<const std::int64_t> xs) {
  PlainRunResult out;
  while (!st.done) {
    std::int64_t z = aggregate_plain(xs, st.guess, spec);
    out.z_sequence.push_back(z);
    st = search_step(spec, st, z);
  }
  out.result = st.result;
  out.rounds = st.round;
  return out;
}

std::int64_t rank_oracle(std::vector<std::int64_t> xs, std::int64_t k) {
  if (k < 1 || k > static_cast<std::int64_t>(xs.size()))
    throw std::invalid_argument("rank_oracle: k outside [1, N]");
  std::nth_element(xs.begin(), xs.begin() + (k - 1), xs.end());
  return xs[k - 1];
}

std::int64_t median_oracle(std::vector<std::int64_t> xs) {
  if (xs.empty()) throw std::invalid_argument("median_oracle: empty input");
  // lower middle element for even sizes
  return rank_oracle(std::move(xs), (xs.size() + 1) / 2);
}

// --- moments ---------------------------------------------------------------

MomentsReport moments_from_sums(unsigned n, const Int& s1, const Int& s2, const Int& s3,
                                const Int& s4) {
  if (n == 0) throw std::invalid_argument("moments: no inputs");
  MomentsReport mr;
  mr.n = n;
  mr.s1 = s1;
  mr.s2 = s2;
  mr.s3 = s3;
  mr.s4 = s4;
  mpq_class qn(static_cast<unsigned long>(n));
  mpq_class m1(s1), m2(s2), m3(s3), m4(s4);
  m1 /= qn;
  m2 /= qn;
  m3 /= qn;
  m4 /= qn;
  mr.mean = m1;
  mr.variance = m2 - m1 * m1;
  mr.skew_num = m3 - 3 * m1 * m2 + 2 * m1 * m1 * m1;
  mr.kurt_num = m4 - 4 * m1 * m3 + 6 * m1 * m1 * m2 - 3 * m1 * m1 * m1 * m1;
  mr.mean.canonicalize();
  mr.variance.canonicalize();
  mr.skew_num.canonicalize();
  mr.kurt_num.canonicalize();
  mr.degenerate = (mr.variance == 0);
  if (!mr.degenerate) {
    mr.kurtosis = mr.kurt_num / (mr.variance * mr.variance);
    mr.kurtosis.canonicalize();
    mr.std_dev = std::sqrt(mr.variance.get_d());
    mr.skewness = mr.skew_num.get_d() / std::pow(mr.std_dev, 3.0);
  }
  return mr;
}

MomentsReport moments_plain(std::span<const std::int64_t> xs) {
  Int s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (std::int64_t v : xs) {
    Int x(v);
    s1 += x;
    s2 += x * x;
    s3 += x * x * x;
    s4 += x * x * x * x;
  }
  return moments_from_sums(static_cast<unsigned>(xs.size()), s1, s2, s3, s4);
}

MomentsInit init_range_from_moments(const MomentsReport& mr, std::int64_t low,
                                    std::int64_t high) {
  double mu = mr.mean.get_d();
  double sd = mr.degenerate ? 0.0 : mr.std_dev;
  MomentsInit init;
  init.alpha = std::max<double>(low, std::floor(mu - sd));
  init.beta = std::min<double>(high, std::ceil(mu + sd));
  if (init.beta <= init.alpha) {  // degenerate data still needs an interval
    init.alpha = std::max(low, init.alpha - 1);
    init.beta = std::min(high, init.alpha + 2);
  }
  init.first_guess = HalfInt{2 * static_cast<std::int64_t>(std::floor(mu)) + 1};
  return init;
}

// --- encrypted pieces ------------------------------------------------------

RegisteredInput register_input(const PublicParams& pp, const Encryption& enc_x, std::int64_t x,
                               std::int64_t low, std::int64_t high, Rng& rng, Context ctx) {
  RegisteredInput reg;
  reg.enc_x = enc_x.ct;
  reg.range_pf = prove_range_interval(pp, enc_x.ct, Int(x), enc_x.r, Int(low), Int(high), rng, ctx);
  return reg;
}

bool verify_registration(const PublicParams& pp, const RegisteredInput& reg, std::int64_t low,
                         std::int64_t high, Context ctx) {
  return verify_range_interval(pp, reg.enc_x, Int(low), Int(high), reg.range_pf, ctx);
}

Ciphertext compute_enc_q(const PublicParams& pp, const Ciphertext& enc_x, HalfInt guess,
                         std::int64_t eta) {
  Ciphertext scaled = hom_scalar_mul(pp, enc_x, Int(eta));
  return hom_sub(pp, scaled, encrypt_with_randomness(pp, scale_encode(guess, eta), 1));
}

SignSubmission make_submission(const PublicParams& pp, const Encryption& enc_x, std::int64_t x,
                               HalfInt guess, std::int64_t eta, std::int64_t low,
                               std::int64_t high, Rng& rng, Context ctx) {
  if (guess.is_integer())
    throw std::invalid_argument("make_submission: guess must be a half-odd point");
  Int q = Int(eta) * Int(x) - scale_encode(guess, eta);
  int sign = q > 0 ? 1 : -1;
  Int absq = abs(q);

  SignSubmission sub;
  sub.enc_q = compute_enc_q(pp, enc_x.ct, guess, eta);
  Int r_q = powm(enc_x.r, eta, pp.n2);

  Encryption enc_sign = encrypt(pp, sign, rng);
  sub.enc_sign = enc_sign.ct;

  Int qhat = mod(q, pp.n);
  Int nu = rng.unit_mod(pp.n);
  sub.enc_abs = Ciphertext{
      mulm(powm(enc_sign.ct.c, qhat, pp.n2), powm(nu, pp.n, pp.n2), pp.n2)};
  Int r_abs = mulm(powm(enc_sign.r, qhat, pp.n2), nu, pp.n2);

  sub.sign_pf = prove_sign_bit(pp, sub.enc_sign, sign, enc_sign.r, rng, ctx);
  sub.prod_pf = prove_product(pp, sub.enc_sign, sub.enc_q, sub.enc_abs, q, r_q, nu, rng, ctx);
  sub.abs_range_pf =
      prove_range(pp, sub.enc_abs, absq, r_abs, Int(eta) * Int(high - low), rng, ctx);
  sub.nonzero_pf = prove_nonzero(pp, sub.enc_abs, absq, r_abs, rng, ctx);
  return sub;
}

bool verify_submission(const PublicParams& pp, const Ciphertext& enc_x, HalfInt guess,
                       std::int64_t eta, std::int64_t low, std::int64_t high,
                       const SignSubmission& sub, Context ctx, std::string* why) {
  auto fail = [&](const char* reason) {
    if (why) *why = reason;
    return false;
  };
  if (!(compute_enc_q(pp, enc_x, guess, eta) == sub.enc_q))
    return fail("comparison ciphertext mismatch");
  if (!verify_sign_bit(pp, sub.enc_sign, sub.sign_pf, ctx)) return fail("sign proof rejected");
  if (!verify_product(pp, sub.enc_sign, sub.enc_q, sub.enc_abs, sub.prod_pf, ctx))
    return fail("product proof rejected");
  if (!verify_range(pp, sub.enc_abs, Int(eta) * Int(high - low), sub.abs_range_pf, ctx))
    return fail("range proof rejected");
  if (!verify_nonzero(pp, sub.enc_abs, sub.nonzero_pf, ctx)) return fail("nonzero proof rejected");
  return true;
}

Bytes SignSubmission::serialize(const PublicParams& pp) const {
  size_t w2 = pp.squared_width();
  Bytes out;
  append_be(out, enc_q.c, w2);
  append_be(out, enc_sign.c, w2);
  append_be(out, enc_abs.c, w2);
  Bytes part = sign_pf.serialize_body(pp);
  out.insert(out.end(), part.begin(), part.end());
  part = prod_pf.serialize_body(pp);
  out.insert(out.end(), part.begin(), part.end());
  part = abs_range_pf.serialize_body(pp);
  out.insert(out.end(), part.begin(), part.end());
  part = nonzero_pf.serialize_body(pp);
  out.insert(out.end(), part.begin(), part.end());
  return out;
}

SignSubmission SignSubmission::parse(const PublicParams& pp, std::span<const std::uint8_t> in) {
  size_t w2 = pp.squared_width();
  ByteReader rd(in);
  SignSubmission sub;
  sub.enc_q = Ciphertext{rd.take(w2)};
  sub.enc_sign = Ciphertext{rd.take(w2)};
  sub.enc_abs = Ciphertext{rd.take(w2)};
  sub.sign_pf = SignBitProof::parse_body(pp, rd.take_raw(proof_body_size(ProofKind::sign_bit, pp)));
  sub.prod_pf = ProductProof::parse_body(pp, rd.take_raw(proof_body_size(ProofKind::product, pp)));
  sub.abs_range_pf = RangeProof::parse_body(pp, rd.take_raw(proof_body_size(ProofKind::range, pp)));
  sub.nonzero_pf = NonZeroProof::parse_body(pp, rd.take_raw(proof_body_size(ProofKind::nonzero, pp)));
  if (!rd.done()) throw std::invalid_argument("submission: trailing bytes");
  return sub;
}

Ciphertext aggregate_signs(const PublicParams& pp, std::span<const Ciphertext> enc_signs,
                           std::int64_t offset, unsigned* hom_adds) {
  if (enc_signs.empty()) throw std::invalid_argument("aggregate_signs: nothing to aggregate");
  unsigned adds = 0;
  Ciphertext acc = enc_signs[0];
  for (size_t i = 1; i < enc_signs.size(); ++i) {
    acc = hom_add(pp, acc, enc_signs[i]);
    ++adds;
  }
  if (offset != 0) {
    acc = hom_add(pp, acc, encrypt_with_randomness(pp, Int(offset), 1));
    ++adds;
  }
  if (hom_adds) *hom_adds = adds;
  return acc;
}

PowerSubmission make_power_submission(const PublicParams& pp, const Encryption& enc_x,
                                      std::int64_t x, Rng& rng, Context ctx) {
  Int big(x);
  if (abs(big) * abs(big) * abs(big) * abs(big) > pp.max_plain())
    throw std::domain_error("power submission: fourth power leaves the plaintext range");
  PowerSubmission sub;
  sub.enc_x = enc_x.ct;
  Ciphertext prev = enc_x.ct;
  Ciphertext* outs[3] = {&sub.enc_x2, &sub.enc_x3, &sub.enc_x4};
  ProductProof* links[3] = {&sub.link2, &sub.link3, &sub.link4};
  for (int i = 0; i < 3; ++i) {
    Encryption next = hom_scalar_mul_rerand(pp, prev, big, rng);
    *outs[i] = next.ct;
    *links[i] = prove_product(pp, prev, enc_x.ct, next.ct, big, enc_x.r, next.r, rng, ctx);
    prev = next.ct;
  }
  return sub;
}

bool verify_power_submission(const PublicParams& pp, const PowerSubmission& sub, Context ctx,
                             std::string* why) {
  auto fail = [&](const char* reason) {
    if (why) *why = reason;
    return false;
  };
  if (!verify_product(pp, sub.enc_x, sub.enc_x, sub.enc_x2, sub.link2, ctx))
    return fail("square linkage proof rejected");
  if (!verify_product(pp, sub.enc_x2, sub.enc_x, sub.enc_x3, sub.link3, ctx))
    return fail("cube linkage proof rejected");
  if (!verify_product(pp, sub.enc_x3, sub.enc_x, sub.enc_x4, sub.link4, ctx))
    return fail("fourth power linkage proof rejected");
  return true;
}

Bytes PowerSubmission::serialize(const PublicParams& pp) const {
  size_t w2 = pp.squared_width();
  Bytes out;
  append_be(out, enc_x.c, w2);
  append_be(out, enc_x2.c, w2);
  append_be(out, enc_x3.c, w2);
  append_be(out, enc_x4.c, w2);
  for (const ProductProof* pf : {&link2, &link3, &link4}) {
    Bytes body = pf->serialize_body(pp);
    out.insert(out.end(), body.begin(), body.end());
  }
  return out;
}

PowerSubmission PowerSubmission::parse(const PublicParams& pp, std::span<const std::uint8_t> in) {
  size_t w2 = pp.squared_width();
  ByteReader rd(in);
  PowerSubmission sub;
  sub.enc_x = Ciphertext{rd.take(w2)};
  sub.enc_x2 = Ciphertext{rd.take(w2)};
  sub.enc_x3 = Ciphertext{rd.take(w2)};
  sub.enc_x4 = Ciphertext{rd.take(w2)};
  size_t body = proof_body_size(ProofKind::product, pp);
  sub.link2 = ProductProof::parse_body(pp, rd.take_raw(body));
  sub.link3 = ProductProof::parse_body(pp, rd.take_raw(body));
  sub.link4 = ProductProof::parse_body(pp, rd.take_raw(body));
  if (!rd.done()) throw std::invalid_argument("power submission: trailing bytes");
  return sub;
}

}  // namespace ranksec
