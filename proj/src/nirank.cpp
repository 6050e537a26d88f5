#include "ranksec/nirank.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <utility>

#include "ranksec/fiat_shamir.hpp"
#include "ranksec/rank_core.hpp"

namespace ranksec {

namespace {

std::string worker_name(unsigned index) { return "worker " + std::to_string(index); }

Bytes proved_partial_payload(const PublicParams& pp, const ProvedPartial& pd) {
  Bytes out;
  append_be(out, pd.part.value, pp.squared_width());
  Bytes body = pd.proof.serialize_body(pp);
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

Bytes ciphertext_payload(const PublicParams& pp, const Ciphertext& c) {
  Bytes out;
  append_be(out, c.c, pp.squared_width());
  return out;
}

void append_ct(Bytes& out, const PublicParams& pp, const Ciphertext& c) {
  append_be(out, c.c, pp.squared_width());
}

void append_body(Bytes& out, const Bytes& body) { out.insert(out.end(), body.begin(), body.end()); }

// Uniform signed plaintext: the full space [-(n-1)/2, (n-1)/2], so a masked
// sum x + v is itself uniform and reveals nothing about x.
Int uniform_signed_plain(const PublicParams& pp, Rng& rng) {
  return rng.below(pp.n) - pp.max_plain();
}

}  // namespace

WorkerSet worker_set(const KeyMaterial& km) {
  WorkerSet ws;
  ws.pp = &km.params;
  ws.shares = km.shares;
  return ws;
}

Int ddec(const WorkerSet& ws, const Ciphertext& c, Rng& rng, Context ctx, MessageSink* sink,
         OpCounts* ops) {
  const PublicParams& pp = ws.params();
  if (ws.count() == 0) throw std::invalid_argument("ddec: no workers");
  std::vector<PartialDecryption> parts;
  parts.reserve(ws.count());
  for (const SecretKeyShare& share : ws.shares) {
    ProvedPartial pd = partial_decrypt_proved(pp, share, c, rng, ctx);
    if (ws.misbehavior.forge_partial == share.index) pd.part.value = rng.unit_mod(pp.n2);
    if (sink) sink->on_message(share.index, msg::ddec_share, proved_partial_payload(pp, pd));
    if (!verify_proved_partial(pp, c, pd, ctx))
      throw IdentifiableAbort(worker_name(share.index), "partial decryption proof rejected");
    parts.push_back(pd.part);
  }
  if (ops) ops->dec += 1;
  return to_signed(pp, combine(pp, parts));
}

std::vector<ReshareOutput> reshare(const WorkerSet& ws, const Ciphertext& c, Rng& rng, Context ctx,
                                   MessageSink* sink, OpCounts* ops) {
  const PublicParams& pp = ws.params();
  unsigned parties = ws.count();
  if (parties < 2) throw std::invalid_argument("reshare: needs at least two workers");

  FsTranscript tr("reshare/v1");
  tr.absorb_bytes(ctx);
  tr.absorb(c.c);

  std::vector<Encryption> masks;
  std::vector<Int> mask_values;
  Ciphertext masked = c;
  for (const SecretKeyShare& share : ws.shares) {
    Int v = uniform_signed_plain(pp, rng);
    Encryption ev = encrypt(pp, v, rng);
    if (sink) sink->on_message(share.index, msg::reshare_mask, ciphertext_payload(pp, ev.ct));
    tr.absorb(ev.ct.c);
    masked = hom_add(pp, masked, ev.ct);
    masks.push_back(ev);
    mask_values.push_back(v);
  }

  Int shifted = ddec(ws, masked, rng, ctx, sink, ops);
  tr.absorb(mod(shifted, pp.n));

  // Everyone re-encrypts the now-public masked value with the same
  // transcript-derived randomness, so the share ciphertexts agree bit for
  // bit without another broadcast.
  Int joint_r = 0;
  for (unsigned tries = 0;; ++tries) {
    joint_r = tr.challenge(pp.n - 2) + 1;
    if (gcd(joint_r, pp.n) == 1) break;
    tr.absorb(Int(tries));
  }
  Ciphertext public_recrypt = encrypt_with_randomness(pp, shifted, joint_r);

  std::vector<ReshareOutput> out;
  out.reserve(parties);
  for (unsigned i = 0; i < parties; ++i) {
    ReshareOutput ro;
    ro.party_index = ws.shares[i].index;
    if (i == 0) {
      ro.plain_share = mod(shifted - mask_values[0], pp.n);
      ro.enc_share = hom_sub(pp, public_recrypt, masks[0].ct);
      ro.rand = mulm(joint_r, invmod(masks[0].r, pp.n2), pp.n2);
    } else {
      ro.plain_share = mod(-mask_values[i], pp.n);
      ro.enc_share = Ciphertext{invmod(masks[i].ct.c, pp.n2)};
      ro.rand = invmod(masks[i].r, pp.n2);
    }
    out.push_back(std::move(ro));
  }
  return out;
}

Ciphertext shared_mul(const WorkerSet& ws, const Ciphertext& enc_theta,
                      std::span<const ReshareOutput> shares_delta, Rng& rng, Context ctx,
                      MessageSink* sink, OpCounts* ops) {
  const PublicParams& pp = ws.params();
  if (shares_delta.size() != ws.count())
    throw std::invalid_argument("shared_mul: one share per worker");
  Ciphertext acc;
  bool first = true;
  for (const ReshareOutput& sd : shares_delta) {
    Encryption part = hom_scalar_mul_rerand(pp, enc_theta, sd.plain_share, rng);
    ProductProof pf = prove_product(pp, enc_theta, sd.enc_share, part.ct, sd.plain_share, sd.rand,
                                    part.r, rng, ctx);
    if (ws.misbehavior.bad_mul_proof == sd.party_index) pf.p = mod(pf.p + 1, pp.n);
    if (sink) {
      Bytes payload;
      append_ct(payload, pp, part.ct);
      append_body(payload, pf.serialize_body(pp));
      sink->on_message(sd.party_index, msg::mul_part, payload);
    }
    if (!verify_product(pp, enc_theta, sd.enc_share, part.ct, pf, ctx))
      throw IdentifiableAbort(worker_name(sd.party_index),
                              "share multiplication proof rejected");
    acc = first ? part.ct : hom_add(pp, acc, part.ct);
    first = false;
  }
  if (ops) ops->cmul += 1;
  return acc;
}

namespace {

// Corrupt one proof of a chain step, chosen by slot; slots beyond what the
// step carries wrap onto the bundle.
void corrupt_chain_step(const PublicParams& pp, ChainStep& step, unsigned slot) {
  unsigned slots = step.link_r ? 7 : 5;
  switch (slot % slots) {
    case 0: step.bundle.r_range.p0 += 1; break;
    case 1: step.bundle.r_nonzero.p = mod(step.bundle.r_nonzero.p + 1, pp.n); break;
    case 2: step.bundle.sign_bit.p = mod(step.bundle.sign_bit.p + 1, pp.n); break;
    case 3: step.bundle.abs_product.p = mod(step.bundle.abs_product.p + 1, pp.n); break;
    case 4: step.bundle.abs_range.p1 += 1; break;
    case 5: step.link_r->p = mod(step.link_r->p + 1, pp.n); break;
    case 6: step.link_sign->p = mod(step.link_sign->p + 1, pp.n); break;
  }
}

void verify_chain_step(const PublicParams& pp, const ChainStep& step,
                       const Ciphertext* prev_run_r, const Ciphertext* prev_run_sign,
                       const Int& budget, Context ctx) {
  const ChainBundle& b = step.bundle;
  const std::string who = worker_name(step.worker);
  if (!verify_range_interval(pp, b.enc_r, -budget, budget, b.r_range, ctx))
    throw IdentifiableAbort(who, "contribution range proof rejected in preprocessing");
  if (!verify_nonzero(pp, b.enc_r, b.r_nonzero, ctx))
    throw IdentifiableAbort(who, "contribution nonzero proof rejected in preprocessing");
  if (!verify_sign_bit(pp, b.enc_sign, b.sign_bit, ctx))
    throw IdentifiableAbort(who, "sign bit proof rejected in preprocessing");
  if (!verify_product(pp, b.enc_sign, b.enc_r, b.enc_abs, b.abs_product, ctx))
    throw IdentifiableAbort(who, "sign-consistency product proof rejected in preprocessing");
  if (!verify_range(pp, b.enc_abs, budget, b.abs_range, ctx))
    throw IdentifiableAbort(who, "magnitude range proof rejected in preprocessing");
  if (prev_run_r) {
    if (!step.link_r || !step.link_sign)
      throw IdentifiableAbort(who, "missing chaining proofs in preprocessing");
    if (!verify_product(pp, *prev_run_r, b.enc_r, step.run_r, *step.link_r, ctx))
      throw IdentifiableAbort(who, "value chaining proof rejected in preprocessing");
    if (!verify_product(pp, *prev_run_sign, b.enc_sign, step.run_sign, *step.link_sign, ctx))
      throw IdentifiableAbort(who, "sign chaining proof rejected in preprocessing");
  } else if (!(step.run_r == b.enc_r) || !(step.run_sign == b.enc_sign)) {
    throw IdentifiableAbort(who, "running product does not start at the contribution");
  }
}

}  // namespace

std::vector<PrepTriple> prep_chain(const MaskingConfig& cfg, const WorkerSet& ws, unsigned count,
                                   Rng& rng, Context ctx, MessageSink* sink, OpCounts* ops) {
  const PublicParams& pp = ws.params();
  if (ws.count() < 2) throw std::invalid_argument("prep_chain: needs at least two workers");
  Int budget = per_party_bound(randomness_bound(pp.n, cfg.low, cfg.high), ws.count());

  std::vector<PrepTriple> out;
  out.reserve(count);
  for (unsigned t = 0; t < count; ++t) {
    PrepTriple triple;
    const Ciphertext* prev_r = nullptr;
    const Ciphertext* prev_sign = nullptr;
    for (const SecretKeyShare& share : ws.shares) {
      PartyRandomness pr = sample_party_randomness(cfg, budget, rng);
      Int rj = pr.value();
      Int phi(pr.sign);

      ChainStep step;
      step.worker = share.index;
      Encryption er = encrypt(pp, rj, rng);
      Encryption es = encrypt(pp, phi, rng);
      Encryption ea = hom_scalar_mul_rerand(pp, es.ct, rj, rng);
      Int abs_rand = mulm(powm(es.r, mod(rj, pp.n), pp.n2), ea.r, pp.n2);

      step.bundle.enc_r = er.ct;
      step.bundle.enc_sign = es.ct;
      step.bundle.enc_abs = ea.ct;
      step.bundle.r_range = prove_range_interval(pp, er.ct, rj, er.r, -budget, budget, rng, ctx);
      step.bundle.r_nonzero = prove_nonzero(pp, er.ct, rj, er.r, rng, ctx);
      step.bundle.sign_bit = prove_sign_bit(pp, es.ct, phi, es.r, rng, ctx);
      step.bundle.abs_product = prove_product(pp, es.ct, er.ct, ea.ct, rj, er.r, ea.r, rng, ctx);
      step.bundle.abs_range = prove_range(pp, ea.ct, pr.magnitude, abs_rand, budget, rng, ctx);

      if (prev_r) {
        Encryption nr = hom_scalar_mul_rerand(pp, *prev_r, rj, rng);
        Encryption nsgn = hom_scalar_mul_rerand(pp, *prev_sign, phi, rng);
        step.link_r = prove_product(pp, *prev_r, er.ct, nr.ct, rj, er.r, nr.r, rng, ctx);
        step.link_sign = prove_product(pp, *prev_sign, es.ct, nsgn.ct, phi, es.r, nsgn.r, rng, ctx);
        step.run_r = nr.ct;
        step.run_sign = nsgn.ct;
      } else {
        step.run_r = er.ct;
        step.run_sign = es.ct;
      }

      if (ws.misbehavior.bad_chain_proof == share.index)
        corrupt_chain_step(pp, step, ws.misbehavior.chain_slot);

      if (sink) {
        Bytes bundle;
        append_ct(bundle, pp, step.bundle.enc_r);
        append_ct(bundle, pp, step.bundle.enc_sign);
        append_ct(bundle, pp, step.bundle.enc_abs);
        append_body(bundle, step.bundle.r_range.serialize_body(pp));
        append_body(bundle, step.bundle.r_nonzero.serialize_body(pp));
        append_body(bundle, step.bundle.sign_bit.serialize_body(pp));
        append_body(bundle, step.bundle.abs_product.serialize_body(pp));
        append_body(bundle, step.bundle.abs_range.serialize_body(pp));
        sink->on_message(share.index, msg::prep_bundle, bundle);
        if (step.link_r) {
          Bytes link;
          append_ct(link, pp, step.run_r);
          append_ct(link, pp, step.run_sign);
          append_body(link, step.link_r->serialize_body(pp));
          append_body(link, step.link_sign->serialize_body(pp));
          sink->on_message(share.index, msg::prep_link, link);
        }
      }

      verify_chain_step(pp, step, prev_r, prev_sign, budget, ctx);
      triple.audit.push_back(std::move(step));
      prev_r = &triple.audit.back().run_r;
      prev_sign = &triple.audit.back().run_sign;
    }

    triple.enc_r = triple.audit.back().run_r;
    triple.enc_sign_r = triple.audit.back().run_sign;
    triple.shares_r = reshare(ws, triple.enc_r, rng, ctx, sink, ops);
    triple.shares_sign = reshare(ws, triple.enc_sign_r, rng, ctx, sink, ops);
    out.push_back(std::move(triple));
  }
  return out;
}

std::int64_t nirank_round(const WorkerSet& ws, std::span<const Ciphertext> enc_qs,
                          std::span<const PrepTriple> triples, std::int64_t offset, Rng& rng,
                          Context ctx, MessageSink* sink, OpCounts* ops) {
  const PublicParams& pp = ws.params();
  if (enc_qs.size() != triples.size())
    throw std::invalid_argument("nirank_round: one triple per user");
  if (enc_qs.empty()) throw std::invalid_argument("nirank_round: no users");

  std::vector<Ciphertext> signs;
  signs.reserve(enc_qs.size());
  for (size_t i = 0; i < enc_qs.size(); ++i) {
    Ciphertext masked = shared_mul(ws, enc_qs[i], triples[i].shares_r, rng, ctx, sink, ops);
    Int y = ddec(ws, masked, rng, ctx, sink, ops);
    if (y == 0)
      throw IdentifiableAbort("prep triple " + std::to_string(i + 1),
                              "masked comparison decrypted to zero");
    // phi(q) = phi(y) * phi(r): re-encrypt the public sign with randomness 1
    // (verifiable by recomputation) and multiply by the shared phi(r)
    Ciphertext enc_sign_y = encrypt_with_randomness(pp, (y > 0) ? Int(1) : Int(-1), 1);
    if (ops) ops->enc += 1;
    signs.push_back(shared_mul(ws, enc_sign_y, triples[i].shares_sign, rng, ctx, sink, ops));
  }

  unsigned adds = 0;
  Ciphertext agg = aggregate_signs(pp, signs, offset, &adds);
  if (ops) ops->cadd += adds;
  Int sum = ddec(ws, agg, rng, ctx, sink, ops);
  return sum.get_si();
}

// --- triple bank -----------------------------------------------------------

namespace {
constexpr std::uint8_t kBankMagic[4] = {'R', 'S', 'T', 'B'};
constexpr std::uint8_t kBankVersion = 1;
}  // namespace

const PrepTriple& TripleBank::take(unsigned user, unsigned round) {
  for (const auto& claim : claims_)
    if (claim.first == user && claim.second == round)
      throw std::logic_error("triple bank: (user, round) already served");
  if (next_ >= triples_.size()) throw std::runtime_error("triple bank exhausted");
  claims_.emplace_back(user, round);
  return triples_[next_++];
}

Bytes TripleBank::serialize(const PublicParams& pp) const {
  size_t w = pp.base_width(), w2 = pp.squared_width();
  Bytes out(kBankMagic, kBankMagic + 4);
  out.push_back(kBankVersion);
  unsigned parties = triples_.empty() ? 0 : static_cast<unsigned>(triples_[0].shares_r.size());
  append_be(out, Int(parties), 4);
  append_be(out, Int(pp.bits), 4);
  append_be(out, Int(static_cast<unsigned long>(triples_.size())), 8);
  auto put_share = [&](const ReshareOutput& ro) {
    append_be(out, Int(ro.party_index), 4);
    append_be(out, ro.plain_share, w);
    append_be(out, ro.enc_share.c, w2);
    append_be(out, ro.rand, w2);
  };
  for (const PrepTriple& t : triples_) {
    if (t.shares_r.size() != parties || t.shares_sign.size() != parties)
      throw std::invalid_argument("triple bank: inconsistent share counts");
    append_be(out, t.enc_r.c, w2);
    append_be(out, t.enc_sign_r.c, w2);
    for (const ReshareOutput& ro : t.shares_r) put_share(ro);
    for (const ReshareOutput& ro : t.shares_sign) put_share(ro);
  }
  return out;
}

TripleBank TripleBank::parse(const PublicParams& pp, std::span<const std::uint8_t> in) {
  size_t w = pp.base_width(), w2 = pp.squared_width();
  ByteReader rd(in);
  std::span<const std::uint8_t> magic = rd.take_raw(4);
  if (!std::equal(magic.begin(), magic.end(), kBankMagic))
    throw std::invalid_argument("triple bank: bad magic");
  if (rd.take_raw(1)[0] != kBankVersion)
    throw std::invalid_argument("triple bank: unsupported version");
  unsigned parties = static_cast<unsigned>(rd.take(4).get_ui());
  unsigned bits = static_cast<unsigned>(rd.take(4).get_ui());
  if (bits != pp.bits) throw std::invalid_argument("triple bank: modulus size mismatch");
  unsigned long count = rd.take(8).get_ui();
  auto get_share = [&]() {
    ReshareOutput ro;
    ro.party_index = static_cast<unsigned>(rd.take(4).get_ui());
    ro.plain_share = rd.take(w);
    ro.enc_share = Ciphertext{rd.take(w2)};
    ro.rand = rd.take(w2);
    return ro;
  };
  TripleBank bank;
  for (unsigned long i = 0; i < count; ++i) {
    PrepTriple t;
    t.enc_r = Ciphertext{rd.take(w2)};
    t.enc_sign_r = Ciphertext{rd.take(w2)};
    for (unsigned j = 0; j < parties; ++j) t.shares_r.push_back(get_share());
    for (unsigned j = 0; j < parties; ++j) t.shares_sign.push_back(get_share());
    bank.add(std::move(t));
  }
  if (!rd.done()) throw std::invalid_argument("triple bank: trailing bytes");
  return bank;
}

void TripleBank::save(const std::string& path, const PublicParams& pp) const {
  Bytes data = serialize(pp);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("triple bank: cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("triple bank: write failed for " + path);
}

TripleBank TripleBank::load(const std::string& path, const PublicParams& pp) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("triple bank: cannot open " + path);
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(pp, data);
}

}  // namespace ranksec
