#pragma once

// Non-interactive protocol machinery: distributed decryption with proved
// shares, additive resharing of an encrypted value, multiplication of a
// ciphertext by an additively shared scalar, the preprocessing chain that
// builds masking triples, and the online round that recovers each user's
// comparison sign from a masked decryption.
//
// All operations are deterministic given the caller's Rng.  Worker failures
// surface as IdentifiableAbort naming the culprit; an optional MessageSink
// observes every byte a worker would put on the wire, and an optional
// OpCounts tallies the protocol-level operations the cost model tracks.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ranksec/masking.hpp"
#include "ranksec/paillier.hpp"
#include "ranksec/sigma.hpp"

namespace ranksec {

// Thrown when a misbehaving party is caught; the culprit string names the
// actor ("worker 2", "user 5") and reason says which check failed.
class IdentifiableAbort : public std::runtime_error {
 public:
  IdentifiableAbort(std::string culprit_, std::string reason_)
      : std::runtime_error(culprit_ + ": " + reason_),
        culprit(std::move(culprit_)),
        reason(std::move(reason_)) {}

  std::string culprit;
  std::string reason;
};

// Protocol-level operation tally, one count per logical operation (a
// distributed decryption counts once, not once per worker).
struct OpCounts {
  unsigned long enc = 0;   // fresh encryptions
  unsigned long dec = 0;   // distributed decryptions
  unsigned long cmul = 0;  // ciphertext-by-shared-scalar multiplications
  unsigned long cadd = 0;  // ciphertext additions
};

// Wire message kinds emitted by workers; the sim reuses these as frame type
// bytes.
namespace msg {
constexpr std::uint8_t ddec_share = 0x10;    // partial value + proof
constexpr std::uint8_t reshare_mask = 0x11;  // E(v_j)
constexpr std::uint8_t mul_part = 0x12;      // E(theta*delta_j) + proof
constexpr std::uint8_t prep_bundle = 0x13;   // per-worker L2 bundle
constexpr std::uint8_t prep_link = 0x14;     // chaining proofs
}  // namespace msg

struct MessageSink {
  virtual ~MessageSink() = default;
  virtual void on_message(unsigned sender_worker, std::uint8_t kind, const Bytes& payload) = 0;
};

// Scripted worker corruption, all off by default.  Indices are 1-based; 0
// disables the behaviour.
struct WorkerMisbehavior {
  unsigned forge_partial = 0;    // ddec: send a random share instead of c^(2*delta*s)
  unsigned bad_mul_proof = 0;    // shared_mul: attach a junk product proof
  unsigned bad_chain_proof = 0;  // prep_chain: corrupt one proof of the L2 bundle
  unsigned chain_slot = 0;       // which of the seven chain proofs to corrupt
};

struct WorkerSet {
  const PublicParams* pp = nullptr;
  std::vector<SecretKeyShare> shares;  // all J shares, indices 1..J
  WorkerMisbehavior misbehavior;

  unsigned count() const { return static_cast<unsigned>(shares.size()); }
  const PublicParams& params() const { return *pp; }
};

WorkerSet worker_set(const KeyMaterial& km);

// Distributed decryption: every worker broadcasts a proved partial, all
// proofs are checked, the combination is returned as a signed plaintext.
Int ddec(const WorkerSet& ws, const Ciphertext& c, Rng& rng, Context ctx = {},
         MessageSink* sink = nullptr, OpCounts* ops = nullptr);

// One party's additive share of a reshared plaintext.  plain_share is the
// canonical residue mod n; the holder also keeps the randomness of its
// enc_share for later product proofs.
struct ReshareOutput {
  unsigned party_index = 0;
  Int plain_share;      // x_j with sum x_j = x (mod n)
  Ciphertext enc_share;  // E(x_j)
  Int rand;              // randomness of enc_share, known to the holder only
};

// Reshare E(x) into additive per-worker shares: each worker masks with a
// uniform v_j, the masked sum x + v is decrypted publicly, worker 1 takes
// (x + v) - v_1 and the rest take -v_j.  The public re-encryption of x + v
// uses transcript-derived randomness so everyone computes identical bytes.
std::vector<ReshareOutput> reshare(const WorkerSet& ws, const Ciphertext& c, Rng& rng,
                                   Context ctx = {}, MessageSink* sink = nullptr,
                                   OpCounts* ops = nullptr);

// E(theta * delta) from E(theta) and additive shares of delta: worker j
// publishes E(theta * delta_j) with a product proof against its published
// share ciphertext; the homomorphic product of all parts is the result.
Ciphertext shared_mul(const WorkerSet& ws, const Ciphertext& enc_theta,
                      std::span<const ReshareOutput> shares_delta, Rng& rng, Context ctx = {},
                      MessageSink* sink = nullptr, OpCounts* ops = nullptr);

// Per-worker proof bundle accompanying one chain contribution r_j: the
// contribution is nonzero, within the per-party budget, its claimed sign is
// a sign bit, and sign * value is a nonnegative in-budget product.
struct ChainBundle {
  Ciphertext enc_r;     // E(r_j)
  Ciphertext enc_sign;  // E(phi(r_j))
  Ciphertext enc_abs;   // E(phi(r_j) * r_j)
  RangeProof r_range;        // r_j in [-budget, budget]
  NonZeroProof r_nonzero;
  SignBitProof sign_bit;
  ProductProof abs_product;  // enc_abs = enc_sign^(r_j)
  RangeProof abs_range;      // phi(r_j) * r_j in [0, budget]
};

struct ChainStep {
  unsigned worker = 0;
  ChainBundle bundle;
  Ciphertext run_r;     // E(r_1 * ... * r_j)
  Ciphertext run_sign;  // E(phi(r_1) * ... * phi(r_j))
  // chaining proofs tying the running products to the previous step;
  // absent for the first worker
  std::optional<ProductProof> link_r;
  std::optional<ProductProof> link_sign;
};

// One precomputed masking triple: E(r) with r = prod r_j, E(phi(r)), and
// both reshared so the online round can multiply them into ciphertexts.
struct PrepTriple {
  Ciphertext enc_r;
  Ciphertext enc_sign_r;
  std::vector<ReshareOutput> shares_r;
  std::vector<ReshareOutput> shares_sign;
  std::vector<ChainStep> audit;  // verified chain, kept for inspection
};

// Offline phase: workers take turns multiplying their masked contribution
// into the running product, each step carrying the proof bundle above plus
// two chaining product proofs; the final pair is reshared.  cfg supplies
// the plaintext space the per-party budget is derived from.
std::vector<PrepTriple> prep_chain(const MaskingConfig& cfg, const WorkerSet& ws, unsigned count,
                                   Rng& rng, Context ctx = {}, MessageSink* sink = nullptr,
                                   OpCounts* ops = nullptr);

// Online round: per user, mask the comparison ciphertext with the triple's
// r (shared_mul), decrypt the masked value, re-encrypt its sign with fixed
// public randomness 1, and unmask the sign via the triple's phi(r) shares;
// aggregate all sign ciphertexts plus the rank offset (encrypted with
// randomness 1 when nonzero) and decrypt the sum.
std::int64_t nirank_round(const WorkerSet& ws, std::span<const Ciphertext> enc_qs,
                          std::span<const PrepTriple> triples, std::int64_t offset, Rng& rng,
                          Context ctx = {}, MessageSink* sink = nullptr, OpCounts* ops = nullptr);

// Triple store with deterministic (user, round) consumption and single-use
// bookkeeping.  Persists to a fixed-width binary file so the offline phase
// can run once, ahead of time; the audit chains are not persisted.
class TripleBank {
 public:
  void add(PrepTriple t) { triples_.push_back(std::move(t)); }
  size_t size() const { return triples_.size(); }
  size_t remaining() const { return triples_.size() - next_; }

  // Hands out triples in call order and rejects a repeated (user, round)
  // claim or an exhausted bank.
  const PrepTriple& take(unsigned user, unsigned round);

  void save(const std::string& path, const PublicParams& pp) const;
  static TripleBank load(const std::string& path, const PublicParams& pp);

  Bytes serialize(const PublicParams& pp) const;
  static TripleBank parse(const PublicParams& pp, std::span<const std::uint8_t> in);

 private:
  std::vector<PrepTriple> triples_;
  size_t next_ = 0;
  std::vector<std::pair<unsigned, unsigned>> claims_;
};

}  // namespace ranksec
