#pragma once

// Deterministic multi-actor simulation of both protocols.  Every exchanged
// message is serialized with the bit-exact wire codec and recorded as a
// frame (13-byte header plus payload), so byte accounting in the ledger is
// the real traffic, not an estimate.  Adversary scripts inject the threat
// model's misbehaviours; every scripted violation must surface as an
// IdentifiableAbort naming the culprit.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ranksec/fiat_shamir.hpp"
#include "ranksec/nirank.hpp"
#include "ranksec/rank_core.hpp"

namespace ranksec {

// --- configuration ---------------------------------------------------------

enum class Protocol { irank, nirank };

struct DataSource {
  enum class Kind { gaussian, explicit_list, per_user_datasets } kind = Kind::gaussian;
  double mu = 100.0;
  double sigma = 20.0;
  std::vector<std::int64_t> values;                      // explicit_list, one per user
  std::vector<std::vector<std::int64_t>> user_datasets;  // per-user multisets
};

struct SimConfig {
  unsigned users = 5;
  unsigned workers = 3;
  std::int64_t low = 0;
  std::int64_t high = 8;
  unsigned modulus_bits = 512;
  Protocol protocol = Protocol::irank;
  std::optional<std::int64_t> k;     // explicit target rank
  std::optional<double> percentile;  // maps to k = ceil(p * N / 100)
  std::int64_t delta_tol = 0;
  bool early_stop = false;       // forces delta_tol >= 1
  unsigned speculative_depth = 0;
  bool moments_init = false;
  bool verification_split = false;
  std::int64_t eta = 2;
  DataSource data;
  std::uint64_t seed = 1;
  unsigned trials = 1;

  void validate() const;
  // Number of registered inputs (Scenario-II datasets flatten to their
  // total element count).
  unsigned input_count() const;
  // The search rank: explicit k, else percentile, else plain median.
  std::optional<std::int64_t> resolve_rank(unsigned n_inputs) const;
};

// --- adversary scripts -----------------------------------------------------

struct AdversaryScript {
  enum class Action {
    invalid_proof,
    inconsistent_sign,
    out_of_range_input,
    early_quit,
    forged_partial_decryption,
  };
  bool worker = false;  // target class: user (false) or worker (true)
  unsigned target = 1;  // 1-based index within the class
  Action action = Action::invalid_proof;
  ProofKind kind = ProofKind::range;  // which proof invalid_proof corrupts
  unsigned quit_round = 1;            // early_quit: first round skipped (0 = never registers)
};

// Line-oriented key=value parsing: one script per line, e.g.
//   target=user:3 action=invalid_proof kind=range
//   target=worker:2 action=forged_partial_decryption
std::vector<AdversaryScript> parse_adversary_lines(const std::string& text);
std::vector<AdversaryScript> parse_adversary_file(const std::string& path);

// One dataset per line: "user=<id> values=<v1,v2,...>".
std::vector<std::vector<std::int64_t>> parse_scenario2_file(const std::string& path);

// --- ledger and report -----------------------------------------------------

constexpr unsigned kFrameHeaderBytes = 13;  // type u8 + sender u32 + round u32 + len u32

struct ActorTraffic {
  unsigned long messages = 0;
  unsigned long payload_bytes = 0;  // protocol payloads only
  unsigned long framed_bytes = 0;   // payloads plus frame headers
  unsigned long bytes_in = 0;       // payloads delivered to this actor
};

struct CostLedger {
  std::map<std::string, ActorTraffic> traffic;  // "user 3", "worker 1", "coordinator"
  std::vector<OpCounts> round_ops;              // per online round, Table-style accounting
  OpCounts setup_ops;                           // registration / moments / offline prep
  std::map<std::string, unsigned long> proofs_generated;  // by kind name
  std::map<std::string, unsigned long> proofs_verified;
};

struct AbortInfo {
  std::string culprit;
  std::string reason;
  unsigned round = 0;
};

struct RunReport {
  std::int64_t result = 0;
  std::int64_t true_value = 0;  // sorted-oracle value over registered inputs
  double abs_error = 0.0;
  unsigned rounds_used = 0;  // aggregation rounds
  unsigned comm_rounds = 0;  // submission exchanges (fewer when speculating)
  unsigned inputs_registered = 0;
  std::vector<std::int64_t> z_sequence;
  std::optional<AbortInfo> abort_info;
  bool degraded = false;  // an early quit reduced some round's input count
  std::vector<std::string> notes;
  MomentsReport moments;  // populated when moments_init ran
  bool has_moments = false;
  CostLedger ledger;
  Digest transcript_hash{};  // chained hash over all recorded frames
};

// Full cryptographic run.  A caller-supplied KeyMaterial skips the (slow)
// safe-prime generation; otherwise keys are derived from cfg.seed.
RunReport run_scenario(const SimConfig& cfg, std::span<const AdversaryScript> scripts = {},
                       const KeyMaterial* km = nullptr);

// --- round drivers (exposed for tests and the acceptance gate) -------------

struct SubmissionRecord {
  unsigned user = 0;  // 1-based
  Ciphertext enc_x;
  SignSubmission sub;
};

// Verify every submission, fold the signs plus the rank offset, decrypt via
// the workers.  Invalid submissions abort naming the user; invalid partial
// decryptions abort naming the worker.
std::int64_t aggregate_round(const WorkerSet& ws, std::span<const SubmissionRecord> subs,
                             HalfInt guess, std::int64_t eta, std::int64_t low, std::int64_t high,
                             std::int64_t offset, Rng& rng, Context ctx = {},
                             MessageSink* sink = nullptr, OpCounts* ops = nullptr);

// Verify the power chains, fold each power across users, decrypt the four
// sums, and evaluate the moment formulas in exact rational arithmetic.
MomentsReport moments_protocol(const WorkerSet& ws, std::span<const PowerSubmission> subs,
                               Rng& rng, Context ctx = {}, MessageSink* sink = nullptr,
                               OpCounts* ops = nullptr);

// Workload splitting: submission i is verified by worker (i mod J) + 1,
// which signs its batch of verdicts; the cross-check re-verifies everything
// and names any worker whose signed batch hides an invalid proof.
// derelict_worker (tests only) makes that worker rubber-stamp its batch.
struct SplitReport {
  std::vector<unsigned> assigned_worker;   // per submission, 1-based
  std::vector<bool> verified;              // recorded verdicts
  std::vector<std::string> batch_signatures;  // per worker, over its verdicts
  std::optional<std::string> derelict;     // set by the cross-check
};
SplitReport verification_split(const PublicParams& pp, std::span<const SubmissionRecord> subs,
                               HalfInt guess, std::int64_t eta, std::int64_t low,
                               std::int64_t high, unsigned workers, Context ctx = {},
                               unsigned derelict_worker = 0);

// --- accuracy experiment ---------------------------------------------------

struct AccuracyResult {
  unsigned users = 0;
  double mu = 0.0;
  unsigned trials = 0;
  std::vector<double> sigmas;
  std::vector<int> percentiles;
  std::vector<std::vector<double>> mae;  // [sigma][percentile]
  double seconds = 0.0;
};

// Gaussian inputs clamped to [low, high]; rank k = ceil(p * N / 100).
// The default plaintext mirror runs the search logic over the raw samples
// and reports |result - k-th raw sample|, so the measured error is the
// quantization of the answer to the integer grid.  full_crypto rounds the
// samples (the ciphertext space is integral), routes every trial through
// run_scenario, measures against the rounded oracle, and is only practical
// for small configurations.
AccuracyResult run_accuracy_experiment(const SimConfig& base, std::span<const double> sigmas,
                                       std::span<const int> percentiles, unsigned trials,
                                       bool full_crypto = false, const KeyMaterial* km = nullptr);

// --- cost accounting -------------------------------------------------------

struct CostRow {
  std::string item;
  double measured_kb = 0.0;
  double expected_kb = 0.0;
  bool match = false;
  std::string note;
};

struct CostReport {
  std::vector<CostRow> rows;
  unsigned rounds = 0;
};

// Compare the ledger against the protocol cost formulas (per-user outbound
// payload, per-worker outbound payload, per-round operation counts).
CostReport account_costs(const RunReport& report, const SimConfig& cfg);

// --- stable-ordered serialization ------------------------------------------

std::string report_to_json(const RunReport& report);
std::string report_to_csv(const RunReport& report);
std::string accuracy_to_json(const AccuracyResult& acc);
std::string accuracy_to_csv(const AccuracyResult& acc);
std::string costs_to_json(const CostReport& costs);
std::string costs_to_csv(const CostReport& costs);

}  // namespace ranksec
