// Command-line front end: run a full scenario, sweep accuracy, account
// costs, or precompute a masking-triple bank.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ranksec/nirank.hpp"
#include "ranksec/sim.hpp"

namespace {

using namespace ranksec;

std::pair<std::int64_t, std::int64_t> parse_range(const std::string& s) {
  auto colon = s.find(':');
  if (colon == std::string::npos)
    throw CLI::ValidationError("--range", "expected LO:HI, got '" + s + "'");
  return {std::stoll(s.substr(0, colon)), std::stoll(s.substr(colon + 1))};
}

std::vector<std::int64_t> parse_int_list(const std::string& s) {
  std::vector<std::int64_t> out;
  std::istringstream in(s);
  std::string piece;
  while (std::getline(in, piece, ',')) out.push_back(std::stoll(piece));
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string piece;
  while (std::getline(in, piece, ',')) out.push_back(std::stod(piece));
  return out;
}

struct CommonOpts {
  unsigned users = 5;
  unsigned workers = 3;
  unsigned bits = 512;
  std::string range = "0:8";
  std::string protocol = "irank";
  std::int64_t k = 0;          // 0 = unset
  double percentile = 0.0;     // 0 = unset
  std::int64_t delta = 0;
  std::vector<std::string> opt;
  std::uint64_t seed = 1;
  unsigned trials = 1;
  std::string data_list;
  std::string gaussian;  // MU:SIGMA
  std::string scenario2;
  std::string adversary;
  std::string out = "json";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--users", o.users, "number of input parties");
  cmd->add_option("--workers", o.workers, "number of computation servers");
  cmd->add_option("--range", o.range, "input range LO:HI");
  cmd->add_option("--bits", o.bits, "modulus size (512, 1024, 1536, 2048)");
  cmd->add_option("--protocol", o.protocol, "irank or nirank")
      ->check(CLI::IsMember({"irank", "nirank"}));
  cmd->add_option("--k", o.k, "target rank (1-based)");
  cmd->add_option("--percentile", o.percentile, "target percentile in (0, 100]");
  cmd->add_option("--delta", o.delta, "early-stop tolerance on |z|");
  cmd->add_option("--opt", o.opt,
                  "optimizations: early_stop, speculate:<depth>, moments, split (repeatable)");
  cmd->add_option("--seed", o.seed, "deterministic seed");
  cmd->add_option("--trials", o.trials, "trial count where applicable");
  cmd->add_option("--data", o.data_list, "explicit inputs, one per user (comma-separated)");
  cmd->add_option("--gaussian", o.gaussian, "gaussian inputs MU:SIGMA");
  cmd->add_option("--scenario2", o.scenario2, "per-user dataset file (user=i values=...)");
  cmd->add_option("--adversary", o.adversary, "adversary script file");
  cmd->add_option("--out", o.out, "output format")->check(CLI::IsMember({"json", "csv"}));
}

SimConfig build_config(const CommonOpts& o) {
  SimConfig cfg;
  cfg.users = o.users;
  cfg.workers = o.workers;
  std::tie(cfg.low, cfg.high) = parse_range(o.range);
  cfg.modulus_bits = o.bits;
  cfg.protocol = (o.protocol == "nirank") ? Protocol::nirank : Protocol::irank;
  if (o.k > 0) cfg.k = o.k;
  if (o.percentile > 0.0) cfg.percentile = o.percentile;
  cfg.delta_tol = o.delta;
  cfg.seed = o.seed;
  cfg.trials = o.trials;
  for (const std::string& opt : o.opt) {
    if (opt == "early_stop") {
      cfg.early_stop = true;
    } else if (opt.rfind("speculate:", 0) == 0) {
      cfg.speculative_depth = static_cast<unsigned>(std::stoul(opt.substr(10)));
    } else if (opt == "moments") {
      cfg.moments_init = true;
    } else if (opt == "split") {
      cfg.verification_split = true;
    } else {
      throw CLI::ValidationError("--opt", "unknown optimization '" + opt + "'");
    }
  }
  if (!o.scenario2.empty()) {
    cfg.data.kind = DataSource::Kind::per_user_datasets;
    cfg.data.user_datasets = parse_scenario2_file(o.scenario2);
    cfg.users = static_cast<unsigned>(cfg.data.user_datasets.size());
  } else if (!o.data_list.empty()) {
    cfg.data.kind = DataSource::Kind::explicit_list;
    cfg.data.values = parse_int_list(o.data_list);
    cfg.users = static_cast<unsigned>(cfg.data.values.size());
  } else {
    cfg.data.kind = DataSource::Kind::gaussian;
    if (!o.gaussian.empty()) {
      auto colon = o.gaussian.find(':');
      if (colon == std::string::npos)
        throw CLI::ValidationError("--gaussian", "expected MU:SIGMA");
      cfg.data.mu = std::stod(o.gaussian.substr(0, colon));
      cfg.data.sigma = std::stod(o.gaussian.substr(colon + 1));
    } else {
      cfg.data.mu = (cfg.low + cfg.high) / 2.0;
      cfg.data.sigma = (cfg.high - cfg.low) / 6.0;
    }
  }
  return cfg;
}

RunReport run_from_opts(const CommonOpts& o) {
  SimConfig cfg = build_config(o);
  std::vector<AdversaryScript> scripts;
  if (!o.adversary.empty()) scripts = parse_adversary_file(o.adversary);
  return run_scenario(cfg, scripts);
}

int cmd_run(const CommonOpts& o) {
  RunReport rep = run_from_opts(o);
  std::cout << (o.out == "csv" ? report_to_csv(rep) : report_to_json(rep)) << "\n";
  return 0;
}

int cmd_costs(const CommonOpts& o) {
  SimConfig cfg = build_config(o);
  std::vector<AdversaryScript> scripts;
  if (!o.adversary.empty()) scripts = parse_adversary_file(o.adversary);
  RunReport rep = run_scenario(cfg, scripts);
  CostReport costs = account_costs(rep, cfg);
  std::cout << (o.out == "csv" ? costs_to_csv(costs) : costs_to_json(costs)) << "\n";
  return 0;
}

int cmd_accuracy(const CommonOpts& o, const std::string& sigmas_s,
                 const std::string& percentiles_s, bool full_crypto) {
  SimConfig cfg = build_config(o);
  std::vector<double> sigmas = parse_double_list(sigmas_s);
  std::vector<double> pcts_d = parse_double_list(percentiles_s);
  std::vector<int> percentiles(pcts_d.begin(), pcts_d.end());
  AccuracyResult acc =
      run_accuracy_experiment(cfg, sigmas, percentiles, o.trials, full_crypto);
  std::cout << (o.out == "csv" ? accuracy_to_csv(acc) : accuracy_to_json(acc)) << "\n";
  return 0;
}

int cmd_prep(const CommonOpts& o, unsigned count, const std::string& bank_path) {
  auto [low, high] = parse_range(o.range);
  Rng rng(o.seed);
  KeyMaterial km = keygen(o.bits, o.workers, rng);
  MaskingConfig mcfg;
  mcfg.low = Int(low);
  mcfg.high = Int(high);
  WorkerSet ws = worker_set(km);
  OpCounts ops;
  std::vector<PrepTriple> triples = prep_chain(mcfg, ws, count, rng, {}, nullptr, &ops);
  TripleBank bank;
  for (PrepTriple& t : triples) bank.add(std::move(t));
  Bytes blob = bank.serialize(km.params);
  if (!bank_path.empty()) bank.save(bank_path, km.params);
  std::cout << "{\n  \"triples\": " << count << ",\n  \"workers\": " << o.workers
            << ",\n  \"bits\": " << o.bits << ",\n  \"bank_bytes\": " << blob.size()
            << ",\n  \"encryptions\": " << ops.enc << ",\n  \"decryptions\": " << ops.dec
            << "\n}\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rank-statistic protocol simulator"};
  app.require_subcommand(1);

  CommonOpts run_o, costs_o, acc_o, prep_o;
  std::string sigmas = "10,20,30,40,50";
  std::string percentiles = "25,50,90";
  bool full_crypto = false;
  unsigned prep_count = 10;
  std::string bank_path;

  CLI::App* run = app.add_subcommand("run", "execute one scenario end to end");
  add_common(run, run_o);

  CLI::App* costs = app.add_subcommand("costs", "run a scenario and report its cost accounting");
  add_common(costs, costs_o);

  CLI::App* accuracy = app.add_subcommand("accuracy", "sweep accuracy over sigma x percentile");
  add_common(accuracy, acc_o);
  accuracy->add_option("--sigmas", sigmas, "comma-separated sigma values");
  accuracy->add_option("--percentiles", percentiles, "comma-separated percentiles");
  accuracy->add_flag("--full-crypto", full_crypto,
                     "run every trial through the encrypted protocol (slow)");

  CLI::App* prep = app.add_subcommand("prep", "precompute a masking-triple bank");
  add_common(prep, prep_o);
  prep->add_option("--count", prep_count, "number of triples");
  prep->add_option("--bank", bank_path, "output file for the serialized bank");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_o);
    if (costs->parsed()) return cmd_costs(costs_o);
    if (accuracy->parsed()) return cmd_accuracy(acc_o, sigmas, percentiles, full_crypto);
    if (prep->parsed()) return cmd_prep(prep_o, prep_count, bank_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
