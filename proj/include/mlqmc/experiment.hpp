#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlqmc/estimators.hpp"

namespace mlqmc {

/// Configuration-driven experiment runner: trial batches of
/// {mc, rqmc, bqmc} x {lattice, net} across budgets, with medians, coverage,
/// and fitted error slopes. Output is a pure function of (config, seed).

enum class Method { mc, rqmc, bqmc };

std::string to_string(Method m);
std::string to_string(SeqKind k);

struct ExperimentConfig {
  std::string problem = "sumxex";
  int d = 32;      // single-level dimension
  int levels = 0;  // multilevel problems; 0 = problem default
  std::vector<Method> methods = {Method::mc, Method::rqmc, Method::bqmc};
  SeqKind sequence = SeqKind::net;
  std::vector<double> budgets;
  int trials = 50;
  int replications = 8;
  std::uint64_t seed = 0;
  std::int64_t n_init = 64;     // qmc methods
  std::int64_t n_init_mc = 64;  // iid mc
  int threads = 0;  // 0 = hardware concurrency
  std::string out_csv, out_json;
  // --check assertions: slope bounds per method and coverage floors
  std::map<std::string, double> checks;

  void validate() const;
};

/// Plain key = value text (see README for the schema); '#' starts a comment.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

struct TrialRecord {
  std::string problem;
  Method method = Method::mc;
  SeqKind sequence = SeqKind::net;
  double budget = 0.0;
  int trial = 0;
  double nu_hat = 0.0;
  double std_err = 0.0;
  std::optional<double> true_err;  // |nu_hat - reference| when a reference is known
  std::vector<std::int64_t> n_per_level;
  double total_cost = 0.0;
  double wall_time = 0.0;  // diagnostics only; excluded from the CSV
};

struct CellSummary {
  std::string problem;
  Method method = Method::mc;
  SeqKind sequence = SeqKind::net;
  double budget = 0.0;
  int trials = 0;
  double median_true_err = 0.0;  // NaN when no reference
  double median_std_err = 0.0;
  double coverage = 0.0;  // Pr(|err| <= 2 std_err); NaN when no reference
};

struct MethodSlopes {
  Method method = Method::mc;
  double true_err_slope = 0.0;  // least squares on (log2 N, log2 median err)
  double std_err_slope = 0.0;
};

struct ExperimentResult {
  std::vector<TrialRecord> records;
  std::vector<CellSummary> summaries;
  std::vector<MethodSlopes> slopes;
  bool checks_passed = true;
  std::vector<std::string> check_messages;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

std::vector<CellSummary> summarize(const std::vector<TrialRecord>& records);

/// Stable CSV of the deterministic record fields.
std::string csv_string(const std::vector<TrialRecord>& records);
void emit_csv(const std::vector<TrialRecord>& records, const std::string& path);
void emit_json(const ExperimentResult& result, const std::string& path);

}  // namespace mlqmc
