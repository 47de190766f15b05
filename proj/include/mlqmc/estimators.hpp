#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlqmc/fast_gp.hpp"
#include "mlqmc/kernels.hpp"
#include "mlqmc/ld_sequences.hpp"
#include "mlqmc/rng.hpp"

namespace mlqmc {

/// A fixed-L multilevel problem: per-level difference evaluators
/// Y_l = Q_l - Q_{l-1}, costs normalized so C_L = 1, nondecreasing
/// per-level dimensions, and an optional reference value for true errors.
struct MlProblem {
  std::string name;
  int levels = 1;
  std::vector<double> costs;  // C_1..C_L, all > 0, C_L = 1
  std::vector<int> dims;      // d_1 <= ... <= d_L
  std::function<double(int level, const double* x)> eval;  // level is 1-based
  std::optional<double> reference;

  int dim_max() const { return dims.back(); }
  void validate() const;
};

struct MlEstimate {
  double nu_hat = 0.0;
  double std_err = 0.0;
  std::vector<std::int64_t> n_per_level;  // evaluations per level (R*n_l for RQMC)
  double total_cost = 0.0;                 // sum of C_l * evaluations
  std::vector<double> mu_level;            // per-level mean estimates
  std::vector<double> var_level;           // per-level variance diagnostics
};

struct McOptions {
  std::int64_t n_init = 64;
};

/// Iterative-doubling multilevel Monte Carlo with IID points: doubles the
/// level maximizing sigma_l^2 / (n_l C_l) until no level fits in the budget.
MlEstimate run_mc(const MlProblem& problem, double budget, const McOptions& opts,
                  RngStream rng);

struct RqmcOptions {
  std::int64_t n_init = 64;
  int replications = 8;  // R
  SeqKind kind = SeqKind::net;
  // generator overrides; the embedded defaults are used when null
  const LatticeGen* lattice = nullptr;
  const DigitalNetGen* net = nullptr;
};

/// Multilevel QMC with R independent randomizations per level (lattice:
/// random mod-1 shift; net: linear matrix scramble plus digital shift).
/// Lattice integrands are evaluated through the periodizing tent transform.
MlEstimate run_rqmc(const MlProblem& problem, double budget, const RqmcOptions& opts,
                    RngStream rng);

struct BqmcOptions {
  std::int64_t n_init = 64;
  SeqKind kind = SeqKind::net;
  const LatticeGen* lattice = nullptr;
  const DigitalNetGen* net = nullptr;
  FitOptions fit;
  // test hook: per-level shifts override the stream-drawn ones
  const std::vector<LatticeShift>* fixed_lattice_shifts = nullptr;
  const std::vector<DigitalShift>* fixed_digital_shifts = nullptr;
};

/// Fast Bayesian multilevel QMC without replications: one shifted sequence
/// and one GP per level, doubling the level chosen by the projected-variance
/// rule; the standard error is sqrt(sum_l V_l) under independent level GPs.
MlEstimate run_bqmc(const MlProblem& problem, double budget, const BqmcOptions& opts,
                    RngStream rng);

/// One level's view for the selection rule: its doubling cost and its
/// projected posterior variance as a function of a hypothetical sample size.
struct LevelForSelect {
  int level = 0;  // 1-based id returned by the selection
  double cost = 1.0;
  std::int64_t n = 0;
  std::function<double(double n_hat)> projected_variance;
};

/// Projected-variance level selection: walks the feasible levels in
/// non-increasing doubling-cost order and keeps the candidate whose equal
/// cost increment buys the larger variance decrease (ties go to the
/// challenger).
int level_select_bqmc(std::span<const LevelForSelect> feasible);

}  // namespace mlqmc
