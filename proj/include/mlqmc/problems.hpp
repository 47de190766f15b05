#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlqmc/estimators.hpp"

namespace mlqmc {

/// Test integrands and multilevel problems with reference values.

/// Inverse standard normal CDF (rational approximation refined by one Halley
/// step; absolute error far below 1e-9 on (0,1)).
double inv_normal_cdf(double p);
double normal_cdf(double x);
double normal_pdf(double x);

/// Single-level test functions on [0,1]^d, all centered to mean zero except
/// the Genz corner peak.
double sumxex(const double* x, int d);
double ridge_pl_sparse(const double* x, int d);
double ridge_jsu_sparse(const double* x, int d);
double genz_corner_peak2(const double* x, int d);

/// sparse ridge weights c_j = 2^-j / sqrt(sum 2^-2j'), equal weights d^-1/2
std::vector<double> ridge_weights(int d, bool sparse);

/// Mean of the Johnson SU ridge transform sinh(Z - 1), Z ~ N(0,1).
double jsu_mean();

/// Frozen oracle references (regenerate with `mlqmc-dev ref-oracle`):
/// randomized-QMC means over 32 independent scrambles of 2^18 net points.
double genz_cp2_d32_reference();
double elliptic_l4_reference();

/// Closed-form price of the discretely monitored geometric-average Asian
/// call under Black-Scholes, m monitoring times at j/m.
double geometric_asian_price(double s0, double strike, double rate, double sigma, int m);

/// PCA path factor for the Brownian covariance (min(j,j')/d): A = V sqrt(D)
/// with eigenvalues sorted descending; A A^T reproduces the covariance.
std::vector<double> brownian_factor(int d);  // row-major d x d

/// Option contract parameters; the experiments fix S0 = K = 100, r = 0.05,
/// sigma = 0.2 and exercise at time 1.
struct OptionParams {
  double s0 = 100.0;
  double strike = 100.0;
  double rate = 0.05;
  double sigma = 0.2;
};

/// Level evaluators (Q_l) for the option problems; level is 1-based with
/// d_l = 2^(2+l) monitoring times. x must hold d_l coordinates.
double asian_level(int level, const double* x, const OptionParams& params = {});
double lookback_level(int level, const double* x, const OptionParams& params = {});

/// Level-l elliptic PDE solution at u = 1/2 on a 2^l+1 point mesh with a
/// conservative stencil (cell conductivity = harmonic average of e^a by
/// two-point Gauss quadrature); x holds 8 coordinates.
double elliptic_level(int level, const double* x);

struct ProblemOptions {
  int d = 32;      // dimension of the single-level problems
  int levels = 0;  // 0 = problem default (options: 4 at desk scale, elliptic: 4)
};

/// Problem registry: sumxex, ridge_pl, ridge_jsu, genz_cp2 (single level,
/// reference values included), asian, lookback, elliptic (multilevel,
/// Y_l = Q_l - Q_{l-1}, costs proportional to 2^l with C_L = 1).
MlProblem make_problem(const std::string& id, const ProblemOptions& opts = {});

std::vector<std::string> problem_ids();

}  // namespace mlqmc
