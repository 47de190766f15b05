#pragma once

#include <complex>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "mlqmc/kernels.hpp"
#include "mlqmc/ld_sequences.hpp"

namespace mlqmc {

/// Gaussian-process algebra on low-discrepancy designs in radical-inverse
/// order. The Gram matrix of a matched (sequence, kernel) pair has the
/// eigendecomposition K = E diag(lambda) Ebar where Ebar is fftbr (lattices,
/// SI kernels) or fwht (nets, DSI kernels), so eigenvalues, solves, the
/// log-determinant, the NMLL and its gradient all cost O(n log n).

/// Raised when a fit is unusable: near-zero or negative eigenvalues, or a
/// quadratic form that is negative beyond rounding.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// lambda = sqrt(n) * Ebar K[:,0]. Throws FitError when any |lambda_i| falls
/// below 1e-14 * max |lambda| (ill-conditioned fit signal).
std::vector<std::complex<double>> eigenvalues_lattice(std::span<const double> kernel_col);
std::vector<double> eigenvalues_net(std::span<const double> kernel_col);

/// K^{-1} a = E (Ebar a ./ lambda). Real input, real output (the imaginary
/// residue of the lattice path is dropped).
std::vector<double> solve_lattice(std::span<const std::complex<double>> lambda,
                                  std::span<const double> a);
std::vector<double> solve_net(std::span<const double> lambda, std::span<const double> a);

struct CubatureResult {
  double mu_hat = 0.0;  // posterior cubature mean (= sample mean)
  double v_hat = 0.0;   // posterior cubature variance, >= 0
};

struct FitOptions {
  int max_iters = 40;     // descent iterations per fit
  double rel_tol = 1e-5;  // stop when relative NMLL improvement drops below
  double step = 0.15;     // Adam step size on the unconstrained parameters
  // Search box |log eta| <= x_bound (and softplus^-1 beta for nets). The raw
  // NMLL is unbounded below along degenerate directions (eta -> 0 or infinity
  // both collapse the posterior variance), so the search stays in a bounded
  // region around the scale-free initialization, as is standard for fast
  // Bayesian cubature.
  double x_bound = 3.0;
};

/// One level's fitted GP: the unshifted sequence (kernel side), the observed
/// integrand values at the shifted points (data side), eigenvalues, and the
/// running prefix sums of the kernel column that drive posterior and
/// projected variances. Each state is owned by a single fit routine; states
/// for different levels may be used concurrently.
class GpLevelState {
 public:
  GpLevelState(std::shared_ptr<const LatticeGen> gen, KernelParams params);
  GpLevelState(std::shared_ptr<const DigitalNetGen> gen, KernelParams params);

  SeqKind kind() const { return kind_; }
  int dim() const { return d_; }
  int count() const { return n_; }
  const KernelParams& params() const { return params_; }
  std::span<const double> values() const { return y_; }

  /// Replaces hyperparameters and invalidates cached factorizations.
  void set_params(KernelParams p);

  /// Appends integrand evaluations for sequence indices [n, n + k). The new
  /// total must remain a power of two.
  void append_values(std::span<const double> y_new);

  /// tau <- sample mean, gamma <- its closed-form minimizer, then bounded
  /// warm-started descent on log eta (and softplus-inverse beta for DSI).
  /// Returns the NMLL at the accepted iterate. Deterministic.
  double fit(const FitOptions& opts = {});

  /// Recomputes eigenvalues and transformed residuals for the current
  /// params without moving them; returns the NMLL.
  double refresh();

  bool fitted() const { return fitted_; }

  /// NMLL of the fitted state: sum_i log|lambda_i| + sum_i |ytilde_i|^2/lambda_i.
  double nmll() const;

  CubatureResult posterior_cubature() const;

  /// Posterior variance after hypothetically growing this level to n_hat
  /// points of the same (unshifted) sequence, hyperparameters frozen. Exact
  /// at powers of two, log-log linear interpolation in between. No integrand
  /// evaluations are made.
  double projected_variance(double n_hat);

  /// Eigenvalues of the scaled kernel (gamma included).
  std::vector<std::complex<double>> lambda_complex() const;
  std::vector<double> lambda_real() const;

  /// Times the posterior variance was clamped up to zero.
  int clamp_count() const { return clamp_count_; }

  /// Descent objective: the NMLL with tau fixed and gamma profiled out,
  /// n log(quad) + sum_i log|lambda_i|, and its gradient with respect to
  /// [log eta_j] and, for nets, [softplus^-1 beta_a]. Exposed so
  /// finite-difference checks can audit the implemented gradient.
  double profile_objective();
  std::vector<double> profile_gradient();

 private:
  struct Workspace {
    std::vector<double> r, buf_r, g, grad;
    std::vector<std::complex<double>> buf_c;
  };
  bool eval_profile(double& L, bool with_grad, Workspace& ws);

  void ensure_points(int n);
  void ensure_planes(int n);
  void rebuild_column(std::vector<double>& r) const;
  double transform_residuals();  // builds ytilde from y and params_.tau
  double eigen_refresh();        // lambda_u from the current column; returns quad_u
  void ensure_prefix_sums(int log2_n_hat);
  double variance_at_pow2(int q);

  SeqKind kind_;
  std::shared_ptr<const LatticeGen> lat_;
  std::shared_ptr<const DigitalNetGen> net_;
  KernelParams params_;
  std::vector<double> anchor_;  // construction-time unconstrained params; the
                                // fit's search box is anchored here so warm
                                // starts cannot drift without bound
  int d_ = 0;
  int n_ = 0;

  std::vector<double> y_;

  // unshifted sequence points, row-major, grown on demand
  std::vector<double> z_lat_;
  std::vector<std::uint64_t> z_net_;
  int z_count_ = 0;

  // per-order univariate kernel values R_alpha(z_ij), row-major n x d
  std::vector<double> plane_[4];
  int plane_count_ = 0;

  // fitted quantities (unscaled kernel, gamma = 1)
  std::vector<std::complex<double>> lambda_uc_;  // lattice
  std::vector<double> lambda_ur_;                // net
  std::vector<std::complex<double>> ytilde_c_;
  std::vector<double> ytilde_r_;
  double quad_u_ = 0.0;    // residual quadratic form at gamma = 1
  double logdet_u_ = 0.0;  // sum_i log |lambda_u_i|
  bool fitted_ = false;

  // prefix sums of the unscaled kernel column over the unshifted sequence,
  // sums_[p] = sum_{i < 2^p} r_i, valid for the current params
  std::vector<double> sums_;

  mutable int clamp_count_ = 0;
  mutable bool clamp_warned_ = false;
};

}  // namespace mlqmc
