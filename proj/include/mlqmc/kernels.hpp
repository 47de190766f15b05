#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace mlqmc {

/// Univariate kernels matched to the two sequence families, and the
/// multivariate product kernel built from them.
///
/// SI (shift-invariant) kernels pair with rank-1 lattices and depend on
/// (x - x') mod 1; they are scaled Bernoulli polynomials B_{2a} and span
/// weighted Korobov spaces of smoothness a. DSI (digitally-shift-invariant)
/// kernels pair with base-2 digital nets and depend on the XOR x ^ x' of the
/// binary expansions; the adaptive-smoothness variant takes a weighted sum
/// of the order-1..4 kernels with nonnegative weights beta.

enum class KernelFamily {
  si,           // Bernoulli B_{2 alpha}, lattice sequences
  dsi_weighted  // beta-weighted sum of order 1..4 digital kernels, nets
};

enum class SeqKind { lattice, net };

struct KernelParams {
  KernelFamily family = KernelFamily::si;
  int alpha = 1;                       // SI smoothness order, in {1,2,3,4}
  double gamma = 1.0;                  // global scale, > 0
  std::vector<double> eta;             // per-dimension scale, > 0
  double tau = 0.0;                    // constant prior mean
  std::array<double, 4> beta{1, 1, 1, 1};  // DSI smoothness weights, >= 0, not all 0

  void validate(int d) const;  // throws std::invalid_argument on bad values
};

/// Bernoulli polynomial B_p for p in {2,4,6,8}.
double bernoulli_poly(int p, double x);

/// SI kernel (-1)^{a+1} (2 pi)^{2a} / (2a)! * B_{2a}(x), x in [0,1).
double si_univariate(int alpha, double x);

/// DSI kernel of order alpha evaluated at a t-digit dyadic x (an XOR of two
/// net points). x == 0 returns the kernel's diagonal constant.
double dsi_univariate(int alpha, std::uint64_t x_bits, int t);

/// beta-weighted sum of the order 1..4 DSI kernels.
double dsi_weighted(const std::array<double, 4>& beta, std::uint64_t x_bits, int t);

/// First Gram column K[:,0] against the sequence origin. Shift cancellation
/// makes the column a function of the *unshifted* sequence only, so the
/// points passed here are the raw z_i:
///   lattice: entry i = gamma * prod_j (1 + eta_j * R(z_ij)),   z row-major n x d
///   net:     same with R = sum_a beta_a Rtilde_a(z_ij) on t-digit integers
/// The unscaled column (gamma = 1) is used by the posterior variance.
std::vector<double> kernel_column(const KernelParams& params, const double* z, int n,
                                  int d);
std::vector<double> kernel_column(const KernelParams& params, const std::uint64_t* z,
                                  int n, int d, int t);

/// Symmetric kernel evaluation between two shifted points (dense-path use:
/// oracles, PSD checks). Lattice points as doubles, net points as integers.
double kernel_eval(const KernelParams& params, const double* x, const double* y, int d);
double kernel_eval(const KernelParams& params, const std::uint64_t* x,
                   const std::uint64_t* y, int d, int t);

}  // namespace mlqmc
