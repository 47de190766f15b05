#include "mlqmc/kernels.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace mlqmc {

namespace {

constexpr double kTwoPiSq = 19.739208802178716;  // 2 pi^2

// Diagonal values R(0) of the digital kernels. Order 1 is the limit of the
// kernel formula; orders 2..4 are the Walsh-coefficient sums
// sum_{k>=1} 2^{-mu_alpha(k)} (see mlqmc-dev dsi-diag), which the closed
// forms below reach in the x -> 0 limit:
//   r_2(0) = 3/2, r_3(0) = 25/18, r_4(0) = 407/294.
constexpr double kDsiDiag[4] = {1.0, 1.5, 25.0 / 18.0, 407.0 / 294.0};

}  // namespace

void KernelParams::validate(int d) const {
  if (!(gamma > 0.0)) throw std::invalid_argument("kernel gamma must be positive");
  if (static_cast<int>(eta.size()) != d)
    throw std::invalid_argument("kernel eta dimension mismatch");
  for (double e : eta)
    if (!(e > 0.0)) throw std::invalid_argument("kernel eta entries must be positive");
  if (family == KernelFamily::si) {
    if (alpha < 1 || alpha > 4) throw std::invalid_argument("SI order alpha must be in {1,2,3,4}");
  } else {
    double sum = 0.0;
    for (double b : beta) {
      if (!(b >= 0.0)) throw std::invalid_argument("DSI beta weights must be nonnegative");
      sum += b;
    }
    if (!(sum > 0.0)) throw std::invalid_argument("DSI beta weights must not all be zero");
  }
}

double bernoulli_poly(int p, double x) {
  switch (p) {
    case 2:
      return (x - 1.0) * x + 1.0 / 6.0;
    case 4:
      return ((x - 2.0) * x + 1.0) * x * x - 1.0 / 30.0;
    case 6:
      return (((x - 3.0) * x + 2.5) * x * x - 0.5) * x * x + 1.0 / 42.0;
    case 8:
      return ((((x - 4.0) * x + 14.0 / 3.0) * x * x - 7.0 / 3.0) * x * x + 2.0 / 3.0) * x * x -
             1.0 / 30.0;
    default:
      throw std::invalid_argument("bernoulli_poly supports p in {2,4,6,8}");
  }
}

double si_univariate(int alpha, double x) {
  switch (alpha) {
    case 1:
      return kTwoPiSq * bernoulli_poly(2, x);
    case 2:
      return -64.93939402266829 * bernoulli_poly(4, x);  // -(2pi)^4/4!
    case 3:
      return 85.40624500603433 * bernoulli_poly(6, x);  // (2pi)^6/6!
    case 4:
      return -78.79558286947954 * bernoulli_poly(8, x);  // -(2pi)^8/8!
    default:
      throw std::invalid_argument("SI order alpha must be in {1,2,3,4}");
  }
}

namespace {

// Shared pieces of the digital kernels at a t-digit dyadic x != 0:
// beta(x) = -floor(log2 x) and t_v(x) = 2^{-v beta(x)}.
struct DsiTerms {
  double x, b, t1, t2, t3;
};

inline DsiTerms dsi_terms(std::uint64_t x_bits, int t) {
  const int msb = 63 - std::countl_zero(x_bits);
  const int beta = t - msb;
  DsiTerms d;
  d.x = std::ldexp(static_cast<double>(x_bits), -t);
  d.b = static_cast<double>(beta);
  d.t1 = std::ldexp(1.0, -beta);
  d.t2 = d.t1 * d.t1;
  d.t3 = d.t2 * d.t1;
  return d;
}

// sum_a x_a / 2^{3(a-1)} over the binary digits x = sum_a x_a 2^{-a},
// truncated exactly at the t available digits.
inline double dsi_bitsum3(std::uint64_t x_bits, int t) {
  double s = 0.0;
  while (x_bits) {
    const int p = std::countr_zero(x_bits);
    s += std::ldexp(1.0, -3 * (t - p - 1));
    x_bits &= x_bits - 1;
  }
  return s;
}

// Closed forms of the digital kernels, pinned against the Walsh series
// oracle (mlqmc-dev dsi-walsh): the order-1 kernel is the classic
// 6(1/6 - t_1/2) form, and the order-4 tail term is -beta(x) S(x)/24 with
// S(x) = sum_a x_a 2^{-3(a-1)}. Each order integrates to zero over [0,1),
// which the product-kernel cubature identities rely on.
inline double dsi_order(int alpha, const DsiTerms& d, std::uint64_t x_bits, int t) {
  switch (alpha) {
    case 1:
      return 1.0 - 3.0 * d.t1;
    case 2:
      return -1.0 - d.b * d.x + 2.5 * (1.0 - d.t1);
    case 3:
      return -1.0 + d.b * d.x * d.x - 5.0 * (1.0 - d.t1) * d.x + (43.0 / 18.0) * (1.0 - d.t2);
    case 4:
      return -1.0 - (2.0 / 3.0) * d.b * d.x * d.x * d.x + 5.0 * (1.0 - d.t1) * d.x * d.x -
             (43.0 / 9.0) * (1.0 - d.t2) * d.x + (701.0 / 294.0) * (1.0 - d.t3) -
             d.b * dsi_bitsum3(x_bits, t) / 24.0;
    default:
      throw std::invalid_argument("DSI order alpha must be in {1,2,3,4}");
  }
}

}  // namespace

double dsi_univariate(int alpha, std::uint64_t x_bits, int t) {
  if (alpha < 1 || alpha > 4) throw std::invalid_argument("DSI order alpha must be in {1,2,3,4}");
  if (x_bits == 0) return kDsiDiag[alpha - 1];
  return dsi_order(alpha, dsi_terms(x_bits, t), x_bits, t);
}

double dsi_weighted(const std::array<double, 4>& beta, std::uint64_t x_bits, int t) {
  if (x_bits == 0)
    return beta[0] * kDsiDiag[0] + beta[1] * kDsiDiag[1] + beta[2] * kDsiDiag[2] +
           beta[3] * kDsiDiag[3];
  const DsiTerms d = dsi_terms(x_bits, t);
  double r = 0.0;
  if (beta[0] != 0.0) r += beta[0] * dsi_order(1, d, x_bits, t);
  if (beta[1] != 0.0) r += beta[1] * dsi_order(2, d, x_bits, t);
  if (beta[2] != 0.0) r += beta[2] * dsi_order(3, d, x_bits, t);
  if (beta[3] != 0.0) r += beta[3] * dsi_order(4, d, x_bits, t);
  return r;
}

std::vector<double> kernel_column(const KernelParams& params, const double* z, int n,
                                  int d) {
  if (params.family != KernelFamily::si)
    throw std::invalid_argument("lattice points require the SI kernel family");
  params.validate(d);
  std::vector<double> col(n);
  for (int i = 0; i < n; ++i) {
    double prod = 1.0;
    const double* row = z + static_cast<std::size_t>(i) * d;
    for (int j = 0; j < d; ++j) prod *= 1.0 + params.eta[j] * si_univariate(params.alpha, row[j]);
    col[i] = params.gamma * prod;
  }
  return col;
}

std::vector<double> kernel_column(const KernelParams& params, const std::uint64_t* z,
                                  int n, int d, int t) {
  if (params.family != KernelFamily::dsi_weighted)
    throw std::invalid_argument("digital net points require the DSI kernel family");
  params.validate(d);
  std::vector<double> col(n);
  for (int i = 0; i < n; ++i) {
    double prod = 1.0;
    const std::uint64_t* row = z + static_cast<std::size_t>(i) * d;
    for (int j = 0; j < d; ++j) prod *= 1.0 + params.eta[j] * dsi_weighted(params.beta, row[j], t);
    col[i] = params.gamma * prod;
  }
  return col;
}

double kernel_eval(const KernelParams& params, const double* x, const double* y, int d) {
  if (params.family != KernelFamily::si)
    throw std::invalid_argument("lattice points require the SI kernel family");
  double prod = 1.0;
  for (int j = 0; j < d; ++j) {
    double diff = x[j] - y[j];
    if (diff < 0.0) diff += 1.0;
    prod *= 1.0 + params.eta[j] * si_univariate(params.alpha, diff);
  }
  return params.gamma * prod;
}

double kernel_eval(const KernelParams& params, const std::uint64_t* x,
                   const std::uint64_t* y, int d, int t) {
  if (params.family != KernelFamily::dsi_weighted)
    throw std::invalid_argument("digital net points require the DSI kernel family");
  double prod = 1.0;
  for (int j = 0; j < d; ++j)
    prod *= 1.0 + params.eta[j] * dsi_weighted(params.beta, x[j] ^ y[j], t);
  return params.gamma * prod;
}

}  // namespace mlqmc
