#include "mlqmc/problems.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace mlqmc {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt2Pi = 2.5066282746310002;
constexpr double kUnitLo = 0x1.0p-53;
constexpr double kUnitHi = 1.0 - 0x1.0p-53;

inline double clamp_unit(double p) { return std::min(std::max(p, kUnitLo), kUnitHi); }

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }
double normal_pdf(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

double inv_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inv_normal_cdf requires p in (0,1)");
  // Acklam's rational approximation ...
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  }
  // ... plus one Halley step against the erfc-based forward CDF
  const double e = normal_cdf(x) - p;
  const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double sumxex(const double* x, int d) {
  double s = 0.0;
  for (int j = 0; j < d; ++j) s += x[j] * std::exp(x[j]);
  return s - d;
}

std::vector<double> ridge_weights(int d, bool sparse) {
  std::vector<double> c(d);
  if (sparse) {
    double norm = 0.0;
    for (int j = 1; j <= d; ++j) norm += std::pow(4.0, -j);
    for (int j = 1; j <= d; ++j) c[j - 1] = std::pow(2.0, -j) / std::sqrt(norm);
  } else {
    for (auto& v : c) v = 1.0 / std::sqrt(static_cast<double>(d));
  }
  return c;
}

namespace {

template <typename Builder>
const std::vector<double>& cached_by_int(int key, std::mutex& mu,
                                         std::unordered_map<int, std::vector<double>>& cache,
                                         Builder&& build) {
  std::lock_guard<std::mutex> lock(mu);
  auto& entry = cache[key];
  if (entry.empty()) entry = build(key);
  return entry;
}

double ridge_argument(const double* x, int d) {
  static std::mutex mu;
  static std::unordered_map<int, std::vector<double>> cache;
  const auto& w = cached_by_int(d, mu, cache, [](int dd2) { return ridge_weights(dd2, true); });
  double u = 0.0;
  for (int j = 0; j < d; ++j) u += w[j] * inv_normal_cdf(clamp_unit(x[j]));
  return u;
}

}  // namespace

double ridge_pl_sparse(const double* x, int d) {
  const double u = ridge_argument(x, d);
  return std::max(u - 1.0, 0.0) - normal_pdf(1.0) + normal_cdf(-1.0);
}

double jsu_mean() { return -std::exp(0.5) * std::sinh(1.0); }

double ridge_jsu_sparse(const double* x, int d) {
  const double u = ridge_argument(x, d);
  return std::sinh(u - 1.0) - jsu_mean();
}

double genz_corner_peak2(const double* x, int d) {
  static std::mutex mu;
  static std::unordered_map<int, std::vector<double>> cache;
  const auto& w = cached_by_int(d, mu, cache, [](int dd2) {
    double norm = 0.0;
    for (int j = 1; j <= dd2; ++j) norm += 1.0 / (static_cast<double>(j) * j);
    std::vector<double> c(dd2);
    for (int j = 1; j <= dd2; ++j) c[j - 1] = 1.0 / (static_cast<double>(j) * j * 4.0 * norm);
    return c;
  });
  double s = 0.0;
  for (int j = 0; j < d; ++j) s += w[j] * x[j];
  return std::exp(-(d + 1) * std::log1p(s));
}

double geometric_asian_price(double s0, double strike, double rate, double sigma, int m) {
  const double mu_g = std::log(s0) + (rate - 0.5 * sigma * sigma) * (m + 1) / (2.0 * m);
  const double var_g =
      sigma * sigma * (m + 1.0) * (2.0 * m + 1.0) / (6.0 * static_cast<double>(m) * m);
  const double sd_g = std::sqrt(var_g);
  const double d2 = (mu_g - std::log(strike)) / sd_g;
  const double d1 = d2 + sd_g;
  return std::exp(-rate) *
         (std::exp(mu_g + 0.5 * var_g) * normal_cdf(d1) - strike * normal_cdf(d2));
}

std::vector<double> brownian_factor(int d) {
  if (d < 1 || d > 1024) throw std::invalid_argument("brownian_factor supports 1 <= d <= 1024");
  Eigen::MatrixXd sigma(d, d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) sigma(j, k) = static_cast<double>(std::min(j, k) + 1) / d;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.info() != Eigen::Success) throw std::runtime_error("brownian_factor eigen-solve failed");
  std::vector<double> a(static_cast<std::size_t>(d) * d);
  // PCA order: leading columns carry the largest eigenvalues
  for (int k = 0; k < d; ++k) {
    const int src = d - 1 - k;
    const double s = std::sqrt(std::max(es.eigenvalues()(src), 0.0));
    for (int j = 0; j < d; ++j)
      a[static_cast<std::size_t>(j) * d + k] = s * es.eigenvectors()(j, src);
  }
  return a;
}

namespace {

const std::vector<double>& cached_brownian_factor(int d) {
  static std::mutex mu;
  static std::unordered_map<int, std::vector<double>> cache;
  return cached_by_int(d, mu, cache, [](int dd2) { return brownian_factor(dd2); });
}

std::vector<double> option_path(int level, const double* x) {
  const int d = 1 << (2 + level);
  const auto& a = cached_brownian_factor(d);
  std::vector<double> zn(d), b(d);
  for (int j = 0; j < d; ++j) zn[j] = inv_normal_cdf(clamp_unit(x[j]));
  for (int j = 0; j < d; ++j) {
    const double* row = a.data() + static_cast<std::size_t>(j) * d;
    double acc = 0.0;
    for (int k = 0; k < d; ++k) acc += row[k] * zn[k];
    b[j] = acc;
  }
  return b;
}

template <typename Payoff>
double option_level(int level, const double* x, Payoff&& payoff) {
  auto b = option_path(level, x);
  return payoff(b, static_cast<int>(b.size()));
}

// Y_l = Q_l - Q_{l-1} with both payoffs on the same Brownian path: the
// coarse payoff reads the fine path at the coarse monitoring times.
template <typename Payoff>
double option_diff(int level, const double* x, Payoff&& payoff) {
  auto b = option_path(level, x);
  const int d = static_cast<int>(b.size());
  const double fine = payoff(b, d);
  if (level == 1) return fine;
  std::vector<double> coarse(d / 2);
  for (int j = 0; j < d / 2; ++j) coarse[j] = b[2 * j + 1];
  return fine - payoff(coarse, d / 2);
}

}  // namespace

namespace {

// Payoffs take the Brownian path at monitoring times (j+1)/d, j = 0..d-1.
struct AsianPayoff {
  OptionParams p;
  double operator()(const std::vector<double>& b, int d) const {
    // geometric average: exp(mean of log S(j/d))
    double mean_b = 0.0;
    for (double v : b) mean_b += v;
    mean_b /= d;
    const double drift = (p.rate - 0.5 * p.sigma * p.sigma) * (d + 1) / (2.0 * d);
    const double gmean = p.s0 * std::exp(drift + p.sigma * mean_b);
    return std::max(gmean - p.strike, 0.0) * std::exp(-p.rate);
  }
};

struct LookbackPayoff {
  OptionParams p;
  double operator()(const std::vector<double>& b, int d) const {
    const double c = p.rate - 0.5 * p.sigma * p.sigma;
    double s_min = 1e300, s_last = 0.0;
    for (int j = 0; j < d; ++j) {
      const double t = static_cast<double>(j + 1) / d;
      const double s = p.s0 * std::exp(c * t + p.sigma * b[j]);
      s_min = std::min(s_min, s);
      if (j == d - 1) s_last = s;
    }
    return (s_last - s_min) * std::exp(-p.rate);
  }
};

}  // namespace

double asian_level(int level, const double* x, const OptionParams& p) {
  return option_level(level, x, AsianPayoff{p});
}

double lookback_level(int level, const double* x, const OptionParams& p) {
  return option_level(level, x, LookbackPayoff{p});
}

namespace {

// sin(pi j u)/j at the two Gauss points of every cell of the level's mesh
const std::vector<double>& elliptic_sin_table(int level) {
  static std::mutex mu;
  static std::unordered_map<int, std::vector<double>> cache;
  return cached_by_int(level, mu, cache, [](int l) {
    const int cells = 1 << l;
    const double g = 0.5 / std::sqrt(3.0);
    std::vector<double> tab(static_cast<std::size_t>(cells) * 16);
    for (int k = 0; k < cells; ++k)
      for (int s = 0; s < 2; ++s) {
        const double u = (k + 0.5 + (s ? g : -g)) / cells;
        for (int j = 1; j <= 8; ++j)
          tab[(static_cast<std::size_t>(k) * 2 + s) * 8 + (j - 1)] = std::sin(M_PI * j * u) / j;
      }
    return tab;
  });
}

}  // namespace

double elliptic_level(int level, const double* x) {
  const int cells = 1 << level;  // mesh points minus 1
  const int m = cells - 1;       // interior unknowns
  const double h = 1.0 / cells;
  const auto& tab = elliptic_sin_table(level);

  double zn[8];
  for (int j = 0; j < 8; ++j) zn[j] = inv_normal_cdf(clamp_unit(x[j]));

  // cell conductivities: harmonic average of e^{a} over the cell by
  // two-point Gauss quadrature of e^{-a}
  std::vector<double> kappa(cells);
  for (int k = 0; k < cells; ++k) {
    double inv = 0.0;
    for (int s = 0; s < 2; ++s) {
      const double* row = tab.data() + (static_cast<std::size_t>(k) * 2 + s) * 8;
      double a = 0.0;
      for (int j = 0; j < 8; ++j) a += zn[j] * row[j];
      inv += 0.5 * std::exp(-a);
    }
    kappa[k] = 1.0 / inv;
  }

  // -(kappa q')' = 1 with zero boundaries: Thomas solve on the conservative
  // midpoint stencil kappa_{k-1/2} q_{k-1} - (kappa_{k-1/2}+kappa_{k+1/2}) q_k
  // + kappa_{k+1/2} q_{k+1} = -h^2
  std::vector<double> diag(m), rhs(m, h * h), upper(m - 1);
  for (int k = 0; k < m; ++k) diag[k] = kappa[k] + kappa[k + 1];
  for (int k = 0; k + 1 < m; ++k) upper[k] = -kappa[k + 1];
  for (int k = 1; k < m; ++k) {
    const double w = kappa[k] / diag[k - 1];  // eliminates the subdiagonal -kappa_k
    diag[k] += w * upper[k - 1];
    rhs[k] += w * rhs[k - 1];
  }
  std::vector<double> q(m);
  q[m - 1] = rhs[m - 1] / diag[m - 1];
  for (int k = m - 2; k >= 0; --k) q[k] = (rhs[k] - upper[k] * q[k + 1]) / diag[k];
  return q[cells / 2 - 1];  // u = 1/2
}

void MlProblem::validate() const {
  if (levels < 1) throw std::invalid_argument("problem needs at least one level");
  if (static_cast<int>(costs.size()) != levels || static_cast<int>(dims.size()) != levels)
    throw std::invalid_argument("problem costs/dims size mismatch");
  for (double c : costs)
    if (!(c > 0.0)) throw std::invalid_argument("problem costs must be positive");
  for (int l = 1; l < levels; ++l)
    if (dims[l] < dims[l - 1]) throw std::invalid_argument("problem dims must be nondecreasing");
  if (!eval) throw std::invalid_argument("problem evaluator is empty");
}

namespace {

MlProblem single_level(const std::string& id, int d) {
  MlProblem p;
  p.name = id;
  p.levels = 1;
  p.costs = {1.0};
  p.dims = {d};
  if (id == "sumxex") {
    p.eval = [d](int, const double* x) { return sumxex(x, d); };
    p.reference = 0.0;  // int_0^1 x e^x dx = 1
  } else if (id == "ridge_pl") {
    p.eval = [d](int, const double* x) { return ridge_pl_sparse(x, d); };
    p.reference = 0.0;  // E[(U-1)_+] = phi(1) - Phi(-1) for U ~ N(0,1)
  } else if (id == "ridge_jsu") {
    p.eval = [d](int, const double* x) { return ridge_jsu_sparse(x, d); };
    p.reference = 0.0;
  } else if (id == "genz_cp2") {
    p.eval = [d](int, const double* x) { return genz_corner_peak2(x, d); };
    if (d == 32) p.reference = genz_cp2_d32_reference();
  } else {
    throw std::invalid_argument("unknown problem id: " + id);
  }
  return p;
}

}  // namespace

MlProblem make_problem(const std::string& id, const ProblemOptions& opts) {
  if (id == "sumxex" || id == "ridge_pl" || id == "ridge_jsu" || id == "genz_cp2") {
    auto p = single_level(id, opts.d);
    p.validate();
    return p;
  }

  MlProblem p;
  p.name = id;
  if (id == "asian" || id == "lookback") {
    p.levels = opts.levels > 0 ? opts.levels : 4;
    if (p.levels > 8) throw std::invalid_argument("option problems support at most 8 levels");
    for (int l = 1; l <= p.levels; ++l) {
      p.costs.push_back(std::ldexp(1.0, l - p.levels));  // C_l ~ 2^l with C_L = 1
      p.dims.push_back(1 << (2 + l));
    }
    const bool asian = id == "asian";
    p.eval = [asian](int level, const double* x) {
      return asian ? option_diff(level, x, AsianPayoff{OptionParams{}})
                   : option_diff(level, x, LookbackPayoff{OptionParams{}});
    };
    if (asian)
      p.reference = geometric_asian_price(100.0, 100.0, 0.05, 0.2, 1 << (2 + p.levels));
  } else if (id == "elliptic") {
    p.levels = opts.levels > 0 ? opts.levels : 4;
    if (p.levels > 10) throw std::invalid_argument("elliptic supports at most 10 levels");
    for (int l = 1; l <= p.levels; ++l) {
      p.costs.push_back(std::ldexp(1.0, l - p.levels));
      p.dims.push_back(8);
    }
    p.eval = [](int level, const double* x) {
      const double fine = elliptic_level(level, x);
      if (level == 1) return fine;
      return fine - elliptic_level(level - 1, x);
    };
    if (p.levels == 4) p.reference = elliptic_l4_reference();
  } else {
    throw std::invalid_argument("unknown problem id: " + id);
  }
  p.validate();
  return p;
}

std::vector<std::string> problem_ids() {
  return {"sumxex", "ridge_pl", "ridge_jsu", "genz_cp2", "asian", "lookback", "elliptic"};
}

// Frozen from `mlqmc-dev ref-oracle` (32 scrambles x 2^18 net points).
double genz_cp2_d32_reference() { return 0.0487658082373; }  // +- 3.3e-09
double elliptic_l4_reference() { return 0.151305757481; }    // +- 5.9e-07

}  // namespace mlqmc
