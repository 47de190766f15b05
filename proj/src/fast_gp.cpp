#include "mlqmc/fast_gp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mlqmc/fast_transforms.hpp"

namespace mlqmc {

namespace {

constexpr double kEigCutoff = 1e-14;   // |lambda_i| < cutoff * max -> ill-conditioned
constexpr double kGammaFloor = 1e-30;  // keeps gamma positive for constant data
constexpr double kImagTol = 1e-8;      // allowed relative imaginary residue

double checked_real(std::complex<double> q) {
  const double scale = std::abs(q.real()) + 1e-300;
  if (std::abs(q.imag()) > kImagTol * scale)
    throw FitError("quadratic form has a non-negligible imaginary residue");
  return q.real();
}

void check_conditioning(double min_abs, double max_abs) {
  if (!(max_abs > 0.0) || min_abs < kEigCutoff * max_abs)
    throw FitError("near-zero kernel eigenvalue: ill-conditioned fit");
}

inline double softplus(double b) { return b > 30.0 ? b : std::log1p(std::exp(b)); }
inline double softplus_inv(double s) { return s > 30.0 ? s : std::log(std::expm1(s)); }

}  // namespace

std::vector<std::complex<double>> eigenvalues_lattice(std::span<const double> kernel_col) {
  const std::size_t n = kernel_col.size();
  std::vector<std::complex<double>> lam(n);
  for (std::size_t i = 0; i < n; ++i) lam[i] = kernel_col[i];
  fftbr(lam);
  const double scale = std::sqrt(static_cast<double>(n));
  double max_abs = 0.0, min_abs = std::numeric_limits<double>::infinity();
  for (auto& l : lam) {
    l *= scale;
    max_abs = std::max(max_abs, std::abs(l));
    min_abs = std::min(min_abs, std::abs(l));
  }
  check_conditioning(min_abs, max_abs);
  return lam;
}

std::vector<double> eigenvalues_net(std::span<const double> kernel_col) {
  std::vector<double> lam(kernel_col.begin(), kernel_col.end());
  fwht(lam);
  const double scale = std::sqrt(static_cast<double>(lam.size()));
  double max_abs = 0.0, min_abs = std::numeric_limits<double>::infinity();
  for (auto& l : lam) {
    l *= scale;
    max_abs = std::max(max_abs, std::abs(l));
    min_abs = std::min(min_abs, std::abs(l));
  }
  check_conditioning(min_abs, max_abs);
  return lam;
}

std::vector<double> solve_lattice(std::span<const std::complex<double>> lambda,
                                  std::span<const double> a) {
  const std::size_t n = a.size();
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = a[i];
  fftbr(buf);
  for (std::size_t i = 0; i < n; ++i) {
    if (lambda[i] == std::complex<double>(0.0, 0.0)) throw FitError("zero eigenvalue in solve");
    buf[i] /= lambda[i];
  }
  ifftbr(buf);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real();
  return out;
}

std::vector<double> solve_net(std::span<const double> lambda, std::span<const double> a) {
  std::vector<double> buf(a.begin(), a.end());
  fwht(buf);
  for (std::size_t i = 0; i < buf.size(); ++i) {
    if (lambda[i] == 0.0) throw FitError("zero eigenvalue in solve");
    buf[i] /= lambda[i];
  }
  fwht(buf);
  return buf;
}

namespace {

std::vector<double> anchor_of(const KernelParams& p, int d) {
  std::vector<double> a;
  for (int j = 0; j < d; ++j) a.push_back(std::log(p.eta[j]));
  if (p.family == KernelFamily::dsi_weighted)
    for (int k = 0; k < 4; ++k) a.push_back(softplus_inv(std::max(p.beta[k], 1e-8)));
  return a;
}

}  // namespace

GpLevelState::GpLevelState(std::shared_ptr<const LatticeGen> gen, KernelParams params)
    : kind_(SeqKind::lattice), lat_(std::move(gen)), params_(std::move(params)) {
  d_ = lat_->dim();
  if (params_.family != KernelFamily::si)
    throw std::invalid_argument("lattice level requires the SI kernel family");
  params_.validate(d_);
  anchor_ = anchor_of(params_, d_);
}

GpLevelState::GpLevelState(std::shared_ptr<const DigitalNetGen> gen, KernelParams params)
    : kind_(SeqKind::net), net_(std::move(gen)), params_(std::move(params)) {
  d_ = net_->dim();
  if (params_.family != KernelFamily::dsi_weighted)
    throw std::invalid_argument("net level requires the DSI kernel family");
  params_.validate(d_);
  anchor_ = anchor_of(params_, d_);
}

void GpLevelState::set_params(KernelParams p) {
  if (p.family != params_.family) throw std::invalid_argument("kernel family is fixed per level");
  p.validate(d_);
  params_ = std::move(p);
  fitted_ = false;
  sums_.clear();
}

void GpLevelState::append_values(std::span<const double> y_new) {
  const int n_total = n_ + static_cast<int>(y_new.size());
  if (!is_pow2(static_cast<std::size_t>(n_total)))
    throw std::invalid_argument("sample count must remain a power of two");
  y_.insert(y_.end(), y_new.begin(), y_new.end());
  n_ = n_total;
  fitted_ = false;
  sums_.clear();
}

void GpLevelState::ensure_points(int n) {
  if (z_count_ >= n) return;
  if (kind_ == SeqKind::lattice) {
    z_lat_.resize(static_cast<std::size_t>(n) * d_);
    LatticeShift zero;
    zero.delta.assign(d_, 0.0);
    lattice_points(*lat_, zero, z_count_, n, z_lat_.data() + static_cast<std::size_t>(z_count_) * d_);
  } else {
    z_net_.resize(static_cast<std::size_t>(n) * d_);
    DigitalShift zero;
    zero.t = net_->t;
    zero.bits.assign(d_, 0);
    digital_net_points_int(*net_, zero, z_count_, n,
                           z_net_.data() + static_cast<std::size_t>(z_count_) * d_);
  }
  z_count_ = n;
}

void GpLevelState::ensure_planes(int n) {
  if (plane_count_ >= n) return;
  ensure_points(n);
  const int n_orders = kind_ == SeqKind::lattice ? 1 : 4;
  for (int a = 0; a < n_orders; ++a) plane_[a].resize(static_cast<std::size_t>(n) * d_);
  for (int i = plane_count_; i < n; ++i)
    for (int j = 0; j < d_; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * d_ + j;
      if (kind_ == SeqKind::lattice) {
        plane_[0][k] = si_univariate(params_.alpha, z_lat_[k]);
      } else {
        for (int a = 0; a < 4; ++a) plane_[a][k] = dsi_univariate(a + 1, z_net_[k], net_->t);
      }
    }
  plane_count_ = n;
}

void GpLevelState::rebuild_column(std::vector<double>& r) const {
  r.resize(n_);
  for (int i = 0; i < n_; ++i) {
    double prod = 1.0;
    const std::size_t base = static_cast<std::size_t>(i) * d_;
    if (kind_ == SeqKind::lattice) {
      for (int j = 0; j < d_; ++j) prod *= 1.0 + params_.eta[j] * plane_[0][base + j];
    } else {
      const auto& b = params_.beta;
      for (int j = 0; j < d_; ++j) {
        const double R = b[0] * plane_[0][base + j] + b[1] * plane_[1][base + j] +
                         b[2] * plane_[2][base + j] + b[3] * plane_[3][base + j];
        prod *= 1.0 + params_.eta[j] * R;
      }
    }
    r[i] = prod;
  }
}

double GpLevelState::transform_residuals() {
  double sum_sq = 0.0;
  if (kind_ == SeqKind::lattice) {
    ytilde_c_.resize(n_);
    for (int i = 0; i < n_; ++i) ytilde_c_[i] = y_[i] - params_.tau;
    fftbr(ytilde_c_);
    for (auto& v : ytilde_c_) sum_sq += std::norm(v);
  } else {
    ytilde_r_.assign(y_.begin(), y_.end());
    for (auto& v : ytilde_r_) v -= params_.tau;
    fwht(ytilde_r_);
    for (auto& v : ytilde_r_) sum_sq += v * v;
  }
  return sum_sq;
}

double GpLevelState::eigen_refresh() {
  ensure_planes(n_);
  std::vector<double> r;
  rebuild_column(r);

  sums_.assign(log2_exact(n_) + 1, 0.0);
  double acc = 0.0;
  for (int i = 0; i < n_; ++i) {
    acc += r[i];
    if (is_pow2(static_cast<std::size_t>(i) + 1)) sums_[log2_exact(i + 1)] = acc;
  }
  sums_[0] = r[0];

  logdet_u_ = 0.0;
  std::complex<double> quad{0.0, 0.0};
  if (kind_ == SeqKind::lattice) {
    lambda_uc_ = eigenvalues_lattice(r);
    for (int i = 0; i < n_; ++i) {
      logdet_u_ += std::log(std::abs(lambda_uc_[i]));
      quad += std::norm(ytilde_c_[i]) / lambda_uc_[i];
    }
    quad_u_ = checked_real(quad);
  } else {
    lambda_ur_ = eigenvalues_net(r);
    double q = 0.0;
    for (int i = 0; i < n_; ++i) {
      if (lambda_ur_[i] <= 0.0) throw FitError("nonpositive net eigenvalue");
      logdet_u_ += std::log(lambda_ur_[i]);
      q += ytilde_r_[i] * ytilde_r_[i] / lambda_ur_[i];
    }
    quad_u_ = q;
  }
  if (quad_u_ < -1e-10) throw FitError("negative residual quadratic form");
  quad_u_ = std::max(quad_u_, 0.0);
  return quad_u_;
}

double GpLevelState::refresh() {
  if (n_ < 1 || !is_pow2(static_cast<std::size_t>(n_)))
    throw std::invalid_argument("refresh requires a power-of-two sample count");
  transform_residuals();
  eigen_refresh();
  fitted_ = true;
  return nmll();
}

bool GpLevelState::eval_profile(double& L_out, bool with_grad, Workspace& ws) {
  const bool net = kind_ == SeqKind::net;
  const int n_par = net ? d_ + 4 : d_;
  rebuild_column(ws.r);
  for (int i = 0; i < n_; ++i)
    if (!(std::abs(ws.r[i]) < 1e12)) return false;  // cancellation would eat the column signal
  double logdet = 0.0, quad = 0.0;
  double max_abs = 0.0, min_abs = std::numeric_limits<double>::infinity();
  const double scale = std::sqrt(static_cast<double>(n_));
  if (!net) {
    ws.buf_c.assign(ws.r.begin(), ws.r.end());
    fftbr(ws.buf_c);
    std::complex<double> q{0.0, 0.0};
    for (int i = 0; i < n_; ++i) {
      ws.buf_c[i] *= scale;
      const double ab = std::abs(ws.buf_c[i]);
      max_abs = std::max(max_abs, ab);
      min_abs = std::min(min_abs, ab);
    }
    if (min_abs < kEigCutoff * max_abs) return false;
    for (int i = 0; i < n_; ++i) {
      logdet += std::log(std::abs(ws.buf_c[i]));
      q += std::norm(ytilde_c_[i]) / ws.buf_c[i];
    }
    quad = q.real();
  } else {
    ws.buf_r.assign(ws.r.begin(), ws.r.end());
    fwht(ws.buf_r);
    for (int i = 0; i < n_; ++i) {
      ws.buf_r[i] *= scale;
      max_abs = std::max(max_abs, std::abs(ws.buf_r[i]));
      min_abs = std::min(min_abs, std::abs(ws.buf_r[i]));
      if (ws.buf_r[i] <= 0.0) return false;
    }
    if (min_abs < kEigCutoff * max_abs) return false;
    for (int i = 0; i < n_; ++i) {
      logdet += std::log(ws.buf_r[i]);
      quad += ytilde_r_[i] * ytilde_r_[i] / ws.buf_r[i];
    }
  }
  if (!(quad > 1e-250)) return false;  // constant data: nothing to fit
  L_out = n_ * std::log(quad) + logdet;
  if (!std::isfinite(L_out)) return false;
  if (!with_grad) return true;

  // c_i = 1/lambda_i - (n/quad) |ytilde_i|^2 / lambda_i^2, pulled back
  // through the transpose transform, then one pass over the kernel planes.
  ws.g.resize(n_);
  if (!net) {
    auto& c = ws.buf_c;  // overwrites the eigenvalues
    for (int i = 0; i < n_; ++i) {
      const std::complex<double> li = c[i];
      c[i] = std::conj(1.0 / li - (n_ / quad) * std::norm(ytilde_c_[i]) / (li * li));
    }
    ifftbr(c);
    for (int i = 0; i < n_; ++i) ws.g[i] = scale * c[i].real() * ws.r[i];
  } else {
    auto& c = ws.buf_r;
    for (int i = 0; i < n_; ++i) {
      const double li = c[i];
      c[i] = 1.0 / li - (n_ / quad) * (ytilde_r_[i] * ytilde_r_[i]) / (li * li);
    }
    fwht(c);
    for (int i = 0; i < n_; ++i) ws.g[i] = scale * c[i] * ws.r[i];
  }

  ws.grad.assign(n_par, 0.0);
  for (int i = 0; i < n_; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * d_;
    const double gi = ws.g[i];
    if (!net) {
      for (int j = 0; j < d_; ++j) {
        const double w = params_.eta[j] * plane_[0][base + j];
        ws.grad[j] += gi * w / (1.0 + w);
      }
    } else {
      const auto& b = params_.beta;
      for (int j = 0; j < d_; ++j) {
        const double R = b[0] * plane_[0][base + j] + b[1] * plane_[1][base + j] +
                         b[2] * plane_[2][base + j] + b[3] * plane_[3][base + j];
        const double ge = gi * params_.eta[j] / (1.0 + params_.eta[j] * R);
        ws.grad[j] += ge * R;
        ws.grad[d_ + 0] += ge * plane_[0][base + j];
        ws.grad[d_ + 1] += ge * plane_[1][base + j];
        ws.grad[d_ + 2] += ge * plane_[2][base + j];
        ws.grad[d_ + 3] += ge * plane_[3][base + j];
      }
    }
  }
  // chain rule through beta = softplus(b): d beta / d b = 1 - exp(-beta)
  if (net)
    for (int a = 0; a < 4; ++a) ws.grad[d_ + a] *= 1.0 - std::exp(-params_.beta[a]);
  for (double gv : ws.grad)
    if (!std::isfinite(gv)) return false;
  return true;
}

double GpLevelState::profile_objective() {
  if (n_ < 1 || !is_pow2(static_cast<std::size_t>(n_)))
    throw std::invalid_argument("profile_objective requires a power-of-two sample count");
  transform_residuals();
  ensure_planes(n_);
  Workspace ws;
  double L = 0.0;
  if (!eval_profile(L, false, ws)) throw FitError("profile objective is not finite here");
  return L;
}

std::vector<double> GpLevelState::profile_gradient() {
  if (n_ < 1 || !is_pow2(static_cast<std::size_t>(n_)))
    throw std::invalid_argument("profile_gradient requires a power-of-two sample count");
  transform_residuals();
  ensure_planes(n_);
  Workspace ws;
  double L = 0.0;
  if (!eval_profile(L, true, ws)) throw FitError("profile gradient is not finite here");
  return ws.grad;
}

double GpLevelState::fit(const FitOptions& opts) {
  if (n_ < 1 || !is_pow2(static_cast<std::size_t>(n_)))
    throw std::invalid_argument("fit requires a power-of-two sample count");

  // tau: exact NMLL minimizer
  double mean = 0.0;
  for (double v : y_) mean += v;
  mean /= n_;
  params_.tau = mean;

  const double sum_sq = transform_residuals();
  ensure_planes(n_);

  const bool net = kind_ == SeqKind::net;
  const int n_par = net ? d_ + 4 : d_;

  // Unconstrained view: eta = exp(x_j), beta = softplus(x_{d+a}).
  std::vector<double> x(n_par);
  for (int j = 0; j < d_; ++j) x[j] = std::log(params_.eta[j]);
  if (net)
    for (int a = 0; a < 4; ++a) x[d_ + a] = softplus_inv(std::max(params_.beta[a], 1e-8));

  const double bound = opts.x_bound;
  const auto boxed = [&](double v, int k) {
    return std::clamp(v, anchor_[k] - bound, anchor_[k] + bound);
  };
  const auto apply_x = [&](const std::vector<double>& xx) {
    for (int j = 0; j < d_; ++j) params_.eta[j] = std::exp(boxed(xx[j], j));
    if (net)
      for (int a = 0; a < 4; ++a) params_.beta[a] = softplus(boxed(xx[d_ + a], d_ + a));
  };
  for (int k = 0; k < n_par; ++k) x[k] = boxed(x[k], k);

  // Adam with best-iterate tracking; an invalid iterate reverts to the best
  // point with a halved step.
  Workspace ws;
  std::vector<double> best_x = x;
  double best_L = std::numeric_limits<double>::infinity();
  if (n_ > 1 && sum_sq > 1e-250) {
    std::vector<double> m(n_par, 0.0), v(n_par, 0.0);
    double step = opts.step;
    int restarts = 0;
    double prev_L = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opts.max_iters; ++it) {
      apply_x(x);
      double L = 0.0;
      if (!eval_profile(L, true, ws)) {
        if (++restarts > 8) break;
        x = best_x;
        std::fill(m.begin(), m.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);
        step *= 0.5;
        continue;
      }
      if (L < best_L) {
        best_L = L;
        best_x = x;
      }
      if (it > 0 && std::abs(prev_L - L) < opts.rel_tol * (std::abs(L) + 1.0)) break;
      prev_L = L;
      const double b1 = 0.9, b2 = 0.999;
      const double c1 = 1.0 - std::pow(b1, it + 1), c2 = 1.0 - std::pow(b2, it + 1);
      for (int k = 0; k < n_par; ++k) {
        m[k] = b1 * m[k] + (1.0 - b1) * ws.grad[k];
        v[k] = b2 * v[k] + (1.0 - b2) * ws.grad[k] * ws.grad[k];
        x[k] -= step * (m[k] / c1) / (std::sqrt(v[k] / c2) + 1e-12);
        x[k] = boxed(x[k], k);
      }
    }
  }
  apply_x(best_x);

  eigen_refresh();
  params_.gamma = std::max(quad_u_ / n_, kGammaFloor);
  fitted_ = true;
  return nmll();
}

double GpLevelState::nmll() const {
  if (!fitted_) throw std::logic_error("nmll requires a fitted state");
  return logdet_u_ + n_ * std::log(params_.gamma) + quad_u_ / params_.gamma;
}

CubatureResult GpLevelState::posterior_cubature() const {
  if (!fitted_) throw std::logic_error("posterior_cubature requires a fitted state");
  CubatureResult res;
  double mean = 0.0;
  for (double v : y_) mean += v;
  res.mu_hat = mean / n_;

  const double s = sums_[log2_exact(n_)];
  const double kernel_mean = s / n_;
  if (kernel_mean < 1.0) {
    clamp_count_++;
    if (!clamp_warned_) {
      std::fprintf(stderr, "mlqmc: posterior variance clamped to 0 (kernel mean < 1)\n");
      clamp_warned_ = true;
    }
    res.v_hat = 0.0;
  } else {
    res.v_hat = std::max(params_.gamma * (1.0 - 1.0 / kernel_mean), 0.0);
  }
  return res;
}

void GpLevelState::ensure_prefix_sums(int q) {
  if (static_cast<int>(sums_.size()) > q) return;
  if (sums_.empty()) throw std::logic_error("projected variance requires a fitted state");
  int p_have = static_cast<int>(sums_.size()) - 1;
  const std::uint64_t n_need = std::uint64_t{1} << q;
  if (kind_ == SeqKind::net && net_->p_max < 64 &&
      n_need > (std::uint64_t{1} << net_->p_max))
    throw std::invalid_argument("projected size exceeds the net's 2^p_max points");
  ensure_points(static_cast<int>(n_need));
  double acc = sums_[p_have];
  sums_.resize(q + 1);
  for (std::uint64_t i = std::uint64_t{1} << p_have; i < n_need; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * d_;
    double prod = 1.0;
    if (kind_ == SeqKind::lattice) {
      for (int j = 0; j < d_; ++j)
        prod *= 1.0 + params_.eta[j] * si_univariate(params_.alpha, z_lat_[base + j]);
    } else {
      for (int j = 0; j < d_; ++j)
        prod *= 1.0 + params_.eta[j] * dsi_weighted(params_.beta, z_net_[base + j], net_->t);
    }
    acc += prod;
    if (is_pow2(i + 1)) sums_[log2_exact(i + 1)] = acc;
  }
}

double GpLevelState::variance_at_pow2(int q) {
  ensure_prefix_sums(q);
  const double npow = std::ldexp(1.0, q);
  const double kernel_mean = sums_[q] / npow;
  if (kernel_mean < 1.0) {
    clamp_count_++;
    return 0.0;
  }
  return std::max(params_.gamma * (1.0 - 1.0 / kernel_mean), 0.0);
}

double GpLevelState::projected_variance(double n_hat) {
  if (!fitted_) throw std::logic_error("projected_variance requires a fitted state");
  if (!(n_hat >= 1.0)) throw std::invalid_argument("projected size must be >= 1");
  const double lg = std::log2(n_hat);
  const int p = static_cast<int>(std::floor(lg));
  if (std::ldexp(1.0, p) == n_hat) return variance_at_pow2(p);

  const double v_lo = variance_at_pow2(p);
  const double v_hi = variance_at_pow2(p + 1);
  if (v_lo <= 0.0 || v_hi <= 0.0) return 0.0;
  // log-log linear interpolation between the surrounding powers of two
  const double log_v = std::log(v_lo) + (lg - p) * (std::log(v_hi) - std::log(v_lo));
  return std::exp(log_v);
}

std::vector<std::complex<double>> GpLevelState::lambda_complex() const {
  if (!fitted_ || kind_ != SeqKind::lattice)
    throw std::logic_error("lambda_complex requires a fitted lattice state");
  std::vector<std::complex<double>> out(lambda_uc_);
  for (auto& l : out) l *= params_.gamma;
  return out;
}

std::vector<double> GpLevelState::lambda_real() const {
  if (!fitted_ || kind_ != SeqKind::net)
    throw std::logic_error("lambda_real requires a fitted net state");
  std::vector<double> out(lambda_ur_);
  for (auto& l : out) l *= params_.gamma;
  return out;
}

}  // namespace mlqmc
