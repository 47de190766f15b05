#include "mlqmc/fast_transforms.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace mlqmc {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void require_pow2(std::size_t n) {
  if (!is_pow2(n)) throw std::invalid_argument("transform length must be a power of two");
}

// Shared twiddle tables, one per size: w[k] = exp(-2*pi*i*k/n), k < n/2.
// Built once under a lock, read-only afterwards.
const std::complex<double>* twiddles(std::size_t n) {
  static std::mutex mu;
  static std::unordered_map<std::size_t, std::vector<std::complex<double>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& tab = cache[n];
  if (tab.empty()) {
    tab.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double ang = -kTwoPi * static_cast<double>(k) / static_cast<double>(n);
      tab[k] = {std::cos(ang), std::sin(ang)};
    }
  }
  return tab.data();
}

}  // namespace

int log2_exact(std::size_t n) {
  int m = 0;
  while ((std::size_t{1} << (m + 1)) <= n) ++m;
  return m;
}

void fwht(std::span<double> a) {
  const std::size_t n = a.size();
  require_pow2(n);
  for (std::size_t len = 1; len < n; len <<= 1)
    for (std::size_t i = 0; i < n; i += len << 1)
      for (std::size_t j = i; j < i + len; ++j) {
        const double u = a[j], v = a[j + len];
        a[j] = u + v;
        a[j + len] = u - v;
      }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& x : a) x *= scale;
}

void fftbr(std::span<std::complex<double>> a) {
  const std::size_t n = a.size();
  require_pow2(n);
  if (n == 1) return;
  const auto* tw = twiddles(n);
  // Decimation in time, radical-inverse-ordered input, natural-order output.
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len)
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> w = tw[j * step];
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
      }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& x : a) x *= scale;
}

void ifftbr(std::span<std::complex<double>> a) {
  const std::size_t n = a.size();
  require_pow2(n);
  if (n == 1) return;
  const auto* tw = twiddles(n);
  // Transpose network of fftbr: decimation in frequency with conjugate
  // twiddles, natural-order input, radical-inverse-ordered output.
  for (std::size_t len = n; len >= 2; len >>= 1) {
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len)
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> w = std::conj(tw[j * step]);
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2];
        a[i + j] = u + v;
        a[i + j + len / 2] = (u - v) * w;
      }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& x : a) x *= scale;
}

}  // namespace mlqmc
