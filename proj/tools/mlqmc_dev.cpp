// Offline generator for the text assets in data/ and the frozen reference
// constants used by tests. Every number that ships frozen in the library or
// test suite can be regenerated with a subcommand of this tool.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <iostream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mlqmc/ld_sequences.hpp"
#include "mlqmc/problems.hpp"

namespace {

int usage() {
  std::cerr << "usage: mlqmc-dev <subcommand> [args]\n"
               "  sobol-expand <dirnum.txt> <out.colmat.txt> [t=32] [p_max=32]\n"
               "  cbc-lattice <out.txt> [m=16] [d=64]\n"
               "  dsi-diag [kmax_log2=22]\n";
  return 2;
}

// ---------------------------------------------------------------------------
// sobol-expand: direction-number table (d s a m_i rows) -> generating-matrix
// columns. Recurrence for a degree-s primitive polynomial with middle
// coefficient bits a_1..a_{s-1}:
//   m_k = 2 a_1 m_{k-1} ^ 4 a_2 m_{k-2} ^ ... ^ 2^{s-1} a_{s-1} m_{k-s+1}
//         ^ 2^s m_{k-s} ^ m_{k-s}
// Column p holds the direction number v_{p+1} = m_{p+1} / 2^{p+1} as a t-bit
// integer, most significant bit first.
// ---------------------------------------------------------------------------
int sobol_expand(int argc, char** argv) {
  if (argc < 2) return usage();
  const std::string in_path = argv[0];
  const std::string out_path = argv[1];
  const int t = argc > 2 ? std::stoi(argv[2]) : 32;
  const int p_max = argc > 3 ? std::stoi(argv[3]) : 32;
  if (p_max > t) {
    std::cerr << "p_max > t not supported by this expansion\n";
    return 1;
  }

  std::ifstream in(in_path);
  if (!in) {
    std::cerr << "cannot open " << in_path << "\n";
    return 1;
  }

  struct Row {
    int d = 0, s = 0;
    std::uint64_t a = 0;
    std::vector<std::uint64_t> m;
  };
  std::vector<Row> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#' || line[pos] == 'd') continue;
    std::istringstream ss(line);
    Row r;
    ss >> r.d >> r.s >> r.a;
    std::uint64_t m;
    while (ss >> m) r.m.push_back(m);
    if (!r.d || static_cast<int>(r.m.size()) != r.s) {
      std::cerr << "malformed row: " << line << "\n";
      return 1;
    }
    rows.push_back(std::move(r));
  }

  const int d_total = static_cast<int>(rows.size()) + 1;  // + van der Corput
  std::ofstream out(out_path);
  out << "# Base-2 digital net generating matrices, " << d_total << " dimensions, "
      << p_max << " columns, " << t << " digits.\n"
      << "# Expanded from " << in_path << " (Joe-Kuo D6 Sobol direction numbers);\n"
      << "# dimension 1 is the van der Corput identity matrix.\n"
      << "# Header: d p_max t. One row per dimension: p_max column integers,\n"
      << "# most significant bit = first binary digit.\n"
      << d_total << " " << p_max << " " << t << "\n";

  // dimension 1: identity
  for (int p = 0; p < p_max; ++p) out << (std::uint64_t{1} << (t - 1 - p)) << (p + 1 < p_max ? " " : "\n");

  int expect_d = 2;
  for (const auto& r : rows) {
    if (r.d != expect_d++) {
      std::cerr << "non-contiguous dimension " << r.d << "\n";
      return 1;
    }
    std::vector<std::uint64_t> m(r.m);
    m.resize(p_max);
    for (int k = r.s; k < p_max; ++k) {
      std::uint64_t v = m[k - r.s] ^ (m[k - r.s] << r.s);
      for (int q = 1; q < r.s; ++q)
        if ((r.a >> (r.s - 1 - q)) & 1ULL) v ^= m[k - q] << q;
      m[k] = v;
    }
    for (int k = 0; k < p_max; ++k) {
      if (!(m[k] & 1ULL) || m[k] >= (std::uint64_t{1} << (k + 1))) {
        std::cerr << "invalid direction number at d=" << r.d << " k=" << k + 1 << "\n";
        return 1;
      }
      out << (m[k] << (t - (k + 1))) << (k + 1 < p_max ? " " : "\n");
    }
  }
  std::cout << "wrote " << out_path << " (" << d_total << " dims)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// cbc-lattice: component-by-component construction of a rank-1 lattice
// generating vector for n = 2^m points, minimizing the worst-case error in
// the weighted Korobov space with the alpha=1 kernel 2 pi^2 B_2({x}) and
// product weights 1/j^2. Odd components keep the lattice extensible in
// base 2; z and n-z give identical errors, so only z < n/2 is searched.
// ---------------------------------------------------------------------------
int cbc_lattice(int argc, char** argv) {
  if (argc < 1) return usage();
  const std::string out_path = argv[0];
  const int m = argc > 1 ? std::stoi(argv[1]) : 16;
  const int d = argc > 2 ? std::stoi(argv[2]) : 64;
  const std::uint64_t n = std::uint64_t{1} << m;

  std::vector<double> omega(n);
  const double two_pi_sq = 2.0 * 9.869604401089358;
  for (std::uint64_t k = 0; k < n; ++k) {
    const double x = static_cast<double>(k) / static_cast<double>(n);
    omega[k] = two_pi_sq * (x * x - x + 1.0 / 6.0);
  }

  std::vector<double> prod(n, 1.0);
  std::vector<std::uint64_t> g;
  g.push_back(1);
  {
    const double w = 1.0;  // gamma_1
    for (std::uint64_t i = 0; i < n; ++i) prod[i] *= 1.0 + w * omega[i % n];
  }

  const auto score = [&](std::uint64_t z) {
    double acc = 0.0;
    std::uint64_t k = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      acc += prod[i] * omega[k];
      k += z;
      if (k >= n) k -= n;
    }
    return acc;
  };

  for (int j = 2; j <= d; ++j) {
    const double w = 1.0 / (static_cast<double>(j) * j);
    std::uint64_t best_z = 1;
    double best = std::numeric_limits<double>::infinity();
    // two async halves over the odd candidates below n/2
    const auto scan = [&](std::uint64_t z0, std::uint64_t z1) {
      std::uint64_t bz = 1;
      double bs = std::numeric_limits<double>::infinity();
      for (std::uint64_t z = z0; z < z1; z += 2) {
        const double s = score(z);
        if (s < bs) {
          bs = s;
          bz = z;
        }
      }
      return std::pair<double, std::uint64_t>{bs, bz};
    };
    const std::uint64_t half = (n / 4) | 1ULL;
    auto fut = std::async(std::launch::async, scan, half, n / 2);
    const auto lo = scan(1, half);
    const auto hi = fut.get();
    best = lo.first;
    best_z = lo.second;
    if (hi.first < best || (hi.first == best && hi.second < best_z)) {
      best = hi.first;
      best_z = hi.second;
    }
    g.push_back(best_z);
    for (std::uint64_t i = 0, k = 0; i < n; ++i) {
      prod[i] *= 1.0 + w * omega[k];
      k += best_z;
      if (k >= n) k -= n;
    }
    std::cerr << "cbc: dim " << j << " z=" << best_z << "\n";
  }

  std::ofstream out(out_path);
  out << "# Rank-1 lattice generating vector, base-2 extensible, d=" << d << ".\n"
      << "# Component-by-component construction at n=2^" << m << " for the weighted\n"
      << "# Korobov space (alpha=1 kernel 2 pi^2 B_2({x}), product weights 1/j^2),\n"
      << "# odd components, radical-inverse point ordering. Built by mlqmc-dev cbc-lattice.\n"
      << d << "\n";
  for (auto z : g) out << z << "\n";
  std::cout << "wrote " << out_path << " (d=" << d << ", n=2^" << m << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// dsi-diag: brute-force Walsh-coefficient sums r_alpha(0) = sum_{k>=1}
// 2^{-mu_alpha(k)} where mu_alpha(k) adds the alpha largest bit positions of
// k (1-based, all of them if k has fewer). These are the diagonal values of
// the higher-order digitally-shift-invariant kernels, frozen as constants in
// kernels.cpp.
// ---------------------------------------------------------------------------
int dsi_diag(int argc, char** argv) {
  const int kmax_log2 = argc > 0 ? std::stoi(argv[0]) : 22;
  for (int alpha = 2; alpha <= 4; ++alpha) {
    double sum = 0.0;
    for (std::uint64_t k = 1; k < (std::uint64_t{1} << kmax_log2); ++k) {
      std::uint64_t v = k;
      int mu = 0;
      for (int c = 0; c < alpha && v; ++c) {
        const int msb = 63 - std::countl_zero(v);
        mu += msb + 1;
        v ^= std::uint64_t{1} << msb;
      }
      sum += std::ldexp(1.0, -mu);
    }
    std::cout << "alpha=" << alpha << "  partial sum (k < 2^" << kmax_log2
              << ") = " << std::setprecision(17) << sum << "\n";
  }
  std::cout << "exact: 3/2 = 1.5, 25/18 = " << std::setprecision(17) << 25.0 / 18.0
            << ", 407/294 = " << 407.0 / 294.0 << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// dsi-walsh: evaluates the defining Walsh series of the higher-order digital
// kernels, Rtilde_alpha(x) = sum_{k>=1} 2^{-mu_alpha(k)} wal_k(x), by brute
// force at a few dyadic x, next to closed-form candidates. Used to pin down
// the closed forms that ship in kernels.cpp.
// ---------------------------------------------------------------------------
int dsi_walsh(int argc, char** argv) {
  const int K = argc > 0 ? std::stoi(argv[0]) : 26;
  const int t = 20;
  struct Sample {
    const char* name;
    std::uint64_t x_bits;  // t-digit dyadic
  };
  const Sample xs[] = {
      {"1/2", std::uint64_t{1} << (t - 1)},   {"1/4", std::uint64_t{1} << (t - 2)},
      {"3/4", std::uint64_t{3} << (t - 2)},   {"1/8", std::uint64_t{1} << (t - 3)},
      {"5/8", std::uint64_t{5} << (t - 3)},   {"3/16", std::uint64_t{3} << (t - 4)},
      {"1/1024", std::uint64_t{1} << (t - 10)},
  };
  const int nx = sizeof(xs) / sizeof(xs[0]);

  // digit a of x pairs with bit a-1 of k
  std::uint64_t mask[nx];
  for (int s = 0; s < nx; ++s) {
    std::uint64_t m = 0;
    for (int a = 1; a <= t; ++a)
      if ((xs[s].x_bits >> (t - a)) & 1ULL) m |= std::uint64_t{1} << (a - 1);
    mask[s] = m;
  }

  double sums[3][nx] = {};
  for (std::uint64_t k = 1; k < (std::uint64_t{1} << K); ++k) {
    // prefix sums of the descending 1-based bit positions of k
    int prefix[5] = {0, 0, 0, 0, 0};
    std::uint64_t v = k;
    int nb = 0;
    while (v && nb < 4) {
      const int msb = 63 - std::countl_zero(v);
      prefix[nb + 1] = prefix[nb] + msb + 1;
      v ^= std::uint64_t{1} << msb;
      ++nb;
    }
    int mu[3];
    for (int c = 0; c < 3; ++c) mu[c] = prefix[std::min(c + 2, nb)];
    for (int s = 0; s < nx; ++s) {
      const double sign = std::popcount(k & mask[s]) & 1 ? -1.0 : 1.0;
      for (int c = 0; c < 3; ++c) sums[c][s] += sign * std::ldexp(1.0, -mu[c]);
    }
  }

  const auto closed = [&](int alpha, std::uint64_t xb) {
    const int msb = 63 - std::countl_zero(xb);
    const int beta = t - msb;
    const double x = std::ldexp(static_cast<double>(xb), -t);
    const double b = beta;
    const double t1 = std::ldexp(1.0, -beta), t2 = t1 * t1, t3 = t2 * t1;
    double s3 = 0.0;
    for (std::uint64_t w = xb; w;) {
      const int p = std::countr_zero(w);
      s3 += std::ldexp(1.0, -3 * (t - p - 1));
      w &= w - 1;
    }
    switch (alpha) {
      case 2:
        return -1.0 - b * x + 2.5 * (1.0 - t1);
      case 3:
        return -1.0 + b * x * x - 5.0 * (1.0 - t1) * x + (43.0 / 18.0) * (1.0 - t2);
      default:
        return -1.0 - (2.0 / 3.0) * b * x * x * x + 5.0 * (1.0 - t1) * x * x -
               (43.0 / 9.0) * (1.0 - t2) * x + (701.0 / 294.0) * (1.0 - t3) - b * s3 / 24.0;
    }
  };

  std::cout << std::setprecision(10);
  for (int c = 0; c < 3; ++c) {
    const int alpha = c + 2;
    std::cout << "alpha=" << alpha << "\n";
    for (int s = 0; s < nx; ++s) {
      const double w = sums[c][s];
      const double f = closed(alpha, xs[s].x_bits);
      std::cout << "  x=" << xs[s].name << "  walsh=" << w << "  closed=" << f
                << "  diff=" << w - f << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// ref-oracle: high-precision randomized-QMC reference values for the test
// problems without analytic means. 32 independent scrambles of 2^18 digital
// net points each; reports the mean of means and its standard error. The
// results are frozen as constants in problems.cpp. Also cross-checks the
// Johnson SU mean constant against a large IID sample.
// ---------------------------------------------------------------------------
int ref_oracle(int argc, char** argv) {
  using namespace mlqmc;
  const int m = argc > 0 ? std::stoi(argv[0]) : 18;
  const int R = argc > 1 ? std::stoi(argv[1]) : 32;
  const std::uint64_t n = std::uint64_t{1} << m;

  const auto rqmc = [&](const char* tag, int d, auto&& f) {
    RngStream rng = RngStream(20250808).child(tag);
    double acc = 0.0, acc2 = 0.0;
    for (int r = 0; r < R; ++r) {
      auto stream = rng.child(r + 1);
      auto gen = lms_scramble(take_dims(default_net(), d), stream);
      auto shift = random_digital_shift(d, gen.t, stream);
      double mean = 0.0;
      std::vector<double> x(d);
      const std::uint64_t block = 1 << 12;
      for (std::uint64_t i0 = 0; i0 < n; i0 += block) {
        auto pts = digital_net_points(gen, shift, i0, i0 + block);
        for (std::uint64_t i = 0; i < block; ++i) mean += f(pts.data() + i * d);
      }
      mean /= static_cast<double>(n);
      acc += mean;
      acc2 += mean * mean;
    }
    const double mu = acc / R;
    const double se = std::sqrt(std::max(acc2 - R * mu * mu, 0.0) / (R - 1) / R);
    std::cout << tag << " = " << std::setprecision(12) << mu << "  +- " << se << "\n";
  };

  rqmc("genz_cp2_d32", 32, [](const double* x) { return genz_corner_peak2(x, 32); });
  rqmc("elliptic_l4", 8, [](const double* x) { return elliptic_level(4, x); });
  rqmc("asian_l4_check", 64, [](const double* x) { return asian_level(4, x); });
  std::cout << "asian_l4_analytic = " << std::setprecision(12)
            << geometric_asian_price(100.0, 100.0, 0.05, 0.2, 64) << "\n";

  // JSU mean: 1e8 IID draws against the closed form
  RngStream z(7);
  double acc = 0.0;
  const std::int64_t big = 100000000;
  for (std::int64_t i = 0; i < big; ++i)
    acc += std::sinh(inv_normal_cdf(z.next_double() * (1.0 - 2e-16) + 1e-16) - 1.0);
  std::cout << "jsu_mean mc  = " << std::setprecision(12) << acc / big << "\n";
  std::cout << "jsu_mean ref = " << jsu_mean() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) return usage();
  const std::string cmd = argv[1];
  if (cmd == "sobol-expand") return sobol_expand(argc - 2, argv + 2);
  if (cmd == "cbc-lattice") return cbc_lattice(argc - 2, argv + 2);
  if (cmd == "dsi-diag") return dsi_diag(argc - 2, argv + 2);
  if (cmd == "dsi-walsh") return dsi_walsh(argc - 2, argv + 2);
  if (cmd == "ref-oracle") return ref_oracle(argc - 2, argv + 2);
  return usage();
}
