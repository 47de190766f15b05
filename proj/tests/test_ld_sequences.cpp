#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>
#include <set>
#include <vector>

#include "doctest.h"
#include "mlqmc/ld_sequences.hpp"
#include "mlqmc/rng.hpp"

using namespace mlqmc;

namespace {

DigitalNetGen identity_net(int d, int t, int p_max) {
  DigitalNetGen g;
  g.t = t;
  g.p_max = p_max;
  g.columns.assign(d, std::vector<std::uint64_t>(p_max, 0));
  for (int j = 0; j < d; ++j)
    for (int p = 0; p < p_max; ++p) g.columns[j][p] = std::uint64_t{1} << (t - 1 - p);
  return g;
}

LatticeShift zero_shift(int d) {
  LatticeShift s;
  s.delta.assign(d, 0.0);
  return s;
}

}  // namespace

TEST_CASE("radical inverse reflects the binary digits") {
  CHECK(radical_inverse(0) == 0.0);
  CHECK(radical_inverse(1) == 0.5);
  CHECK(radical_inverse(6) == 0.375);  // 110 -> 0.011
}

TEST_CASE("small lattice points by hand") {
  LatticeGen gen{{1, 3}};
  auto p = lattice_points(gen, zero_shift(2), 0, 2);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == 0.0);
  CHECK(p[2] == 0.5);
  CHECK(p[3] == 0.5);  // 0.5*3 mod 1

  LatticeShift s;
  s.delta = {0.2, 0.2};
  auto q = lattice_points(gen, s, 1, 2);
  CHECK(q[0] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(q[1] == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("lattice shift cancellation is bit-exact for dyadic shifts") {
  const auto gen = take_dims(default_lattice(), 5);
  RngStream rng(41);
  auto shift = random_lattice_shift(5, rng);
  const int n = 64;
  auto x = lattice_points(gen, shift, 0, n);
  auto z = lattice_points(gen, 0, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 5; ++j) {
      double diff = x[i * 5 + j] - x[j];  // x_0 = delta
      if (diff < 0.0) diff += 1.0;
      CHECK(diff == z[i * 5 + j]);
    }
}

TEST_CASE("identity generating matrices recover van der Corput") {
  auto gen = identity_net(1, 16, 10);
  DigitalShift zero{std::vector<std::uint64_t>(1, 0), 16};
  auto p = digital_net_points(gen, zero, 0, 4);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == 0.5);
  CHECK(p[2] == 0.25);
  CHECK(p[3] == 0.75);
}

TEST_CASE("digital shift by a point's own digits sends it to zero") {
  const auto gen = take_dims(default_net(), 3);
  auto z = digital_net_points_int(gen, 5, 6);
  DigitalShift s{{z[0], z[1], z[2]}, gen.t};
  auto x = digital_net_points_int(gen, s, 5, 6);
  CHECK(x[0] == 0);
  CHECK(x[1] == 0);
  CHECK(x[2] == 0);
}

TEST_CASE("net shift cancellation is bit-exact") {
  const auto gen = take_dims(default_net(), 4);
  RngStream rng(17);
  auto shift = random_digital_shift(4, gen.t, rng);
  const int n = 128;
  auto x = digital_net_points_int(gen, shift, 0, n);
  auto z = digital_net_points_int(gen, 0, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 4; ++j) CHECK((x[i * 4 + j] ^ x[j]) == z[i * 4 + j]);
}

TEST_CASE("extensibility: earlier rows never change") {
  const auto lat = take_dims(default_lattice(), 3);
  auto a = lattice_points(lat, 0, 32);
  auto b = lattice_points(lat, 0, 64);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);

  const auto net = take_dims(default_net(), 3);
  auto c = digital_net_points_int(net, 0, 32);
  auto d = digital_net_points_int(net, 0, 64);
  for (std::size_t k = 0; k < c.size(); ++k) CHECK(c[k] == d[k]);
}

TEST_CASE("index range past 2^p_max is rejected") {
  auto gen = identity_net(1, 16, 3);
  DigitalShift zero{std::vector<std::uint64_t>(1, 0), 16};
  CHECK_NOTHROW(digital_net_points(gen, zero, 0, 8));
  CHECK_THROWS_AS(digital_net_points(gen, zero, 0, 9), std::invalid_argument);
}

TEST_CASE("every 1-d projection of the embedded net is fully stratified") {
  const auto& gen = default_net();
  for (int j = 0; j < gen.dim(); ++j) {
    auto one = take_dims(gen, j + 1);
    for (int m = 1; m <= 10; ++m) {
      const std::uint64_t n = std::uint64_t{1} << m;
      auto z = digital_net_points_int(one, 0, n);
      std::set<std::uint64_t> cells;
      for (std::uint64_t i = 0; i < n; ++i)
        cells.insert(z[i * (j + 1) + j] >> (gen.t - m));
      CHECK(cells.size() == n);  // one point per dyadic interval of width 2^-m
    }
  }
}

TEST_CASE("leading pair of the embedded net is a (0,m,2)-net") {
  const auto gen = take_dims(default_net(), 2);
  const int m = 8;
  const std::uint64_t n = std::uint64_t{1} << m;
  auto z = digital_net_points_int(gen, 0, n);
  for (int a = 0; a <= m; ++a) {
    const int b = m - a;
    std::set<std::uint64_t> cells;
    for (std::uint64_t i = 0; i < n; ++i) {
      const std::uint64_t ca = a ? (z[i * 2] >> (gen.t - a)) : 0;
      const std::uint64_t cb = b ? (z[i * 2 + 1] >> (gen.t - b)) : 0;
      cells.insert((ca << b) | cb);
    }
    CHECK(cells.size() == n);
  }
}

TEST_CASE("identity scramble leaves the net unchanged") {
  const auto gen = take_dims(default_net(), 4);
  auto same = apply_lms(gen, identity_lms(4, gen.t, gen.t));
  CHECK(same.columns == gen.columns);

  // widening to more digits only appends zeros below the old precision
  auto wide = apply_lms(gen, identity_lms(4, gen.t, 52));
  for (int j = 0; j < 4; ++j)
    for (int p = 0; p < gen.p_max; ++p)
      CHECK(wide.columns[j][p] == gen.columns[j][p] << (52 - gen.t));
}

TEST_CASE("LMS preserves 1-d stratification") {
  const auto gen = take_dims(default_net(), 4);
  RngStream rng(99);
  auto scrambled = lms_scramble(gen, rng, 52);
  CHECK(scrambled.t == 52);
  for (int j = 0; j < 4; ++j)
    for (int m = 1; m <= 8; ++m) {
      const std::uint64_t n = std::uint64_t{1} << m;
      auto z = digital_net_points_int(scrambled, 0, n);
      std::set<std::uint64_t> cells;
      for (std::uint64_t i = 0; i < n; ++i) cells.insert(z[i * 4 + j] >> (52 - m));
      CHECK(cells.size() == n);
    }
}

TEST_CASE("scrambling is deterministic given the stream") {
  const auto gen = take_dims(default_net(), 3);
  RngStream a(123), b(123);
  auto s1 = lms_scramble(gen, a, 52);
  auto s2 = lms_scramble(gen, b, 52);
  CHECK(s1.columns == s2.columns);
}

TEST_CASE("embedded default generators load with the promised sizes") {
  const auto& lat = default_lattice();
  CHECK(lat.dim() >= 32);
  const auto& net = default_net();
  CHECK(net.dim() >= 64);
  CHECK(net.p_max >= 21);
  CHECK_THROWS_AS(take_dims(lat, lat.dim() + 1), std::invalid_argument);
}

TEST_CASE("parser rejects malformed and truncated files") {
  const char* path = "tmp_trunc_lattice.txt";
  {
    std::ofstream f(path);
    f << "# truncated on purpose\n8\n1\n17\n";
  }
  CHECK_THROWS_AS(parse_ld_data(path), std::runtime_error);
  std::remove(path);

  const char* npath = "tmp_trunc_net.txt";
  {
    std::ofstream f(npath);
    f << "2 4 8\n128 64 32 16\n128 64\n";
  }
  CHECK_THROWS_AS(parse_ld_data(npath), std::runtime_error);
  std::remove(npath);

  CHECK_THROWS_AS(parse_ld_data("does_not_exist.txt"), std::runtime_error);
}

TEST_CASE("random shifts average a smooth function toward its integral") {
  // E[f] over U[0,1)^2 for f = x1 * x2 is 1/4
  const auto gen = take_dims(default_net(), 2);
  RngStream rng(2024);
  double acc = 0.0;
  const int n_shifts = 64, n = 256;
  for (int s = 0; s < n_shifts; ++s) {
    auto shift = random_digital_shift(2, gen.t, rng);
    auto x = digital_net_points(gen, shift, 0, n);
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += x[i * 2] * x[i * 2 + 1];
    acc += mean / n;
  }
  CHECK(acc / n_shifts == doctest::Approx(0.25).epsilon(5e-3));
}
