#include "mlqmc/ld_sequences.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mlqmc {

namespace {

std::uint64_t reverse_bits64(std::uint64_t v) {
  v = ((v >> 1) & 0x5555555555555555ULL) | ((v & 0x5555555555555555ULL) << 1);
  v = ((v >> 2) & 0x3333333333333333ULL) | ((v & 0x3333333333333333ULL) << 2);
  v = ((v >> 4) & 0x0f0f0f0f0f0f0f0fULL) | ((v & 0x0f0f0f0f0f0f0f0fULL) << 4);
  v = ((v >> 8) & 0x00ff00ff00ff00ffULL) | ((v & 0x00ff00ff00ff00ffULL) << 8);
  v = ((v >> 16) & 0x0000ffff0000ffffULL) | ((v & 0x0000ffff0000ffffULL) << 16);
  return (v >> 32) | (v << 32);
}

void check_lattice(const LatticeGen& gen) {
  if (gen.g.empty()) throw std::invalid_argument("lattice generating vector is empty");
  for (auto v : gen.g)
    if (v < 1) throw std::invalid_argument("lattice generating vector entries must be >= 1");
}

void check_net(const DigitalNetGen& gen) {
  if (gen.columns.empty()) throw std::invalid_argument("digital net has no dimensions");
  if (gen.t < 1 || gen.t > 64) throw std::invalid_argument("digital net precision t must be in [1,64]");
  if (gen.p_max < 1) throw std::invalid_argument("digital net needs at least one column");
  const std::uint64_t bound = gen.t == 64 ? ~0ULL : ((1ULL << gen.t) - 1);
  for (const auto& cols : gen.columns) {
    if (static_cast<int>(cols.size()) != gen.p_max)
      throw std::invalid_argument("digital net column count mismatch");
    for (auto c : cols)
      if (c > bound) throw std::invalid_argument("digital net column exceeds 2^t");
  }
}

}  // namespace

LatticeShift random_lattice_shift(int d, RngStream& rng) {
  LatticeShift s;
  s.delta.resize(d);
  for (auto& v : s.delta) v = rng.next_double52();
  return s;
}

DigitalShift random_digital_shift(int d, int t, RngStream& rng) {
  DigitalShift s;
  s.t = t;
  s.bits.resize(d);
  for (auto& v : s.bits) v = rng.next_bits(t);
  return s;
}

double radical_inverse(std::uint64_t i) {
  return std::ldexp(static_cast<double>(reverse_bits64(i)), -64);
}

void lattice_points(const LatticeGen& gen, const LatticeShift& shift,
                    std::uint64_t i_start, std::uint64_t i_end, double* out) {
  check_lattice(gen);
  const int d = gen.dim();
  if (shift.dim() != d) throw std::invalid_argument("lattice shift dimension mismatch");
  if (i_start > i_end) throw std::invalid_argument("i_start > i_end");
  for (std::uint64_t i = i_start; i < i_end; ++i) {
    const double v = radical_inverse(i);
    double* row = out + (i - i_start) * d;
    for (int j = 0; j < d; ++j) {
      const double p = v * static_cast<double>(gen.g[j]);
      double x = p - std::floor(p) + shift.delta[j];
      if (x >= 1.0) x -= 1.0;
      row[j] = x;
    }
  }
}

std::vector<double> lattice_points(const LatticeGen& gen, const LatticeShift& shift,
                                   std::uint64_t i_start, std::uint64_t i_end) {
  std::vector<double> out((i_end - i_start) * gen.dim());
  lattice_points(gen, shift, i_start, i_end, out.data());
  return out;
}

std::vector<double> lattice_points(const LatticeGen& gen, std::uint64_t i_start,
                                   std::uint64_t i_end) {
  LatticeShift zero;
  zero.delta.assign(gen.dim(), 0.0);
  return lattice_points(gen, zero, i_start, i_end);
}

void digital_net_points_int(const DigitalNetGen& gen, const DigitalShift& shift,
                            std::uint64_t i_start, std::uint64_t i_end,
                            std::uint64_t* out) {
  check_net(gen);
  const int d = gen.dim();
  if (shift.dim() != d) throw std::invalid_argument("digital shift dimension mismatch");
  if (shift.t != gen.t) throw std::invalid_argument("digital shift precision mismatch");
  if (i_start > i_end) throw std::invalid_argument("i_start > i_end");
  if (gen.p_max < 64 && i_end > (std::uint64_t{1} << gen.p_max))
    throw std::invalid_argument("index range exceeds 2^p_max points");
  for (std::uint64_t i = i_start; i < i_end; ++i) {
    std::uint64_t* row = out + (i - i_start) * d;
    for (int j = 0; j < d; ++j) {
      std::uint64_t z = 0;
      std::uint64_t bits = i;
      while (bits) {
        const int p = std::countr_zero(bits);
        z ^= gen.columns[j][p];
        bits &= bits - 1;
      }
      row[j] = z ^ shift.bits[j];
    }
  }
}

std::vector<std::uint64_t> digital_net_points_int(const DigitalNetGen& gen,
                                                  const DigitalShift& shift,
                                                  std::uint64_t i_start,
                                                  std::uint64_t i_end) {
  std::vector<std::uint64_t> out((i_end - i_start) * gen.dim());
  digital_net_points_int(gen, shift, i_start, i_end, out.data());
  return out;
}

std::vector<std::uint64_t> digital_net_points_int(const DigitalNetGen& gen,
                                                  std::uint64_t i_start,
                                                  std::uint64_t i_end) {
  DigitalShift zero;
  zero.t = gen.t;
  zero.bits.assign(gen.dim(), 0);
  return digital_net_points_int(gen, zero, i_start, i_end);
}

std::vector<double> digital_net_points(const DigitalNetGen& gen, const DigitalShift& shift,
                                       std::uint64_t i_start, std::uint64_t i_end) {
  auto ints = digital_net_points_int(gen, shift, i_start, i_end);
  std::vector<double> out(ints.size());
  for (std::size_t k = 0; k < ints.size(); ++k) out[k] = net_point_to_unit(ints[k], gen.t);
  return out;
}

LmsMatrices identity_lms(int d, int t_in, int t_out) {
  LmsMatrices m;
  m.t_in = t_in;
  m.t_out = t_out;
  m.rows.assign(d, std::vector<std::uint64_t>(t_out, 0));
  for (int j = 0; j < d; ++j)
    for (int r = 0; r < t_in && r < t_out; ++r) m.rows[j][r] = std::uint64_t{1} << r;
  return m;
}

LmsMatrices random_lms(int d, int t_in, int t_out, RngStream& rng) {
  if (t_out < t_in) throw std::invalid_argument("LMS output precision below input precision");
  LmsMatrices m;
  m.t_in = t_in;
  m.t_out = t_out;
  m.rows.assign(d, std::vector<std::uint64_t>(t_out, 0));
  for (int j = 0; j < d; ++j)
    for (int r = 0; r < t_out; ++r) {
      // digits s < min(r, t_in) random, unit diagonal at s == r < t_in
      const int nfree = r < t_in ? r : t_in;
      std::uint64_t row = nfree > 0 ? rng.next_bits(nfree) : 0;
      if (r < t_in) row |= std::uint64_t{1} << r;
      m.rows[j][r] = row;
    }
  return m;
}

DigitalNetGen apply_lms(const DigitalNetGen& gen, const LmsMatrices& matrices) {
  check_net(gen);
  if (matrices.t_in != gen.t) throw std::invalid_argument("LMS input precision mismatch");
  if (static_cast<int>(matrices.rows.size()) != gen.dim())
    throw std::invalid_argument("LMS dimension mismatch");
  DigitalNetGen out;
  out.t = matrices.t_out;
  out.p_max = gen.p_max;
  out.columns.assign(gen.dim(), std::vector<std::uint64_t>(gen.p_max, 0));
  for (int j = 0; j < gen.dim(); ++j)
    for (int p = 0; p < gen.p_max; ++p) {
      // digit s of the input column, s = 0 most significant, lives at bit
      // (t-1-s); re-pack with digit s at bit s for the row masks
      std::uint64_t cdig = 0;
      for (int s = 0; s < gen.t; ++s)
        cdig |= ((gen.columns[j][p] >> (gen.t - 1 - s)) & 1ULL) << s;
      std::uint64_t res = 0;
      for (int r = 0; r < matrices.t_out; ++r) {
        const std::uint64_t bit = std::popcount(matrices.rows[j][r] & cdig) & 1U;
        res |= bit << (matrices.t_out - 1 - r);
      }
      out.columns[j][p] = res;
    }
  return out;
}

DigitalNetGen lms_scramble(const DigitalNetGen& gen, RngStream& rng, int t_out) {
  return apply_lms(gen, random_lms(gen.dim(), gen.t, t_out, rng));
}

namespace {

// Reads the next non-comment, non-blank line; returns false at EOF.
bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    std::size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    if (line[pos] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

std::variant<LatticeGen, DigitalNetGen> parse_ld_data(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open generator file: " + path);
  std::string line;
  if (!next_data_line(in, line)) throw std::runtime_error("empty generator file: " + path);

  std::istringstream header(line);
  long long h0 = 0, h1 = 0, h2 = 0;
  header >> h0;
  if (!header) throw std::runtime_error("malformed generator header: " + path);
  const bool is_net = static_cast<bool>(header >> h1 >> h2);

  if (!is_net) {
    // lattice: d, then one integer per line
    if (h0 < 1) throw std::runtime_error("lattice dimension must be positive: " + path);
    LatticeGen gen;
    gen.g.reserve(static_cast<std::size_t>(h0));
    for (long long j = 0; j < h0; ++j) {
      if (!next_data_line(in, line))
        throw std::runtime_error("truncated lattice file: " + path);
      std::istringstream row(line);
      std::uint64_t v = 0;
      row >> v;
      if (!row || v < 1) throw std::runtime_error("malformed lattice entry: " + path);
      gen.g.push_back(v);
    }
    check_lattice(gen);
    return gen;
  }

  // net: d p_max t, then d rows of p_max column integers
  DigitalNetGen gen;
  if (h0 < 1 || h1 < 1 || h2 < 1 || h2 > 64)
    throw std::runtime_error("malformed net header: " + path);
  gen.p_max = static_cast<int>(h1);
  gen.t = static_cast<int>(h2);
  gen.columns.reserve(static_cast<std::size_t>(h0));
  for (long long j = 0; j < h0; ++j) {
    if (!next_data_line(in, line)) throw std::runtime_error("truncated net file: " + path);
    std::istringstream row(line);
    std::vector<std::uint64_t> cols(gen.p_max);
    for (int p = 0; p < gen.p_max; ++p) {
      row >> cols[p];
      if (!row) throw std::runtime_error("truncated net row: " + path);
    }
    gen.columns.push_back(std::move(cols));
  }
  check_net(gen);
  return gen;
}

LatticeGen load_lattice(const std::string& path) {
  auto v = parse_ld_data(path);
  if (auto* g = std::get_if<LatticeGen>(&v)) return std::move(*g);
  throw std::runtime_error("not a lattice generator file: " + path);
}

DigitalNetGen load_net(const std::string& path) {
  auto v = parse_ld_data(path);
  if (auto* g = std::get_if<DigitalNetGen>(&v)) return std::move(*g);
  throw std::runtime_error("not a digital net generator file: " + path);
}

namespace {

std::string data_dir() {
  if (const char* env = std::getenv("MLQMC_DATA_DIR")) return env;
  return MLQMC_DATA_DIR;
}

}  // namespace

const LatticeGen& default_lattice() {
  static const LatticeGen gen = load_lattice(data_dir() + "/lattice_cbc_d64_n16.txt");
  return gen;
}

const DigitalNetGen& default_net() {
  static const DigitalNetGen gen = load_net(data_dir() + "/sobol_joe_kuo_d6_64_m32.colmat.txt");
  return gen;
}

LatticeGen take_dims(const LatticeGen& gen, int d) {
  if (d < 1 || d > gen.dim())
    throw std::invalid_argument("requested lattice dimension exceeds generator file");
  LatticeGen out;
  out.g.assign(gen.g.begin(), gen.g.begin() + d);
  return out;
}

DigitalNetGen take_dims(const DigitalNetGen& gen, int d) {
  if (d < 1 || d > gen.dim())
    throw std::invalid_argument("requested net dimension exceeds generator file");
  DigitalNetGen out;
  out.t = gen.t;
  out.p_max = gen.p_max;
  out.columns.assign(gen.columns.begin(), gen.columns.begin() + d);
  return out;
}

}  // namespace mlqmc
