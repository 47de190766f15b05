#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mlqmc/rng.hpp"

namespace mlqmc {

/// Extensible low-discrepancy sequences in radical-inverse (van der Corput)
/// order: rank-1 lattices and base-2 digital nets. Generators are immutable
/// after construction and point generation is pure, so one generator may be
/// shared across threads.

/// Rank-1 lattice generating vector.
struct LatticeGen {
  std::vector<std::uint64_t> g;  // all entries >= 1
  int dim() const { return static_cast<int>(g.size()); }
};

/// Base-2 digital net generating matrices. columns[j][p] packs the p-th
/// column of dimension j's generating matrix as a t-bit integer whose most
/// significant bit is the first binary digit. Supports up to 2^p_max points.
struct DigitalNetGen {
  std::vector<std::vector<std::uint64_t>> columns;  // [d][p_max], each < 2^t
  int t = 0;      // digits retained, 1 <= t <= 64
  int p_max = 0;  // number of columns
  int dim() const { return static_cast<int>(columns.size()); }
};

/// Mod-1 shift for lattices. Entries are drawn on the 52-bit dyadic grid so
/// that shifting and un-shifting are exact in double precision.
struct LatticeShift {
  std::vector<double> delta;  // entries in [0,1)
  int dim() const { return static_cast<int>(delta.size()); }
};

/// Digital (XOR) shift for nets, one t-bit word per dimension.
struct DigitalShift {
  std::vector<std::uint64_t> bits;  // each < 2^t
  int t = 0;
  int dim() const { return static_cast<int>(bits.size()); }
};

LatticeShift random_lattice_shift(int d, RngStream& rng);
DigitalShift random_digital_shift(int d, int t, RngStream& rng);

/// van der Corput radical inverse: i = sum_p i_p 2^p -> sum_p i_p 2^(-p-1).
double radical_inverse(std::uint64_t i);

/// Shifted lattice points x_i = (v(i) g + delta) mod 1 for i in
/// [i_start, i_end), written row-major into out (size (i_end-i_start)*d).
/// Extending the range never changes earlier rows.
void lattice_points(const LatticeGen& gen, const LatticeShift& shift,
                    std::uint64_t i_start, std::uint64_t i_end, double* out);
std::vector<double> lattice_points(const LatticeGen& gen, const LatticeShift& shift,
                                   std::uint64_t i_start, std::uint64_t i_end);
/// Unshifted points z_i.
std::vector<double> lattice_points(const LatticeGen& gen, std::uint64_t i_start,
                                   std::uint64_t i_end);

/// Digitally-shifted net points as t-bit integers: XOR of the columns
/// selected by the bits of i, XOR the shift. Row-major (i_end-i_start) x d.
void digital_net_points_int(const DigitalNetGen& gen, const DigitalShift& shift,
                            std::uint64_t i_start, std::uint64_t i_end,
                            std::uint64_t* out);
std::vector<std::uint64_t> digital_net_points_int(const DigitalNetGen& gen,
                                                  const DigitalShift& shift,
                                                  std::uint64_t i_start,
                                                  std::uint64_t i_end);
std::vector<std::uint64_t> digital_net_points_int(const DigitalNetGen& gen,
                                                  std::uint64_t i_start,
                                                  std::uint64_t i_end);
/// Same points mapped to [0,1) as integer / 2^t.
std::vector<double> digital_net_points(const DigitalNetGen& gen, const DigitalShift& shift,
                                       std::uint64_t i_start, std::uint64_t i_end);

inline double net_point_to_unit(std::uint64_t z, int t) {
  return std::ldexp(static_cast<double>(z), -t);
}

/// One lower-triangular unit-diagonal GF(2) scramble matrix per dimension.
/// rows[j][r] holds row r of dimension j's matrix with digit s at bit s
/// (s <= r); row r of the scrambled column is the parity of rows[j][r] AND
/// the input column digits.
struct LmsMatrices {
  std::vector<std::vector<std::uint64_t>> rows;  // [d][t_out]
  int t_in = 0;
  int t_out = 0;
};

LmsMatrices random_lms(int d, int t_in, int t_out, RngStream& rng);
LmsMatrices identity_lms(int d, int t_in, int t_out);

/// Left-multiplies every generating-matrix column by the per-dimension
/// scramble matrix over GF(2). Output precision is matrices.t_out.
DigitalNetGen apply_lms(const DigitalNetGen& gen, const LmsMatrices& matrices);

/// Random linear matrix scramble; deterministic given the stream state.
DigitalNetGen lms_scramble(const DigitalNetGen& gen, RngStream& rng, int t_out = 52);

/// Plain-text generator files (see README for the exact grammar):
///   lattice: '#' comments, then d, then one integer per line;
///   net:     '#' comments, then "d p_max t", then d rows of p_max columns.
std::variant<LatticeGen, DigitalNetGen> parse_ld_data(const std::string& path);

LatticeGen load_lattice(const std::string& path);
DigitalNetGen load_net(const std::string& path);

/// Generators embedded with the repository (data/ directory; override the
/// location with the MLQMC_DATA_DIR environment variable).
const LatticeGen& default_lattice();
const DigitalNetGen& default_net();

/// First d dimensions of a generator; throws if d exceeds what the file
/// provides (requests are never wrapped).
LatticeGen take_dims(const LatticeGen& gen, int d);
DigitalNetGen take_dims(const DigitalNetGen& gen, int d);

}  // namespace mlqmc
