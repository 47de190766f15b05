#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace mlqmc {

/// Orthonormal transforms that diagonalize Gram matrices of matched
/// (sequence, kernel) pairs when the points are kept in radical-inverse
/// order:
///
///   - fwht: Walsh-Hadamard transform in natural order, scaled so each
///     butterfly is ((u+v)/sqrt2, (u-v)/sqrt2). Real, symmetric, and its own
///     inverse. Diagonalizes digital-net Gram matrices.
///   - fftbr: orthonormal DFT with bit-reverse-permuted columns, i.e. a
///     decimation-in-time FFT that consumes radical-inverse-ordered input
///     with no separate permutation pass. Diagonalizes lattice Gram
///     matrices: K = E diag(lambda) Ebar with Ebar a = fftbr(a),
///     E a = ifftbr(a), lambda = sqrt(n) * fftbr(K[:,0]).
///
/// All transforms are in place on a caller-owned buffer whose length must be
/// a power of two, and are safe to run concurrently on distinct buffers.

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Floor of log2(n) for n >= 1.
int log2_exact(std::size_t n);

void fwht(std::span<double> a);

void fftbr(std::span<std::complex<double>> a);
void ifftbr(std::span<std::complex<double>> a);

}  // namespace mlqmc
