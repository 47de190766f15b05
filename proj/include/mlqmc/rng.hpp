#pragma once

#include <cstdint>
#include <string_view>

namespace mlqmc {

/// SplitMix64 finalizer. Bijective on 64-bit words.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream with hierarchical keying.
///
/// The k-th output is mix64(key + k*gamma), so a stream is a pure function of
/// its key and the draw index: adding or removing *other* streams never
/// perturbs it. Independent streams are derived with child(), keyed by a tag
/// (trial index, level, purpose string, ...). This is what makes experiment
/// output a pure function of (seed, config) regardless of thread scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key = 0) : key_(mix64(key ^ kSalt)) {}

  [[nodiscard]] RngStream child(std::uint64_t tag) const {
    RngStream s;
    s.key_ = mix64(key_ ^ mix64(tag + 0x632be59bd9b4e019ULL));
    return s;
  }
  [[nodiscard]] RngStream child(std::string_view name) const {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (char c : name) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
    return child(h);
  }

  std::uint64_t next_u64() { return mix64(key_ + kGamma * ++counter_); }

  /// Uniform double in [0,1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform over the dyadic grid {k 2^-52 : 0 <= k < 2^52}. Lattice shifts
  /// are drawn from this grid so that shifted points stay exactly
  /// representable and shift cancellation is bit-exact.
  double next_double52() { return static_cast<double>(next_u64() >> 12) * 0x1.0p-52; }

  /// Uniform t-bit word, t <= 64.
  std::uint64_t next_bits(int t) {
    return t == 64 ? next_u64() : (next_u64() >> (64 - t));
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kSalt = 0x5851f42d4c957f2dULL;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace mlqmc
