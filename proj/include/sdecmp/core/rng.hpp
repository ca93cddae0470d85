#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace sdecmp {

/// SplitMix64 finalizer; used to derive independent keys from a run seed.
std::uint64_t splitmix64(std::uint64_t x);

/// Key for a named sub-purpose (bootstrap, probes, ...) of a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The 64-bit key is the seed; the upper half of the 128-bit counter
/// selects the stream, the lower half counts blocks within it. Two
/// generators with the same (key, stream) produce identical sequences
/// regardless of how many other streams exist or in which order they run.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;

  Philox4x32(std::uint64_t key, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform01();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// One raw block: the bijection applied to (counter, key).
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> buffer_{};
  unsigned used_ = 4;
};

}  // namespace sdecmp
