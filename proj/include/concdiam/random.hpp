#pragma once

// Counter-based random numbers. Every stochastic output of the library is a
// pure function of (seed, stream, position), so results do not depend on the
// number of threads or on how work is chunked.

#include <array>
#include <cstdint>

namespace concdiam {

/// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as
/// 1, 2, 3", SC'11): maps a 128-bit counter and a 64-bit key to 128 random
/// bits. Matches the Random123 reference known-answer vectors.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
};

/// A sequence of uniforms addressed by (seed, stream). The key is the seed;
/// the counter is (position lo, position hi, stream lo, stream hi). Each block
/// yields two 64-bit words.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1): (top 53 bits + 0.5) * 2^-53.
  double next_uniform();

  /// Standard normal by inversion of next_uniform().
  double next_normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
};

/// Standard normal quantile Phi^{-1}(p) for 0 < p < 1 (Wichura's AS 241,
/// PPND16; relative accuracy about 1e-16). Returns -inf / +inf at 0 / 1 and
/// NaN outside [0, 1].
double normal_quantile(double p);

}  // namespace concdiam
