#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ddgan {

// Counter-based random numbers. Every draw is a pure function of
// (seed, stream, counter), so partitioned and serial generation agree bitwise
// and no generator state has to be threaded through the code.
//
// The hash is the SplitMix64 finalizer applied twice: once to fold the stream
// into the seed, once to mix the counter. Uniform doubles take the top 53 bits.

namespace rng_streams {
inline constexpr std::uint64_t dataset = 1;
inline constexpr std::uint64_t init = 2;
inline constexpr std::uint64_t test_points = 3;
inline constexpr std::uint64_t gradient_penalty = 4;
inline constexpr std::uint64_t shuffle = 5;
}  // namespace rng_streams

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL))) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return splitmix64(key_ ^ splitmix64(counter));
  }

  /// Uniform in [0, 1).
  constexpr double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  double uniform(std::uint64_t counter, double lo, double hi) const noexcept {
    return lo + (hi - lo) * uniform(counter);
  }

  /// Standard normal via Box-Muller; consumes counters 2k and 2k+1.
  double normal(std::uint64_t k) const noexcept {
    const double u1 = 1.0 - uniform(2 * k);  // (0, 1]
    const double u2 = uniform(2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_;
};

}  // namespace ddgan
