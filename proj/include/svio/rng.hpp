#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace svio {

/// SplitMix64 finalizer.
inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based SplitMix64: draw k of a stream is
///   mix(key + (k + 1) * 0x9E3779B97F4A7C15),  key = mix(seed ^ mix(stream)).
/// Any draw is addressable directly, so results never depend on call order.
class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(splitmix64_mix(seed ^ splitmix64_mix(stream))) {}

  constexpr std::uint64_t bits(std::uint64_t k) const {
    return splitmix64_mix(key_ + (k + 1) * kGamma);
  }

  /// Uniform in [0, 1) from the top 53 bits.
  constexpr double uniform(std::uint64_t k) const {
    return static_cast<double>(bits(k) >> 11) * 0x1.0p-53;
  }

  /// Standard normal by Box-Muller over draws 2k and 2k+1.
  double gaussian(std::uint64_t k) const {
    const double u1 = 1.0 - uniform(2 * k);  // (0, 1]
    const double u2 = uniform(2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_;
};

/// Named streams so independent consumers of one seed never share draws.
namespace rng_stream {
inline constexpr std::uint64_t kMiscalibration = 1;
inline constexpr std::uint64_t kDesyncJitter = 2;
inline constexpr std::uint64_t kImuDrop = 3;
inline constexpr std::uint64_t kFrameDrop = 4;
inline constexpr std::uint64_t kLandmarks = 10;
inline constexpr std::uint64_t kDynamic = 11;
inline constexpr std::uint64_t kGyroNoise = 12;
inline constexpr std::uint64_t kAccelNoise = 13;
inline constexpr std::uint64_t kTrajectory = 14;
}  // namespace rng_stream

}  // namespace svio
