#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ksgm {

// Random streams
// --------------
// Engine: std::mt19937_64 (output sequence fixed by the C++ standard).
// uniform(): top 53 bits of one engine draw, scaled to [0, 1).
// normal():  Box-Muller, consuming two uniforms per pair and returning the
//            cosine branch first, then the cached sine branch.
// Streams:   derive_seed(root, a, b) folds the root seed and two stream
//            coordinates through SplitMix64 so that every (replicate, purpose)
//            pair owns an independent engine.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(root) ^ a) ^ (b * 0xD1B54A32D192ED03ull));
}

// Stream purposes within one replicate.
namespace stream {
inline constexpr std::uint64_t path = 1;
inline constexpr std::uint64_t transition = 2;
inline constexpr std::uint64_t permutation = 3;
inline constexpr std::uint64_t subject_base = 1000;
}  // namespace stream

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  //! Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace ksgm
