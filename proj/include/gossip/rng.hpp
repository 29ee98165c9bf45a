#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace gossip {

/// SplitMix64 output function. Used to whiten user seeds and to derive
/// independent stream seeds from (seed, trial, label) tuples.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// 64-bit FNV-1a hash.
constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seeded random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The variates (uniform doubles, bounded integers, normals) are
/// computed here instead of through <random> distributions, whose algorithms
/// are implementation-defined, so a seed yields the same stream with every
/// standard library.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Stream for `label` in trial `trial` of an experiment seeded with `master`.
  static Rng derive(std::uint64_t master, std::uint64_t trial, std::string_view label) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ trial);
    h = splitmix64(h ^ fnv1a(label));
    return Rng(h);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound). Unbiased by rejection.
  std::size_t uniform_index(std::size_t bound) {
    const std::uint64_t b = bound;
    const std::uint64_t threshold = (0 - b) % b;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return static_cast<std::size_t>(r % b);
    }
  }

  /// Standard normal via the Marsaglia polar method.
  double normal() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    return u * f;
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace gossip
