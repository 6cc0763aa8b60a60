#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace bodyio {

/// Seeded random source with a fully specified output sequence.
///
/// Raw bits come from std::mt19937_64 (whose sequence the C++ standard
/// pins). Uniforms take the top 53 bits: u = (x >> 11) * 2^-53, in [0, 1).
/// Normals use the Box-Muller transform on (u1, u2) with u1 mapped to
/// (0, 1] via 1 - u1, returning r*cos(2 pi u2) and caching r*sin(2 pi u2)
/// for the next call. std::normal_distribution is avoided because its
/// algorithm differs between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : bits() % n; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; derives independent stream seeds from (seed, key).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (key + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace bodyio
