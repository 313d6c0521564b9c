#pragma once

#include <cstdint>

#include "pweight/numkit.hpp"

namespace pweight {

/// Counter-based generator: splitmix64 output function applied to
/// seed-offset counters.  Stateless per draw, so streams are reproducible
/// across platforms and trivially parallel — draw k of a run depends only
/// on (seed, k).  Normals go through the inverse CDF, which keeps them
/// deterministic as well (no Box-Muller libm variance).
class CounterRng {
 public:
  static constexpr const char* kName = "splitmix64-counter";

  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t raw(std::uint64_t counter) const {
    std::uint64_t z = seed_ + (counter + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on the open interval (0, 1).
  double uniform01(std::uint64_t counter) const {
    return static_cast<double>(raw(counter) >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  double normal(std::uint64_t counter) const { return std_normal_quantile(uniform01(counter)); }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace pweight
