#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace railwarn {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

/// Portable random stream. The engine is std::mt19937_64, whose output is
/// fixed by the standard; the transforms to uniform and normal variates are
/// done here so results do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for a (seed, label) pair; adding labels never
  /// perturbs other streams.
  static Rng stream(std::uint64_t seed, std::string_view label);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller; the spare variate is not cached.
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace railwarn
