#pragma once

#include <array>
#include <cstdint>

namespace grabit {

/// SplitMix64 step: advances `state` and returns the next output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministic seed for a named substream, obtained by chaining SplitMix64
/// over (seed, replication, role).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replication, std::uint64_t role);

/// xoshiro256** generator (Blackman & Vigna), seeded through SplitMix64.
/// Uniforms use the top 53 bits; normals use the Box-Muller transform and
/// return both values of each pair in turn. Output is identical on every
/// platform with IEEE doubles and a correctly rounded libm log/sin/cos.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  std::array<std::uint64_t, 4> s_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace grabit
