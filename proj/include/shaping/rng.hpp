#pragma once

#include <cstdint>
#include <vector>

namespace shaping {

/// Deterministic, platform-independent pseudo-random stream.
///
/// The generator is xoshiro256** (Blackman & Vigna) seeded through the
/// splitmix64 finalizer. Identical seeds produce identical streams on any
/// platform; child streams are derived from the *seed*, not the draw
/// position, so splitting is independent of how much the parent has drawn.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  /// Uniform integer in [0, n). Rejection sampled, bias-free.
  int uniform_int(int n);

  /// Standard normal via Box-Muller; consumes exactly two uniform draws.
  double normal();

  /// Derived stream keyed by `key`; a pure function of (seed, key).
  Rng child(std::uint64_t key) const;

  std::uint64_t seed() const { return seed_; }

  /// Stateless seed derivation used for episode/agent stream keys.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t key);

private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

}  // namespace shaping
