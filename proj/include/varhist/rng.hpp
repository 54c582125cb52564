#pragma once

#include <cstdint>
#include <random>

namespace varhist {

/// splitmix64 step; used to derive well-mixed seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministic 64-bit generator (mt19937_64).  Every iteration of a run
/// draws from its own stream seeded from (run seed, iteration), so retries
/// inside one iteration never shift the numbers of later iterations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  static Rng forIteration(std::uint64_t seed, std::int64_t iteration);

  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);
  /// Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace varhist
