#pragma once

#include <cstdint>

namespace corrdet {

/// PCG-XSH-RR 32-bit generator (64-bit LCG state, multiplier
/// 6364136223846793005). Distribution samplers are written out here rather
/// than taken from <random> so seeded streams are identical on every platform.
class Pcg32 {
 public:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
  static constexpr std::uint64_t kDefaultStream = 1442695040888963407ULL;

  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = kDefaultStream);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound).
  std::uint32_t below(std::uint32_t bound);
  bool bernoulli(double p);
  /// Standard normal via the Box-Muller transform; the second variate is cached.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Poisson by Knuth's product method, split into chunks so large rates do not underflow.
  std::uint64_t poisson(double rate);

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; derives independent child seeds from (master, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace corrdet
