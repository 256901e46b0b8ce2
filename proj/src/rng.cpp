#include "corrdet/rng.hpp"

#include <cmath>
#include <numbers>

namespace corrdet {

Pcg32::Pcg32(std::uint64_t seed, std::uint64_t stream) : inc_((stream << 1U) | 1U) {
  next_u32();
  state_ += seed;
  next_u32();
}

std::uint32_t Pcg32::next_u32() {
  const std::uint64_t old = state_;
  state_ = old * kMultiplier + inc_;
  const auto xorshifted = static_cast<std::uint32_t>(((old >> 18U) ^ old) >> 27U);
  const auto rot = static_cast<std::uint32_t>(old >> 59U);
  return (xorshifted >> rot) | (xorshifted << ((32U - rot) & 31U));
}

std::uint64_t Pcg32::next_u64() {
  const std::uint64_t hi = next_u32();
  return (hi << 32U) | next_u32();
}

double Pcg32::uniform() {
  return static_cast<double>(next_u64() >> 11U) * 0x1.0p-53;
}

std::uint32_t Pcg32::below(std::uint32_t bound) {
  if (bound <= 1) return 0;
  // Rejection on the biased tail keeps the result exactly uniform.
  const std::uint32_t threshold = (0U - bound) % bound;
  for (;;) {
    const std::uint32_t r = next_u32();
    if (r >= threshold) return r % bound;
  }
}

bool Pcg32::bernoulli(double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform() < p;
}

double Pcg32::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t Pcg32::poisson(double rate) {
  if (rate <= 0.0) return 0;
  constexpr double kChunk = 500.0;
  std::uint64_t total = 0;
  while (rate > 0.0) {
    const double lambda = rate > kChunk ? kChunk : rate;
    rate -= lambda;
    const double limit = std::exp(-lambda);
    double product = uniform();
    while (product > limit) {
      ++total;
      product *= uniform();
    }
  }
  return total;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31U);
}

}  // namespace corrdet
