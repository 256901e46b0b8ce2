#include "corrdet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "corrdet/error.hpp"

namespace corrdet {

double mean_of(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double stddev_of(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double mu = mean_of(values);
  double acc = 0.0;
  for (double v : values) acc += (v - mu) * (v - mu);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

double quantile_of(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::EmptyCalibration, "quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorKind::InvalidConfig, "quantile outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median_of(std::vector<double> values) { return quantile_of(std::move(values), 0.5); }

}  // namespace corrdet
