#pragma once

#include <span>
#include <vector>

namespace corrdet {

double mean_of(std::span<const double> values);
/// Population standard deviation (divides by n).
double stddev_of(std::span<const double> values);
/// Linearly interpolated quantile, q in [0, 1]; matches the usual "type 7" definition.
double quantile_of(std::vector<double> values, double q);
double median_of(std::vector<double> values);

}  // namespace corrdet
