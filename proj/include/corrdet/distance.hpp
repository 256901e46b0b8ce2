#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "corrdet/stream.hpp"

namespace corrdet {

/// Pairwise Euclidean distances between per-sensor latent vectors at one step.
struct DistanceMatrix {
  Matrix d;  // n x n, symmetric, zero diagonal

  std::size_t size() const noexcept { return static_cast<std::size_t>(d.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  /// Row-major upper triangle, excluding the diagonal.
  std::vector<double> upper_triangle() const;
};

enum class FlagRule {
  AllOthers,  // flag i when it is far from every other sensor
  Majority,   // flag i when it is far from more than half of the others
};

struct Calibration {
  double distance_mean = 0.0;
  double distance_std = 0.0;
  double multiplier = 3.0;  // c
  double loss_quantile = 0.99;  // q
  std::size_t distance_samples = 0;
  std::size_t loss_samples = 0;
};

struct DetectorThresholds {
  double distance_threshold = 0.0;
  double loss_threshold = 0.0;  // unused on the PCA path
  Calibration calibration;
};

using Flags = std::vector<std::uint8_t>;

/// Latent vectors are the columns of `latents` (dim x n).
DistanceMatrix distance_matrix(const Matrix& latents);
DistanceMatrix distance_matrix(std::span<const Vector> latents);

/// distance_threshold = mean + c * std over every off-diagonal entry of the
/// training matrices; loss_threshold = q-quantile of `train_losses` (left at 0
/// when no losses are given). Both must come out strictly positive.
DetectorThresholds calibrate(std::span<const DistanceMatrix> train_matrices, double c,
                             std::span<const double> train_losses, double q);

/// Off-diagonal entries are compared with a strict `>`.
Flags classify(const DistanceMatrix& m, const DetectorThresholds& th,
               FlagRule rule = FlagRule::AllOthers);

/// 1 iff loss > loss_threshold (equality stays normal).
std::uint8_t loss_flag(double loss, const DetectorThresholds& th);

/// Elementwise OR of the distance and loss channels.
Flags ae_verdict(std::span<const std::uint8_t> from_distance,
                 std::span<const std::uint8_t> from_loss);

}  // namespace corrdet
