#include "corrdet/distance.hpp"

#include <cmath>
#include <string>

#include "corrdet/error.hpp"
#include "corrdet/stats.hpp"

namespace corrdet {

std::vector<double> DistanceMatrix::upper_triangle() const {
  std::vector<double> out;
  const auto n = d.rows();
  out.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) out.push_back(d(i, j));
  }
  return out;
}

DistanceMatrix distance_matrix(const Matrix& latents) {
  const auto n = latents.cols();
  if (n < 2) throw Error(ErrorKind::DimMismatch, "distance matrix needs at least two sensors");
  DistanceMatrix m;
  m.d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dist = (latents.col(i) - latents.col(j)).norm();
      m.d(i, j) = dist;
      m.d(j, i) = dist;
    }
  }
  return m;
}

DistanceMatrix distance_matrix(std::span<const Vector> latents) {
  if (latents.size() < 2) {
    throw Error(ErrorKind::DimMismatch, "distance matrix needs at least two sensors");
  }
  const auto dim = latents.front().size();
  Matrix cols(dim, static_cast<Eigen::Index>(latents.size()));
  for (std::size_t i = 0; i < latents.size(); ++i) {
    if (latents[i].size() != dim) {
      throw Error(ErrorKind::DimMismatch, "latent " + std::to_string(i) + " has dimension " +
                                              std::to_string(latents[i].size()) + ", expected " +
                                              std::to_string(dim));
    }
    cols.col(static_cast<Eigen::Index>(i)) = latents[i];
  }
  return distance_matrix(cols);
}

DetectorThresholds calibrate(std::span<const DistanceMatrix> train_matrices, double c,
                             std::span<const double> train_losses, double q) {
  std::vector<double> entries;
  for (const auto& m : train_matrices) {
    const auto n = m.d.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i != j) entries.push_back(m.d(i, j));
      }
    }
  }
  if (entries.empty()) {
    throw Error(ErrorKind::EmptyCalibration, "no off-diagonal training distances");
  }
  DetectorThresholds th;
  th.calibration.distance_mean = mean_of(entries);
  th.calibration.distance_std = stddev_of(entries);
  th.calibration.multiplier = c;
  th.calibration.loss_quantile = q;
  th.calibration.distance_samples = entries.size();
  th.calibration.loss_samples = train_losses.size();
  th.distance_threshold = th.calibration.distance_mean + c * th.calibration.distance_std;
  if (!(th.distance_threshold > 0.0)) {
    throw Error(ErrorKind::EmptyCalibration, "distance threshold is not positive");
  }
  if (!train_losses.empty()) {
    th.loss_threshold = quantile_of(std::vector<double>(train_losses.begin(), train_losses.end()), q);
    if (!(th.loss_threshold > 0.0)) {
      throw Error(ErrorKind::EmptyCalibration, "loss threshold is not positive");
    }
  }
  return th;
}

Flags classify(const DistanceMatrix& m, const DetectorThresholds& th, FlagRule rule) {
  const auto n = m.d.rows();
  Flags flags(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index far = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i && m.d(i, j) > th.distance_threshold) ++far;
    }
    const bool flagged =
        rule == FlagRule::AllOthers ? far == n - 1 : 2 * far > n - 1;
    flags[static_cast<std::size_t>(i)] = flagged ? 1 : 0;
  }
  return flags;
}

std::uint8_t loss_flag(double loss, const DetectorThresholds& th) {
  return loss > th.loss_threshold ? 1 : 0;
}

Flags ae_verdict(std::span<const std::uint8_t> from_distance,
                 std::span<const std::uint8_t> from_loss) {
  if (from_distance.size() != from_loss.size()) {
    throw Error(ErrorKind::LengthMismatch, "flag vectors differ in length");
  }
  Flags out(from_distance.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (from_distance[i] | from_loss[i]) ? 1 : 0;
  return out;
}

}  // namespace corrdet
