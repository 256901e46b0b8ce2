#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace corrdet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Readings of n sensors over T steps, one column per sensor.
using ReadingMatrix = Eigen::MatrixXd;

inline constexpr std::size_t kDefaultWindow = 100;
inline constexpr double kStdFloor = 1e-9;

struct Reading {
  std::size_t sensor_id = 0;
  std::size_t t = 0;
  double value = 0.0;
};

/// Most recent readings of one sensor, oldest first once read out.
class SensorWindow {
 public:
  explicit SensorWindow(std::size_t capacity = kDefaultWindow);

  void push(double value);

  std::size_t capacity() const noexcept { return buffer_.size(); }
  std::size_t size() const noexcept { return size_; }
  bool full() const noexcept { return size_ == buffer_.size(); }

  /// Oldest-first copy of the window. Throws Error(NotFull) before W pushes.
  Vector snapshot() const;
  /// Writes the oldest-first window into `out` (length == capacity).
  void snapshot_into(std::span<double> out) const;

  /// Oldest-first copy of however many values are held.
  std::vector<double> contents() const;

 private:
  std::vector<double> buffer_;
  std::size_t head_ = 0;  // slot of the next write
  std::size_t size_ = 0;
};

/// Per-sensor standardization fitted on an anomaly-free training segment.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;

  /// Fits on rows [begin, end) of `readings`; std is floored at kStdFloor.
  static NormStats fit(const ReadingMatrix& readings, std::size_t begin, std::size_t end);
  /// Identity transform (mean 0, std 1) for raw-mode runs.
  static NormStats identity(std::size_t sensors);

  std::size_t sensors() const noexcept { return mean.size(); }

  double normalize(double value, std::size_t sensor) const;
  double denormalize(double value, std::size_t sensor) const;
  Vector normalize(const Vector& values, std::size_t sensor) const;
  Vector denormalize(const Vector& values, std::size_t sensor) const;
  ReadingMatrix normalize(const ReadingMatrix& readings) const;
};

/// Binary ground truth with the same shape as the reading matrix.
class LabelTrack {
 public:
  LabelTrack() = default;
  LabelTrack(std::size_t steps, std::size_t sensors);

  std::size_t steps() const noexcept { return steps_; }
  std::size_t sensors() const noexcept { return sensors_; }

  std::uint8_t at(std::size_t t, std::size_t sensor) const;
  void set(std::size_t t, std::size_t sensor, bool anomalous);

  /// Labels of one sensor over all steps.
  std::vector<std::uint8_t> sensor_track(std::size_t sensor) const;
  std::size_t count(std::size_t sensor) const;
  std::size_t count() const;

  /// Whether any label of `sensor` is set in rows [begin, end).
  bool any_in(std::size_t begin, std::size_t end) const;

  bool operator==(const LabelTrack&) const = default;

 private:
  std::size_t steps_ = 0;
  std::size_t sensors_ = 0;
  std::vector<std::uint8_t> data_;  // row-major
};

/// Step t is anomalous when its trailing window [t-W+1, t] holds any labeled reading.
std::vector<std::uint8_t> window_labels(std::span<const std::uint8_t> point_labels,
                                        std::size_t window);

/// Checks readings and labels describe the same grid; throws DimMismatch otherwise.
void require_same_shape(const ReadingMatrix& readings, const LabelTrack& labels);

}  // namespace corrdet
