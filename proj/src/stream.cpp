#include "corrdet/stream.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "corrdet/error.hpp"

namespace corrdet {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotFull: return "NotFull";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::EmptyCalibration: return "EmptyCalibration";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::Diverged: return "Diverged";
    case ErrorKind::NoData: return "NoData";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Format: return "Format";
  }
  return "Unknown";
}

SensorWindow::SensorWindow(std::size_t capacity) : buffer_(capacity, 0.0) {
  if (capacity == 0) throw Error(ErrorKind::InvalidConfig, "window capacity must be positive");
}

void SensorWindow::push(double value) {
  buffer_[head_] = value;
  head_ = (head_ + 1) % buffer_.size();
  if (size_ < buffer_.size()) ++size_;
}

Vector SensorWindow::snapshot() const {
  Vector out(static_cast<Eigen::Index>(capacity()));
  snapshot_into(std::span<double>(out.data(), capacity()));
  return out;
}

void SensorWindow::snapshot_into(std::span<double> out) const {
  if (!full()) {
    throw Error(ErrorKind::NotFull, "window holds " + std::to_string(size_) + " of " +
                                        std::to_string(capacity()) + " readings");
  }
  if (out.size() != capacity()) throw Error(ErrorKind::DimMismatch, "snapshot buffer size");
  // Full ring: oldest element sits at head_.
  const auto split = buffer_.begin() + static_cast<std::ptrdiff_t>(head_);
  auto it = std::copy(split, buffer_.end(), out.begin());
  std::copy(buffer_.begin(), split, it);
}

std::vector<double> SensorWindow::contents() const {
  std::vector<double> out;
  out.reserve(size_);
  const std::size_t start = (head_ + buffer_.size() - size_) % buffer_.size();
  for (std::size_t i = 0; i < size_; ++i) out.push_back(buffer_[(start + i) % buffer_.size()]);
  return out;
}

NormStats NormStats::fit(const ReadingMatrix& readings, std::size_t begin, std::size_t end) {
  if (end > static_cast<std::size_t>(readings.rows()) || begin >= end) {
    throw Error(ErrorKind::EmptyCalibration, "normalization segment is empty or out of range");
  }
  NormStats stats;
  const auto rows = static_cast<Eigen::Index>(end - begin);
  for (Eigen::Index s = 0; s < readings.cols(); ++s) {
    const auto seg = readings.col(s).segment(static_cast<Eigen::Index>(begin), rows);
    const double mu = seg.mean();
    const double var = rows > 1 ? (seg.array() - mu).square().sum() / static_cast<double>(rows - 1) : 0.0;
    stats.mean.push_back(mu);
    stats.std.push_back(std::max(std::sqrt(var), kStdFloor));
  }
  return stats;
}

NormStats NormStats::identity(std::size_t sensors) {
  return NormStats{std::vector<double>(sensors, 0.0), std::vector<double>(sensors, 1.0)};
}

double NormStats::normalize(double value, std::size_t sensor) const {
  return (value - mean.at(sensor)) / std.at(sensor);
}

double NormStats::denormalize(double value, std::size_t sensor) const {
  return value * std.at(sensor) + mean.at(sensor);
}

Vector NormStats::normalize(const Vector& values, std::size_t sensor) const {
  return (values.array() - mean.at(sensor)) / std.at(sensor);
}

Vector NormStats::denormalize(const Vector& values, std::size_t sensor) const {
  return values.array() * std.at(sensor) + mean.at(sensor);
}

ReadingMatrix NormStats::normalize(const ReadingMatrix& readings) const {
  if (static_cast<std::size_t>(readings.cols()) != sensors()) {
    throw Error(ErrorKind::DimMismatch, "normalization stats cover " + std::to_string(sensors()) +
                                            " sensors, readings have " +
                                            std::to_string(readings.cols()));
  }
  ReadingMatrix out(readings.rows(), readings.cols());
  for (Eigen::Index s = 0; s < readings.cols(); ++s) {
    const auto i = static_cast<std::size_t>(s);
    out.col(s) = (readings.col(s).array() - mean[i]) / std[i];
  }
  return out;
}

LabelTrack::LabelTrack(std::size_t steps, std::size_t sensors)
    : steps_(steps), sensors_(sensors), data_(steps * sensors, 0) {}

std::uint8_t LabelTrack::at(std::size_t t, std::size_t sensor) const {
  return data_.at(t * sensors_ + sensor);
}

void LabelTrack::set(std::size_t t, std::size_t sensor, bool anomalous) {
  data_.at(t * sensors_ + sensor) = anomalous ? 1 : 0;
}

std::vector<std::uint8_t> LabelTrack::sensor_track(std::size_t sensor) const {
  std::vector<std::uint8_t> out(steps_);
  for (std::size_t t = 0; t < steps_; ++t) out[t] = at(t, sensor);
  return out;
}

std::size_t LabelTrack::count(std::size_t sensor) const {
  std::size_t n = 0;
  for (std::size_t t = 0; t < steps_; ++t) n += at(t, sensor);
  return n;
}

std::size_t LabelTrack::count() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

bool LabelTrack::any_in(std::size_t begin, std::size_t end) const {
  end = std::min(end, steps_);
  for (std::size_t i = begin * sensors_; i < end * sensors_; ++i) {
    if (data_[i] != 0) return true;
  }
  return false;
}

std::vector<std::uint8_t> window_labels(std::span<const std::uint8_t> point_labels,
                                        std::size_t window) {
  std::vector<std::uint8_t> out(point_labels.size(), 0);
  std::size_t last = 0;
  bool seen = false;
  for (std::size_t t = 0; t < point_labels.size(); ++t) {
    if (point_labels[t] != 0) {
      last = t;
      seen = true;
    }
    out[t] = (seen && t - last < window) ? 1 : 0;
  }
  return out;
}

void require_same_shape(const ReadingMatrix& readings, const LabelTrack& labels) {
  if (static_cast<std::size_t>(readings.rows()) != labels.steps() ||
      static_cast<std::size_t>(readings.cols()) != labels.sensors()) {
    throw Error(ErrorKind::DimMismatch, "labels and readings differ in shape");
  }
}

}  // namespace corrdet
