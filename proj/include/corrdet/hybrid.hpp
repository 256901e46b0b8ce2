#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corrdet/autoencoder.hpp"
#include "corrdet/distance.hpp"
#include "corrdet/pca.hpp"
#include "corrdet/stream.hpp"

namespace corrdet {

enum class DetectorKind { Pca, Ae, Hybrid };

std::string_view to_string(DetectorKind kind);
DetectorKind parse_detector_kind(std::string_view text);

enum class Stage {
  Undetermined,  // warm-up: some window not yet full
  PcaClear,      // PCA saw nothing; AE not run
  PcaFlagged,    // PCA-only detector raised a flag
  AeConfirmed,   // AE ran and flagged at least one sensor
  AeCleared,     // AE ran and flagged nothing
};

std::string_view to_string(Stage stage);

inline constexpr std::uint8_t kUndetermined = 2;

struct AnomalyVerdict {
  std::size_t t = 0;
  std::vector<std::uint8_t> flags;      // 0, 1, or kUndetermined
  std::vector<std::uint8_t> pca_flags;  // diagnostic copy; empty when PCA did not run
  Stage stage = Stage::Undetermined;
  std::int64_t step_time_ns = 0;
  std::vector<double> distances;  // upper triangle of the matrix behind the verdict
};

/// Everything fitted on anomaly-free data that a stream detector needs.
struct DetectorBundle {
  std::size_t window = kDefaultWindow;
  NormStats norm;
  PcaModel pca;
  DetectorThresholds pca_thresholds;
  AeModel ae;
  DetectorThresholds ae_thresholds;
  FlagRule rule = FlagRule::AllOthers;
  bool has_pca = false;
  bool has_ae = false;

  std::size_t sensors() const noexcept { return norm.sensors(); }
};

struct DetectorConfig {
  std::size_t window = kDefaultWindow;
  std::size_t pca_k = 2;
  AeConfig ae;
  double c = 3.0;
  double q = 0.99;
  FlagRule rule = FlagRule::AllOthers;
  bool normalize = true;
  /// Stride between pooled autoencoder training windows (PCA always uses stride 1).
  std::size_t ae_train_stride = 1;
  bool fit_pca = true;
  bool fit_ae = true;
};

/// Windows of every sensor lying wholly inside rows [begin, end), pooled
/// sensor-major into the rows of the result (m x W).
Matrix pooled_windows(const ReadingMatrix& normalized, std::size_t begin, std::size_t end,
                      std::size_t window, std::size_t stride = 1);

/// Fits normalization and models on rows [begin, end), then calibrates on the same rows.
DetectorBundle train_detectors(const ReadingMatrix& readings, std::size_t begin, std::size_t end,
                               const DetectorConfig& cfg);

/// Recomputes normalization and thresholds on rows [begin, end) of `readings`,
/// keeping the fitted models.
void calibrate_detectors(DetectorBundle& bundle, const ReadingMatrix& readings, std::size_t begin,
                         std::size_t end, double c, double q, bool normalize = true);

struct TimingStats {
  std::size_t count = 0;
  double mean_ns = 0.0;
  double median_ns = 0.0;
  double p95_ns = 0.0;

  static TimingStats from(std::span<const std::int64_t> samples);
};

/// Single-stream detector: feeds readings into per-sensor windows and applies
/// PCA, the autoencoder, or the PCA-gated autoencoder at every step.
class StreamDetector {
 public:
  StreamDetector(const DetectorBundle& bundle, DetectorKind kind, bool record_timing = true);

  AnomalyVerdict step(std::span<const double> readings);

  DetectorKind kind() const noexcept { return kind_; }
  std::size_t steps_total() const noexcept { return steps_total_; }
  std::size_t steps_evaluated() const noexcept { return steps_evaluated_; }
  std::size_t pca_flagged_steps() const noexcept { return pca_flagged_steps_; }
  std::size_t ae_invocations() const noexcept { return ae_invocations_; }
  const std::vector<std::int64_t>& step_times_ns() const noexcept { return step_times_; }

 private:
  struct AeResult {
    Flags flags;
    DistanceMatrix distances;
  };
  Flags run_pca(const Matrix& windows, DistanceMatrix& distances) const;
  AeResult run_ae(const Matrix& windows) const;

  const DetectorBundle* bundle_;
  DetectorKind kind_;
  bool record_timing_;
  std::vector<SensorWindow> windows_;
  Matrix snapshot_;
  std::size_t steps_total_ = 0;
  std::size_t steps_evaluated_ = 0;
  std::size_t pca_flagged_steps_ = 0;
  std::size_t ae_invocations_ = 0;
  std::vector<std::int64_t> step_times_;
};

struct StreamResult {
  std::vector<AnomalyVerdict> verdicts;
  TimingStats timing;
  std::size_t steps_evaluated = 0;
  std::size_t pca_flagged_steps = 0;
  std::size_t ae_invocations = 0;
};

/// Runs one detector over every row of `readings` (T x n, T > W).
StreamResult run_stream(DetectorKind kind, const ReadingMatrix& readings,
                        const DetectorBundle& bundle, bool record_timing = true);

/// Per-step flags of each detector for every post-warm-up step, computed in
/// bulk. Row r corresponds to step W-1+r. Used by sweeps, where only verdicts
/// matter; the hybrid track is derived from the other two by the gating rule.
struct BulkFlags {
  std::size_t first_step = 0;
  std::vector<Flags> pca;     // empty when the bundle has no PCA
  std::vector<Flags> ae;      // empty when the bundle has no AE
  std::vector<Flags> hybrid;  // empty unless both are present

  const std::vector<Flags>& track(DetectorKind kind) const;
};

BulkFlags bulk_flags(const ReadingMatrix& readings, const DetectorBundle& bundle);

}  // namespace corrdet
