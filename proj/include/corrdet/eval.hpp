#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corrdet/hybrid.hpp"
#include "corrdet/synth.hpp"

namespace corrdet {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  bool operator==(const ConfusionCounts&) const = default;
};

/// Throws Error(LengthMismatch) on unequal lengths. Inputs are 0/1.
ConfusionCounts confusion(std::span<const std::uint8_t> flags, std::span<const std::uint8_t> labels);

struct Prf1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Any 0/0 ratio is taken as 0.
Prf1 prf1(const ConfusionCounts& c);

/// Sample Pearson correlation. Throws LengthMismatch, or DegenerateVariance
/// when either series is constant (or shorter than 2).
double pearson_r(std::span<const double> x, std::span<const double> y);

/// How a step's ground truth is derived from per-reading labels.
enum class LabelMode {
  Window,  // anomalous when the trailing window holds a labeled reading
  Point,   // anomalous when the newest reading is labeled
};

std::string_view to_string(LabelMode mode);
LabelMode parse_label_mode(std::string_view text);

/// Ground truth of `sensor` for every post-warm-up step (first entry is step W-1).
std::vector<std::uint8_t> step_labels(const LabelTrack& labels, std::size_t sensor,
                                      std::size_t window, LabelMode mode);

/// Scores one sensor's flag track; `rows[r]` holds the flags of step W-1+r.
ConfusionCounts score_sensor(const std::vector<Flags>& rows, const LabelTrack& labels,
                             std::size_t sensor, std::size_t window, LabelMode mode);
/// Sum of score_sensor over every sensor.
ConfusionCounts score_all_sensors(const std::vector<Flags>& rows, const LabelTrack& labels,
                                  std::size_t window, LabelMode mode);

inline constexpr std::array<DetectorKind, 3> kAllDetectors = {DetectorKind::Pca, DetectorKind::Ae,
                                                               DetectorKind::Hybrid};

inline std::size_t index_of(DetectorKind k) { return static_cast<std::size_t>(k); }

struct EvalOptions {
  double c = 3.0;
  double q = 0.99;
  LabelMode labels = LabelMode::Window;
  std::uint64_t seed = 1;
  /// Recompute normalization and thresholds on each scenario's normal prefix.
  bool recalibrate = true;
  /// Sweep points evaluated concurrently.
  std::size_t jobs = 1;
};

struct DetectorScore {
  ConfusionCounts counts;
  Prf1 metrics;
};

struct SweepPoint {
  double value = 0.0;
  std::array<DetectorScore, 3> scores;  // indexed by DetectorKind
  double anomalous_fraction = 0.0;      // of the scored steps
};

struct SweepReport {
  std::string variable;  // "mean", "p", "anomaly_rate"
  std::string scenario;  // e.g. distribution or anomaly kind
  std::vector<SweepPoint> points;
  /// Smallest grid value whose F1 exceeds 0.5, per detector.
  std::array<std::optional<double>, 3> onset;
};

/// Spec of the lab stand-in: correlated drifting sensors, sensor 3 shifted
/// in odd bins of 1000 steps. Bin 0 is anomaly-free.
ScenarioSpec reference_spec(std::uint64_t seed);

/// Models fitted and calibrated on bin 0 of reference_spec(seed).
DetectorBundle reference_models(const DetectorConfig& cfg, std::uint64_t seed);

/// Calibrates a copy of `models` on the scenario's normal prefix (if asked)
/// and scores every detector on the anomalous sensor.
std::array<DetectorScore, 3> score_scenario(const DetectorBundle& models, const ScenarioSpec& spec,
                                            const EvalOptions& opt, double* anomalous_fraction = nullptr);

/// One scenario per mean: `base` with its distribution anomaly's mean set to
/// each grid value. Point i uses seed derive_seed(opt.seed, i).
SweepReport mean_sweep(const DetectorBundle& models, DistKind kind, std::span<const double> grid,
                       ScenarioSpec base, const EvalOptions& opt);

/// One scenario per p: erasure with rate p, or distribution redraws with
/// probability p when `base.anomaly` is Distribution.
SweepReport probability_sweep(const DetectorBundle& models, std::span<const double> grid,
                              ScenarioSpec base, const EvalOptions& opt);

struct RopeBand {
  double low = 45.0;
  double high = 55.0;

  bool contains(double v) const noexcept { return v > low && v < high; }
};

struct RopeSummary {
  std::array<double, 3> inside_f1{};   // mean F1 over grid values inside the band
  std::array<double, 3> outside_f1{};
  std::size_t inside_points = 0;
  std::size_t outside_points = 0;
};

RopeSummary rope_summary(const SweepReport& report, const RopeBand& band);

struct BenchRow {
  DetectorKind kind = DetectorKind::Pca;
  std::vector<double> rep_mean_ns;  // mean step time of each repetition
  double median_of_means_ns = 0.0;
  TimingStats timing;               // of the last repetition
  std::size_t steps_evaluated = 0;
  std::size_t ae_invocations = 0;
  std::size_t pca_flagged_steps = 0;
};

/// Times every detector on the same stream and models, `reps` >= 3 repetitions,
/// round-robin across detectors.
std::vector<BenchRow> bench(const DetectorBundle& models, const ReadingMatrix& stream,
                            std::span<const DetectorKind> kinds, std::size_t reps);

struct Table2Row {
  DetectorKind kind = DetectorKind::Pca;
  DetectorScore sensor;      // anomalous sensor's track
  DetectorScore all_tracks;  // every sensor's track, labels of healthy sensors all 0
  double mean_step_ms = 0.0;
  double median_step_ms = 0.0;
  std::size_t ae_invocations = 0;
  std::size_t timed_steps = 0;
};

/// F1 over the whole scenario (bulk); step times from `bench` on its first
/// `timing_steps` rows.
std::vector<Table2Row> table2(const DetectorBundle& models, const Scenario& scenario,
                              std::size_t sensor, std::size_t timing_steps, std::size_t reps,
                              LabelMode mode);

struct ReductionPoint {
  double rate = 0.0;
  double ae_mean_ns = 0.0;
  double hybrid_mean_ns = 0.0;
  double reduction_pct = 0.0;  // (ae - hybrid) / ae * 100
  std::size_t ae_invocations = 0;
  std::size_t steps = 0;
};

struct ReductionCurve {
  std::vector<ReductionPoint> points;
  double pearson = 0.0;  // between rate and reduction
};

/// Rate-shift streams built from `base` (same baseline for every rate, so the
/// shared models stay calibrated), timed with AE alone and with the hybrid.
ReductionCurve response_reduction_curve(const DetectorBundle& models, ScenarioSpec base,
                                        std::span<const double> rates, std::size_t reps);

// Plot-ready reports.
std::string sweep_csv(const SweepReport& report);
std::string sweep_json(const SweepReport& report, const std::string& provenance);
std::string table2_csv(const std::vector<Table2Row>& rows);
std::string table2_json(const std::vector<Table2Row>& rows, const std::string& provenance);
std::string reduction_csv(const ReductionCurve& curve);
std::string reduction_json(const ReductionCurve& curve, const std::string& provenance);
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace corrdet
