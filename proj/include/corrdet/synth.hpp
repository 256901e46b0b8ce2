#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "corrdet/rng.hpp"
#include "corrdet/stream.hpp"

namespace corrdet {

enum class DistKind { Normal, Uniform, Poisson, Point };

std::string_view to_string(DistKind kind);
DistKind parse_dist_kind(std::string_view text);

/// Family an anomalous reading is redrawn from.
///
/// Uniform spans mean +/- sd*sqrt(3), so its standard deviation is sd.
/// Poisson uses rate = mean and ignores sd. Point always returns mean.
struct DistributionSpec {
  DistKind kind = DistKind::Normal;
  double mean = 50.0;
  double sd = 5.0;

  void validate() const;
  double sample(Pcg32& rng) const;
};

enum class AnomalyKind { None, MeanShift, Erasure, Distribution, BinShift, RateShift };

std::string_view to_string(AnomalyKind kind);
AnomalyKind parse_anomaly_kind(std::string_view text);

struct ScenarioSpec {
  std::size_t n_sensors = 4;
  std::size_t steps = 500;
  double baseline_mean = 50.0;
  double baseline_sd = 5.0;
  /// Common-mode level shared by all sensors: an AR(1) process with stationary
  /// standard deviation `shared_sd` and lag-one coefficient `shared_phi`.
  /// Zero keeps the sensors i.i.d.
  double shared_sd = 0.0;
  double shared_phi = 0.99;
  /// Independent slow deviation of each sensor around the shared level: AR(1)
  /// with stationary standard deviation `local_sd` and coefficient `local_phi`.
  double local_sd = 0.0;
  double local_phi = 0.99;

  AnomalyKind anomaly = AnomalyKind::None;
  std::size_t anomaly_sensor = 3;
  std::size_t anomaly_start = 250;
  double delta = 0.0;         // mean_shift, bin_shift, rate_shift
  double erasure_rate = 0.0;  // erasure
  double p = 1.0;             // distribution
  DistributionSpec dist;      // distribution
  std::size_t bin_size = 1000;  // bin_shift, rate_shift
  double rate = 0.5;            // rate_shift: shifted fraction of every bin
  std::uint64_t seed = 1;

  /// Throws Error(InvalidConfig) whose message starts with the offending field.
  void validate() const;
};

struct Scenario {
  ReadingMatrix readings;
  LabelTrack labels;
};

/// Baseline readings (labels all 0).
Scenario gen_baseline(const ScenarioSpec& spec);
/// Baseline plus the spec's anomaly.
Scenario generate(const ScenarioSpec& spec);

/// Adds `delta` to `sensor` for t >= start; labels every such step.
void inject_mean_shift(Scenario& s, std::size_t sensor, std::size_t start, double delta);
/// Zeroes each reading at t >= start with probability `rate`; labels zeroed steps.
void inject_erasure(Scenario& s, std::size_t sensor, std::size_t start, double rate, Pcg32& rng);
/// Redraws each reading at t >= start from `dist` with probability p; labels redrawn steps.
void inject_distribution(Scenario& s, std::size_t sensor, std::size_t start,
                         const DistributionSpec& dist, double p, Pcg32& rng);
/// Adds `delta` throughout odd bins (numbered from 0); labels those bins.
void inject_bin_shift(Scenario& s, std::size_t sensor, std::size_t bin_size, double delta);
/// Adds `delta` to the leading `fraction` of every bin; labels those steps.
void inject_rate_shift(Scenario& s, std::size_t sensor, std::size_t bin_size, double fraction,
                       double delta);

/// Named scenario presets (e.g. "fig1-normal-80", "binshift-6000").
ScenarioSpec scenario_preset(std::string_view name);
std::vector<std::string> scenario_preset_names();

/// Human-readable `key = value` text mirroring ScenarioSpec.
std::string format_scenario(const ScenarioSpec& spec);
/// Parses `key = value` lines (# comments allowed). Unknown keys are rejected.
ScenarioSpec parse_scenario(std::istream& in);
ScenarioSpec load_scenario(const std::string& path);

/// Grids named after the sweep experiments.
std::vector<double> odd_mean_grid();           // 1, 3, ..., 99
std::vector<double> probability_grid();        // 0, 0.02, ..., 1
std::vector<double> probability_zoom_grid();   // 0, 0.002, ..., 0.1
std::vector<double> response_rate_grid();      // 10 rates from 0.2 to 1.0

}  // namespace corrdet
