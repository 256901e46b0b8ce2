#include "corrdet/synth.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "corrdet/error.hpp"
#include "corrdet/textio.hpp"

namespace corrdet {

namespace {

// Independent random streams per purpose so that enabling one injector never
// perturbs the draws of another.
enum StreamId : std::uint64_t { kNoise = 0, kShared = 1, kInjector = 2, kLocal = 3 };

void require_sensor(const Scenario& s, std::size_t sensor) {
  if (sensor >= static_cast<std::size_t>(s.readings.cols())) {
    throw Error(ErrorKind::InvalidConfig, "anomaly_sensor " + std::to_string(sensor) +
                                              " out of range");
  }
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  std::vector<double> out;
  for (std::size_t i = 0; i < points; ++i) {
    out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  return out;
}

}  // namespace

std::string_view to_string(DistKind kind) {
  switch (kind) {
    case DistKind::Normal: return "normal";
    case DistKind::Uniform: return "uniform";
    case DistKind::Poisson: return "poisson";
    case DistKind::Point: return "point";
  }
  return "unknown";
}

DistKind parse_dist_kind(std::string_view text) {
  if (text == "normal") return DistKind::Normal;
  if (text == "uniform") return DistKind::Uniform;
  if (text == "poisson") return DistKind::Poisson;
  if (text == "point") return DistKind::Point;
  throw Error(ErrorKind::InvalidConfig, "dist_kind: unknown distribution '" + std::string(text) + "'");
}

void DistributionSpec::validate() const {
  if (!std::isfinite(mean)) throw Error(ErrorKind::InvalidConfig, "dist_mean: must be finite");
  if ((kind == DistKind::Normal || kind == DistKind::Uniform) && !(sd > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "dist_sd: must be positive");
  }
  if (kind == DistKind::Poisson && mean < 0.0) {
    throw Error(ErrorKind::InvalidConfig, "dist_mean: Poisson rate must be non-negative");
  }
}

double DistributionSpec::sample(Pcg32& rng) const {
  switch (kind) {
    case DistKind::Normal: return rng.normal(mean, sd);
    case DistKind::Uniform: {
      const double half = sd * std::sqrt(3.0);
      return mean - half + 2.0 * half * rng.uniform();
    }
    case DistKind::Poisson: return static_cast<double>(rng.poisson(mean));
    case DistKind::Point: return mean;
  }
  return mean;
}

std::string_view to_string(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::None: return "none";
    case AnomalyKind::MeanShift: return "mean_shift";
    case AnomalyKind::Erasure: return "erasure";
    case AnomalyKind::Distribution: return "distribution";
    case AnomalyKind::BinShift: return "bin_shift";
    case AnomalyKind::RateShift: return "rate_shift";
  }
  return "unknown";
}

AnomalyKind parse_anomaly_kind(std::string_view text) {
  if (text == "none") return AnomalyKind::None;
  if (text == "mean_shift") return AnomalyKind::MeanShift;
  if (text == "erasure") return AnomalyKind::Erasure;
  if (text == "distribution") return AnomalyKind::Distribution;
  if (text == "bin_shift") return AnomalyKind::BinShift;
  if (text == "rate_shift") return AnomalyKind::RateShift;
  throw Error(ErrorKind::InvalidConfig, "anomaly: unknown kind '" + std::string(text) + "'");
}

void ScenarioSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidConfig, msg); };
  if (n_sensors < 2) fail("n_sensors: need at least 2 sensors");
  if (steps == 0) fail("steps: must be positive");
  if (!std::isfinite(baseline_mean)) fail("baseline_mean: must be finite");
  if (!(baseline_sd > 0.0)) fail("baseline_sd: must be positive");
  if (!(shared_sd >= 0.0)) fail("shared_sd: must be non-negative");
  if (!(shared_phi >= 0.0 && shared_phi < 1.0)) fail("shared_phi: must lie in [0, 1)");
  if (!(local_sd >= 0.0)) fail("local_sd: must be non-negative");
  if (!(local_phi >= 0.0 && local_phi < 1.0)) fail("local_phi: must lie in [0, 1)");
  if (!std::isfinite(delta)) fail("delta: must be finite");
  if (!(erasure_rate >= 0.0 && erasure_rate <= 1.0)) fail("erasure_rate: must lie in [0, 1]");
  if (!(p >= 0.0 && p <= 1.0)) fail("p: must lie in [0, 1]");
  if (!(rate >= 0.0 && rate <= 1.0)) fail("rate: must lie in [0, 1]");
  if (anomaly == AnomalyKind::None) return;
  if (anomaly_sensor >= n_sensors) fail("anomaly_sensor: must be below n_sensors");
  if (anomaly_start >= steps) fail("anomaly_start: must be below steps");
  if ((anomaly == AnomalyKind::BinShift || anomaly == AnomalyKind::RateShift) && bin_size == 0) {
    fail("bin_size: must be positive");
  }
  if (anomaly == AnomalyKind::Distribution) dist.validate();
}

Scenario gen_baseline(const ScenarioSpec& spec) {
  spec.validate();
  const auto steps = static_cast<Eigen::Index>(spec.steps);
  const auto n = static_cast<Eigen::Index>(spec.n_sensors);
  Scenario s{ReadingMatrix(steps, n), LabelTrack(spec.steps, spec.n_sensors)};

  // Slow level per sensor: the shared component plus that sensor's own deviation.
  Matrix level = Matrix::Zero(steps, n);
  auto ar1 = [steps](Pcg32& rng, double sd, double phi, auto&& emit) {
    const double innovation = std::sqrt(1.0 - phi * phi);
    double x = rng.normal();
    for (Eigen::Index t = 0; t < steps; ++t) {
      if (t > 0) x = phi * x + innovation * rng.normal();
      emit(t, sd * x);
    }
  };
  if (spec.shared_sd > 0.0) {
    Pcg32 rng(derive_seed(spec.seed, kShared));
    ar1(rng, spec.shared_sd, spec.shared_phi,
        [&](Eigen::Index t, double v) { level.row(t).array() += v; });
  }
  if (spec.local_sd > 0.0) {
    Pcg32 rng(derive_seed(spec.seed, kLocal));
    for (Eigen::Index i = 0; i < n; ++i) {
      ar1(rng, spec.local_sd, spec.local_phi, [&](Eigen::Index t, double v) { level(t, i) += v; });
    }
  }
  Pcg32 rng(derive_seed(spec.seed, kNoise));
  for (Eigen::Index t = 0; t < steps; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) {
      s.readings(t, i) = spec.baseline_mean + level(t, i) + spec.baseline_sd * rng.normal();
    }
  }
  return s;
}

Scenario generate(const ScenarioSpec& spec) {
  Scenario s = gen_baseline(spec);
  Pcg32 rng(derive_seed(spec.seed, kInjector));
  switch (spec.anomaly) {
    case AnomalyKind::None: break;
    case AnomalyKind::MeanShift:
      inject_mean_shift(s, spec.anomaly_sensor, spec.anomaly_start, spec.delta);
      break;
    case AnomalyKind::Erasure:
      inject_erasure(s, spec.anomaly_sensor, spec.anomaly_start, spec.erasure_rate, rng);
      break;
    case AnomalyKind::Distribution:
      inject_distribution(s, spec.anomaly_sensor, spec.anomaly_start, spec.dist, spec.p, rng);
      break;
    case AnomalyKind::BinShift:
      inject_bin_shift(s, spec.anomaly_sensor, spec.bin_size, spec.delta);
      break;
    case AnomalyKind::RateShift:
      inject_rate_shift(s, spec.anomaly_sensor, spec.bin_size, spec.rate, spec.delta);
      break;
  }
  return s;
}

void inject_mean_shift(Scenario& s, std::size_t sensor, std::size_t start, double delta) {
  require_sensor(s, sensor);
  const auto col = static_cast<Eigen::Index>(sensor);
  for (auto t = static_cast<Eigen::Index>(start); t < s.readings.rows(); ++t) {
    s.readings(t, col) += delta;
    s.labels.set(static_cast<std::size_t>(t), sensor, true);
  }
}

void inject_erasure(Scenario& s, std::size_t sensor, std::size_t start, double rate, Pcg32& rng) {
  require_sensor(s, sensor);
  if (!(rate >= 0.0 && rate <= 1.0)) throw Error(ErrorKind::InvalidConfig, "erasure_rate: must lie in [0, 1]");
  const auto col = static_cast<Eigen::Index>(sensor);
  for (auto t = static_cast<Eigen::Index>(start); t < s.readings.rows(); ++t) {
    // One draw per step whatever the rate, so streams at different rates stay aligned.
    const double u = rng.uniform();
    if (u < rate) {
      s.readings(t, col) = 0.0;
      s.labels.set(static_cast<std::size_t>(t), sensor, true);
    }
  }
}

void inject_distribution(Scenario& s, std::size_t sensor, std::size_t start,
                         const DistributionSpec& dist, double p, Pcg32& rng) {
  require_sensor(s, sensor);
  dist.validate();
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidConfig, "p: must lie in [0, 1]");
  const auto col = static_cast<Eigen::Index>(sensor);
  for (auto t = static_cast<Eigen::Index>(start); t < s.readings.rows(); ++t) {
    const double u = rng.uniform();
    if (u < p) {
      s.readings(t, col) = dist.sample(rng);
      s.labels.set(static_cast<std::size_t>(t), sensor, true);
    }
  }
}

void inject_bin_shift(Scenario& s, std::size_t sensor, std::size_t bin_size, double delta) {
  require_sensor(s, sensor);
  if (bin_size == 0) throw Error(ErrorKind::InvalidConfig, "bin_size: must be positive");
  const auto col = static_cast<Eigen::Index>(sensor);
  for (Eigen::Index t = 0; t < s.readings.rows(); ++t) {
    if ((static_cast<std::size_t>(t) / bin_size) % 2 == 1) {
      s.readings(t, col) += delta;
      s.labels.set(static_cast<std::size_t>(t), sensor, true);
    }
  }
}

void inject_rate_shift(Scenario& s, std::size_t sensor, std::size_t bin_size, double fraction,
                       double delta) {
  require_sensor(s, sensor);
  if (bin_size == 0) throw Error(ErrorKind::InvalidConfig, "bin_size: must be positive");
  const auto shifted = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(bin_size)));
  const auto col = static_cast<Eigen::Index>(sensor);
  for (Eigen::Index t = 0; t < s.readings.rows(); ++t) {
    const auto ut = static_cast<std::size_t>(t);
    if (ut % bin_size < shifted) {
      s.readings(t, col) += delta;
      s.labels.set(ut, sensor, true);
    }
  }
}

ScenarioSpec scenario_preset(std::string_view name) {
  ScenarioSpec spec;
  const std::string n(name);
  auto fig1_distribution = [&](DistKind kind, double mean) {
    spec.anomaly = AnomalyKind::Distribution;
    spec.dist = DistributionSpec{kind, mean, 5.0};
    spec.p = 1.0;
  };
  if (n == "fig1-normal") {
  } else if (n == "fig1-normal-80") {
    fig1_distribution(DistKind::Normal, 80.0);
  } else if (n == "fig1-uniform-80") {
    fig1_distribution(DistKind::Uniform, 80.0);
  } else if (n == "fig1-poisson-80") {
    fig1_distribution(DistKind::Poisson, 80.0);
  } else if (n == "fig1-point-90") {
    fig1_distribution(DistKind::Point, 90.0);
  } else if (n == "fig1-shift-40" || n == "fig1-shift-5") {
    spec.anomaly = AnomalyKind::MeanShift;
    spec.delta = n == "fig1-shift-40" ? 40.0 : 5.0;
  } else if (n == "fig1-erasure-5" || n == "fig1-erasure-20") {
    spec.anomaly = AnomalyKind::Erasure;
    spec.erasure_rate = n == "fig1-erasure-5" ? 0.05 : 0.20;
  } else if (n == "binshift-6000") {
    // Slowly drifting, strongly correlated indoor-temperature-like stand-in.
    spec.steps = 6000;
    spec.baseline_mean = 20.0;
    spec.baseline_sd = 0.1;
    spec.shared_sd = 2.0;
    spec.shared_phi = 0.999;
    spec.local_sd = 0.3;
    spec.local_phi = 0.999;
    spec.anomaly = AnomalyKind::BinShift;
    spec.bin_size = 1000;
    spec.delta = 10.0;
    spec.anomaly_start = 0;
  } else {
    throw Error(ErrorKind::InvalidConfig, "preset: unknown scenario preset '" + n + "'");
  }
  return spec;
}

std::vector<std::string> scenario_preset_names() {
  return {"fig1-normal",    "fig1-normal-80", "fig1-uniform-80",  "fig1-poisson-80",
          "fig1-point-90",  "fig1-shift-40",  "fig1-shift-5",     "fig1-erasure-5",
          "fig1-erasure-20", "binshift-6000"};
}

std::string format_scenario(const ScenarioSpec& spec) {
  std::ostringstream out;
  out << "n_sensors = " << spec.n_sensors << '\n'
      << "steps = " << spec.steps << '\n'
      << "baseline_mean = " << format_real(spec.baseline_mean) << '\n'
      << "baseline_sd = " << format_real(spec.baseline_sd) << '\n'
      << "shared_sd = " << format_real(spec.shared_sd) << '\n'
      << "shared_phi = " << format_real(spec.shared_phi) << '\n'
      << "local_sd = " << format_real(spec.local_sd) << '\n'
      << "local_phi = " << format_real(spec.local_phi) << '\n'
      << "anomaly = " << to_string(spec.anomaly) << '\n'
      << "anomaly_sensor = " << spec.anomaly_sensor << '\n'
      << "anomaly_start = " << spec.anomaly_start << '\n'
      << "delta = " << format_real(spec.delta) << '\n'
      << "erasure_rate = " << format_real(spec.erasure_rate) << '\n'
      << "p = " << format_real(spec.p) << '\n'
      << "dist_kind = " << to_string(spec.dist.kind) << '\n'
      << "dist_mean = " << format_real(spec.dist.mean) << '\n'
      << "dist_sd = " << format_real(spec.dist.sd) << '\n'
      << "bin_size = " << spec.bin_size << '\n'
      << "rate = " << format_real(spec.rate) << '\n'
      << "seed = " << spec.seed << '\n';
  return out.str();
}

ScenarioSpec parse_scenario(std::istream& in) {
  ScenarioSpec spec;
  for (const auto& [key, value] : parse_key_values(in)) {
    if (key == "preset") {
      // Resets every field, so keys after it override the preset.
      spec = scenario_preset(value);
    } else if (key == "n_sensors") spec.n_sensors = parse_size(key, value);
    else if (key == "steps") spec.steps = parse_size(key, value);
    else if (key == "baseline_mean") spec.baseline_mean = parse_real(key, value);
    else if (key == "baseline_sd") spec.baseline_sd = parse_real(key, value);
    else if (key == "shared_sd") spec.shared_sd = parse_real(key, value);
    else if (key == "shared_phi") spec.shared_phi = parse_real(key, value);
    else if (key == "local_sd") spec.local_sd = parse_real(key, value);
    else if (key == "local_phi") spec.local_phi = parse_real(key, value);
    else if (key == "anomaly") spec.anomaly = parse_anomaly_kind(value);
    else if (key == "anomaly_sensor") spec.anomaly_sensor = parse_size(key, value);
    else if (key == "anomaly_start") spec.anomaly_start = parse_size(key, value);
    else if (key == "delta") spec.delta = parse_real(key, value);
    else if (key == "erasure_rate") spec.erasure_rate = parse_real(key, value);
    else if (key == "p") spec.p = parse_real(key, value);
    else if (key == "dist_kind") spec.dist.kind = parse_dist_kind(value);
    else if (key == "dist_mean") spec.dist.mean = parse_real(key, value);
    else if (key == "dist_sd") spec.dist.sd = parse_real(key, value);
    else if (key == "bin_size") spec.bin_size = parse_size(key, value);
    else if (key == "rate") spec.rate = parse_real(key, value);
    else if (key == "seed") spec.seed = parse_u64(key, value);
    else throw Error(ErrorKind::InvalidConfig, key + ": unknown scenario key");
  }
  spec.validate();
  return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open scenario file " + path);
  return parse_scenario(in);
}

std::vector<double> odd_mean_grid() {
  std::vector<double> out;
  for (int m = 1; m <= 99; m += 2) out.push_back(m);
  return out;
}

std::vector<double> probability_grid() { return linear_grid(0.0, 1.0, 51); }
std::vector<double> probability_zoom_grid() { return linear_grid(0.0, 0.1, 51); }
std::vector<double> response_rate_grid() { return linear_grid(0.2, 1.0, 10); }

}  // namespace corrdet
