#include "corrdet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "corrdet/error.hpp"
#include "corrdet/stats.hpp"
#include "corrdet/textio.hpp"
#include "json.hpp"

namespace corrdet {

namespace {

using nlohmann::json;

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// Rows [0, end) are anomaly-free under the spec's own construction.
std::size_t normal_prefix(const ScenarioSpec& spec) {
  switch (spec.anomaly) {
    case AnomalyKind::None: return spec.steps;
    case AnomalyKind::MeanShift:
    case AnomalyKind::Erasure:
    case AnomalyKind::Distribution: return spec.anomaly_start;
    case AnomalyKind::BinShift: return std::min(spec.bin_size, spec.steps);
    case AnomalyKind::RateShift: return 0;
  }
  return 0;
}

DetectorScore make_score(const ConfusionCounts& c) { return {c, prf1(c)}; }

json score_json(const DetectorScore& s) {
  return {{"tp", s.counts.tp},
          {"fp", s.counts.fp},
          {"fn", s.counts.fn},
          {"tn", s.counts.tn},
          {"precision", s.metrics.precision},
          {"recall", s.metrics.recall},
          {"f1", s.metrics.f1}};
}

std::string metric_header(const char* prefix) {
  std::string out;
  for (const DetectorKind k : kAllDetectors) {
    const std::string name(to_string(k));
    out += std::string(prefix) + name + "_precision," + name + "_recall," + name + "_f1";
    prefix = ",";
  }
  return out;
}

void put_metrics(std::ostream& out, const Prf1& m) {
  out << ',' << format_real(m.precision) << ',' << format_real(m.recall) << ',' << format_real(m.f1);
}

}  // namespace

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

ConfusionCounts confusion(std::span<const std::uint8_t> flags, std::span<const std::uint8_t> labels) {
  if (flags.size() != labels.size()) {
    throw Error(ErrorKind::LengthMismatch, "flags and labels differ in length (" +
                                               std::to_string(flags.size()) + " vs " +
                                               std::to_string(labels.size()) + ")");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    const bool f = flags[i] != 0;
    const bool l = labels[i] != 0;
    if (f && l) {
      ++c.tp;
    } else if (f) {
      ++c.fp;
    } else if (l) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

Prf1 prf1(const ConfusionCounts& c) {
  Prf1 m;
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  const double sum = m.precision + m.recall;
  m.f1 = sum > 0.0 ? 2.0 * m.precision * m.recall / sum : 0.0;
  return m;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::LengthMismatch, "pearson_r: series differ in length");
  if (x.size() < 2) throw Error(ErrorKind::DegenerateVariance, "pearson_r: need at least 2 points");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) throw Error(ErrorKind::DegenerateVariance, "pearson_r: constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::string_view to_string(LabelMode mode) { return mode == LabelMode::Window ? "window" : "point"; }

LabelMode parse_label_mode(std::string_view text) {
  if (text == "window") return LabelMode::Window;
  if (text == "point") return LabelMode::Point;
  throw Error(ErrorKind::InvalidConfig, "labels: expected window or point");
}

std::vector<std::uint8_t> step_labels(const LabelTrack& labels, std::size_t sensor,
                                      std::size_t window, LabelMode mode) {
  if (window == 0 || labels.steps() < window) {
    throw Error(ErrorKind::InvalidConfig, "labels cover fewer steps than one window");
  }
  const std::vector<std::uint8_t> track = labels.sensor_track(sensor);
  std::vector<std::uint8_t> full =
      mode == LabelMode::Window ? window_labels(track, window) : track;
  return {full.begin() + static_cast<std::ptrdiff_t>(window - 1), full.end()};
}

ConfusionCounts score_sensor(const std::vector<Flags>& rows, const LabelTrack& labels,
                             std::size_t sensor, std::size_t window, LabelMode mode) {
  const auto truth = step_labels(labels, sensor, window, mode);
  std::vector<std::uint8_t> flags(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (sensor >= rows[r].size()) throw Error(ErrorKind::DimMismatch, "flag row shorter than sensor index");
    flags[r] = rows[r][sensor] == 1 ? 1 : 0;
  }
  return confusion(flags, truth);
}

ConfusionCounts score_all_sensors(const std::vector<Flags>& rows, const LabelTrack& labels,
                                  std::size_t window, LabelMode mode) {
  ConfusionCounts total;
  for (std::size_t s = 0; s < labels.sensors(); ++s) total += score_sensor(rows, labels, s, window, mode);
  return total;
}

ScenarioSpec reference_spec(std::uint64_t seed) {
  ScenarioSpec spec = scenario_preset("binshift-6000");
  spec.seed = seed;
  return spec;
}

DetectorBundle reference_models(const DetectorConfig& cfg, std::uint64_t seed) {
  const ScenarioSpec spec = reference_spec(seed);
  const Scenario sc = generate(spec);
  return train_detectors(sc.readings, 0, spec.bin_size, cfg);
}

std::array<DetectorScore, 3> score_scenario(const DetectorBundle& models, const ScenarioSpec& spec,
                                            const EvalOptions& opt, double* anomalous_fraction) {
  const Scenario sc = generate(spec);
  DetectorBundle bundle = models;
  if (opt.recalibrate) {
    calibrate_detectors(bundle, sc.readings, 0, normal_prefix(spec), opt.c, opt.q);
  }
  const BulkFlags flags = bulk_flags(sc.readings, bundle);
  std::array<DetectorScore, 3> out{};
  for (const DetectorKind k : kAllDetectors) {
    const auto& track = flags.track(k);
    if (track.empty()) continue;
    out[index_of(k)] =
        make_score(score_sensor(track, sc.labels, spec.anomaly_sensor, bundle.window, opt.labels));
  }
  if (anomalous_fraction != nullptr) {
    const auto truth = step_labels(sc.labels, spec.anomaly_sensor, bundle.window, opt.labels);
    *anomalous_fraction = ratio(static_cast<std::size_t>(std::count(truth.begin(), truth.end(), 1)),
                                truth.size());
  }
  return out;
}

namespace {

template <typename Configure>
SweepReport run_sweep(const DetectorBundle& models, std::span<const double> grid, const ScenarioSpec& base,
                      const EvalOptions& opt, Configure&& configure) {
  if (!std::is_sorted(grid.begin(), grid.end()) ||
      std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
    throw Error(ErrorKind::InvalidConfig, "grid: values must be strictly increasing");
  }
  SweepReport report;
  report.points.resize(grid.size());
  auto eval_point = [&](std::size_t i) {
    ScenarioSpec spec = base;
    spec.seed = derive_seed(opt.seed, i);
    configure(spec, grid[i]);
    SweepPoint& point = report.points[i];
    point.value = grid[i];
    point.scores = score_scenario(models, spec, opt, &point.anomalous_fraction);
  };
  const std::size_t jobs = std::clamp<std::size_t>(opt.jobs, 1, std::max<std::size_t>(grid.size(), 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) eval_point(i);
  } else {
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) {
      pool.emplace_back([&, j] {
        try {
          for (std::size_t i = j; i < grid.size(); i += jobs) eval_point(i);
        } catch (...) {
          errors[j] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const SweepPoint& point = report.points[i];
    for (const DetectorKind k : kAllDetectors) {
      auto& onset = report.onset[index_of(k)];
      if (!onset && point.scores[index_of(k)].metrics.f1 > 0.5) onset = grid[i];
    }
  }
  return report;
}

}  // namespace

SweepReport mean_sweep(const DetectorBundle& models, DistKind kind, std::span<const double> grid,
                       ScenarioSpec base, const EvalOptions& opt) {
  base.anomaly = AnomalyKind::Distribution;
  SweepReport report = run_sweep(models, grid, base, opt, [kind](ScenarioSpec& spec, double mean) {
    spec.dist.kind = kind;
    spec.dist.mean = mean;
  });
  report.variable = "mean";
  report.scenario = std::string(to_string(kind));
  return report;
}

SweepReport probability_sweep(const DetectorBundle& models, std::span<const double> grid,
                              ScenarioSpec base, const EvalOptions& opt) {
  if (base.anomaly != AnomalyKind::Distribution) base.anomaly = AnomalyKind::Erasure;
  const bool erasure = base.anomaly == AnomalyKind::Erasure;
  SweepReport report = run_sweep(models, grid, base, opt, [erasure](ScenarioSpec& spec, double p) {
    if (erasure) {
      spec.erasure_rate = p;
    } else {
      spec.p = p;
    }
  });
  report.variable = "p";
  report.scenario = erasure ? "erasure" : "distribution";
  return report;
}

RopeSummary rope_summary(const SweepReport& report, const RopeBand& band) {
  if (!(band.low < band.high)) throw Error(ErrorKind::InvalidConfig, "rope: low must be below high");
  RopeSummary s;
  for (const auto& p : report.points) {
    const bool in = band.contains(p.value);
    (in ? s.inside_points : s.outside_points) += 1;
    for (const DetectorKind k : kAllDetectors) {
      (in ? s.inside_f1 : s.outside_f1)[index_of(k)] += p.scores[index_of(k)].metrics.f1;
    }
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (s.inside_points > 0) s.inside_f1[i] /= static_cast<double>(s.inside_points);
    if (s.outside_points > 0) s.outside_f1[i] /= static_cast<double>(s.outside_points);
  }
  return s;
}

std::vector<BenchRow> bench(const DetectorBundle& models, const ReadingMatrix& stream,
                            std::span<const DetectorKind> kinds, std::size_t reps) {
  if (reps < 3) throw Error(ErrorKind::InvalidConfig, "reps: benchmarks need at least 3 repetitions");
  std::vector<BenchRow> rows(kinds.size());
  for (std::size_t i = 0; i < kinds.size(); ++i) rows[i].kind = kinds[i];
  for (std::size_t rep = 0; rep < reps; ++rep) {
    for (auto& row : rows) {
      const StreamResult r = run_stream(row.kind, stream, models, true);
      row.rep_mean_ns.push_back(r.timing.mean_ns);
      row.timing = r.timing;
      row.steps_evaluated = r.steps_evaluated;
      row.ae_invocations = r.ae_invocations;
      row.pca_flagged_steps = r.pca_flagged_steps;
    }
  }
  for (auto& row : rows) row.median_of_means_ns = median_of(row.rep_mean_ns);
  return rows;
}

std::vector<Table2Row> table2(const DetectorBundle& models, const Scenario& scenario,
                              std::size_t sensor, std::size_t timing_steps, std::size_t reps,
                              LabelMode mode) {
  const BulkFlags flags = bulk_flags(scenario.readings, models);
  const auto rows_available = static_cast<std::size_t>(scenario.readings.rows());
  const std::size_t timed = std::min(timing_steps, rows_available);
  const ReadingMatrix slice = scenario.readings.topRows(static_cast<Eigen::Index>(timed));
  const std::vector<BenchRow> times = bench(models, slice, kAllDetectors, reps);
  std::vector<Table2Row> out;
  for (std::size_t i = 0; i < kAllDetectors.size(); ++i) {
    const DetectorKind k = kAllDetectors[i];
    Table2Row row;
    row.kind = k;
    row.sensor = make_score(score_sensor(flags.track(k), scenario.labels, sensor, models.window, mode));
    row.all_tracks = make_score(score_all_sensors(flags.track(k), scenario.labels, models.window, mode));
    row.mean_step_ms = times[i].median_of_means_ns / 1e6;
    row.median_step_ms = times[i].timing.median_ns / 1e6;
    row.ae_invocations = times[i].ae_invocations;
    row.timed_steps = times[i].steps_evaluated;
    out.push_back(row);
  }
  return out;
}

ReductionCurve response_reduction_curve(const DetectorBundle& models, ScenarioSpec base,
                                        std::span<const double> rates, std::size_t reps) {
  reps = std::max<std::size_t>(reps, 1);
  base.anomaly = AnomalyKind::RateShift;
  ReductionCurve curve;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const double rate : rates) {
    ScenarioSpec spec = base;
    spec.rate = rate;
    const Scenario sc = generate(spec);
    std::vector<double> ae_means;
    std::vector<double> hybrid_means;
    ReductionPoint point;
    point.rate = rate;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const StreamResult ae = run_stream(DetectorKind::Ae, sc.readings, models, true);
      const StreamResult hy = run_stream(DetectorKind::Hybrid, sc.readings, models, true);
      ae_means.push_back(ae.timing.mean_ns);
      hybrid_means.push_back(hy.timing.mean_ns);
      point.ae_invocations = hy.ae_invocations;
      point.steps = hy.steps_evaluated;
    }
    point.ae_mean_ns = median_of(ae_means);
    point.hybrid_mean_ns = median_of(hybrid_means);
    point.reduction_pct = 100.0 * (point.ae_mean_ns - point.hybrid_mean_ns) / point.ae_mean_ns;
    xs.push_back(rate);
    ys.push_back(point.reduction_pct);
    curve.points.push_back(point);
  }
  curve.pearson = pearson_r(xs, ys);
  return curve;
}

std::string sweep_csv(const SweepReport& report) {
  std::ostringstream out;
  out << report.variable << ',' << metric_header("") << ",anomalous_fraction\n";
  for (const auto& p : report.points) {
    out << format_real(p.value);
    for (const DetectorKind k : kAllDetectors) put_metrics(out, p.scores[index_of(k)].metrics);
    out << ',' << format_real(p.anomalous_fraction) << '\n';
  }
  return out.str();
}

std::string sweep_json(const SweepReport& report, const std::string& provenance) {
  json j;
  j["provenance"] = provenance;
  j["variable"] = report.variable;
  j["scenario"] = report.scenario;
  json onset;
  for (const DetectorKind k : kAllDetectors) {
    const auto& o = report.onset[index_of(k)];
    onset[std::string(to_string(k))] = o ? json(*o) : json(nullptr);
  }
  j["onset"] = onset;
  json points = json::array();
  for (const auto& p : report.points) {
    json row;
    row["value"] = p.value;
    row["anomalous_fraction"] = p.anomalous_fraction;
    for (const DetectorKind k : kAllDetectors) row[std::string(to_string(k))] = score_json(p.scores[index_of(k)]);
    points.push_back(row);
  }
  j["points"] = points;
  if (report.variable == "mean") {
    const RopeSummary r = rope_summary(report, RopeBand{});
    json rope;
    for (const DetectorKind k : kAllDetectors) {
      rope[std::string(to_string(k))] = {{"inside_f1", r.inside_f1[index_of(k)]},
                                         {"outside_f1", r.outside_f1[index_of(k)]}};
    }
    rope["band"] = {45.0, 55.0};
    j["rope"] = rope;
  }
  return j.dump(2) + "\n";
}

std::string table2_csv(const std::vector<Table2Row>& rows) {
  std::ostringstream out;
  out << "detector,precision,recall,f1,all_tracks_f1,mean_step_ms,median_step_ms,ae_invocations,"
         "timed_steps\n";
  for (const auto& r : rows) {
    out << to_string(r.kind);
    put_metrics(out, r.sensor.metrics);
    out << ',' << format_real(r.all_tracks.metrics.f1) << ',' << format_real(r.mean_step_ms) << ','
        << format_real(r.median_step_ms) << ',' << r.ae_invocations << ',' << r.timed_steps << '\n';
  }
  return out.str();
}

std::string table2_json(const std::vector<Table2Row>& rows, const std::string& provenance) {
  json j;
  j["provenance"] = provenance;
  json list = json::array();
  for (const auto& r : rows) {
    list.push_back({{"detector", std::string(to_string(r.kind))},
                    {"sensor", score_json(r.sensor)},
                    {"all_tracks", score_json(r.all_tracks)},
                    {"mean_step_ms", r.mean_step_ms},
                    {"median_step_ms", r.median_step_ms},
                    {"ae_invocations", r.ae_invocations},
                    {"timed_steps", r.timed_steps}});
  }
  j["rows"] = list;
  return j.dump(2) + "\n";
}

std::string reduction_csv(const ReductionCurve& curve) {
  std::ostringstream out;
  out << "anomaly_rate,ae_mean_ns,hybrid_mean_ns,reduction_pct,ae_invocations,steps\n";
  for (const auto& p : curve.points) {
    out << format_real(p.rate) << ',' << format_real(p.ae_mean_ns) << ','
        << format_real(p.hybrid_mean_ns) << ',' << format_real(p.reduction_pct) << ','
        << p.ae_invocations << ',' << p.steps << '\n';
  }
  return out.str();
}

std::string reduction_json(const ReductionCurve& curve, const std::string& provenance) {
  json j;
  j["provenance"] = provenance;
  j["pearson_r"] = curve.pearson;
  json list = json::array();
  for (const auto& p : curve.points) {
    list.push_back({{"anomaly_rate", p.rate},
                    {"ae_mean_ns", p.ae_mean_ns},
                    {"hybrid_mean_ns", p.hybrid_mean_ns},
                    {"reduction_pct", p.reduction_pct},
                    {"ae_invocations", p.ae_invocations},
                    {"steps", p.steps}});
  }
  j["points"] = list;
  return j.dump(2) + "\n";
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "detector,median_of_means_ns,mean_ns,median_ns,p95_ns,reps,steps,ae_invocations\n";
  for (const auto& r : rows) {
    out << to_string(r.kind) << ',' << format_real(r.median_of_means_ns) << ','
        << format_real(r.timing.mean_ns) << ',' << format_real(r.timing.median_ns) << ','
        << format_real(r.timing.p95_ns) << ',' << r.rep_mean_ns.size() << ',' << r.steps_evaluated
        << ',' << r.ae_invocations << '\n';
  }
  return out.str();
}

}  // namespace corrdet
