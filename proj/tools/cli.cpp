#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "corrdet/config.hpp"
#include "corrdet/error.hpp"
#include "corrdet/eval.hpp"
#include "corrdet/ingest.hpp"
#include "corrdet/io.hpp"
#include "corrdet/model_io.hpp"
#include "corrdet/synth.hpp"
#include "corrdet/textio.hpp"
#include "json.hpp"

namespace corrdet {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Options every subcommand accepts. Flags override config-file keys.
struct CommonOptions {
  std::string config_file;
  std::vector<std::string> sets;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "flat key = value config file");
    app->add_option("--set", sets, "override one config key (key=value)");
    app->add_option("--out", out, "output directory");
    app->add_option("--seed", seed, "master seed");
    app->add_option("--jobs", jobs, "sweep points evaluated in parallel");
  }

  RunConfig resolve() const {
    RunConfig cfg = config_file.empty() ? RunConfig{} : load_config(config_file);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::InvalidConfig, "--set expects key=value, got '" + kv + "'");
      cfg.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    if (!out.empty()) cfg.output_dir = out;
    cfg.validate();
    return cfg;
  }
};

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory '" + dir + "': " + ec.message());
}

std::string with_comment(const std::string& provenance, const std::string& body) {
  return "# " + provenance + "\n" + body;
}

ScenarioSpec resolve_scenario(const std::string& name_or_path) {
  if (name_or_path.empty()) throw Error(ErrorKind::InvalidConfig, "scenario: give a preset name or a scenario file");
  if (fs::exists(name_or_path)) return load_scenario(name_or_path);
  return scenario_preset(name_or_path);
}

ScenarioSpec apply_params(const ScenarioSpec& spec, const std::vector<std::string>& params) {
  std::string text = format_scenario(spec);
  for (const auto& p : params) {
    if (p.find('=') == std::string::npos) throw Error(ErrorKind::InvalidConfig, "--param expects key=value, got '" + p + "'");
    text += p + "\n";
  }
  std::istringstream in(text);
  return parse_scenario(in);
}

struct ModelPaths {
  std::string dir;
  std::string pca;
  std::string ae;
  std::string calibration;

  void attach(CLI::App* app) {
    app->add_option("--models", dir, "directory holding pca.model, ae.model and calibration.json");
    app->add_option("--pca-model", pca, "PCA model file");
    app->add_option("--ae-model", ae, "autoencoder model file");
    app->add_option("--calibration", calibration, "calibration JSON");
  }

  bool given() const { return !dir.empty() || !pca.empty() || !ae.empty() || !calibration.empty(); }

  DetectorBundle load(bool need_pca, bool need_ae) const {
    auto pick = [&](const std::string& file, const char* name) {
      if (!file.empty()) return file;
      if (dir.empty()) throw Error(ErrorKind::InvalidConfig, std::string("--models or an explicit ") + name + " path is required");
      return join_path(dir, name);
    };
    DetectorBundle b;
    if (need_pca) {
      b.pca = load_pca(pick(pca, "pca.model"));
      b.has_pca = true;
    }
    if (need_ae) {
      b.ae = load_autoencoder(pick(ae, "ae.model"));
      b.has_ae = true;
    }
    apply_calibration_json(b, read_text_file(pick(calibration, "calibration.json")));
    return b;
  }
};

void check_window(const DetectorBundle& b, const RunConfig& cfg) {
  if (b.window != cfg.window) {
    throw Error(ErrorKind::DimMismatch, "window: models use W=" + std::to_string(b.window) +
                                            " but the config sets W=" + std::to_string(cfg.window));
  }
}

DetectorBundle models_or_reference(const ModelPaths& paths, const RunConfig& cfg, std::ostream& out) {
  if (paths.given()) {
    DetectorBundle b = paths.load(true, true);
    check_window(b, cfg);
    return b;
  }
  out << "training reference models on bin 0 of the lab stand-in (seed " << cfg.seed << ")\n";
  return reference_models(cfg.detector_config(), cfg.seed);
}

// Rows [begin, end) must lie inside the data and carry no anomaly label.
void check_unlabeled(const ReadingMatrix& readings, const std::string& labels, std::size_t begin,
                     std::size_t end) {
  const std::string range = "[" + std::to_string(begin) + ", " + std::to_string(end) + ")";
  if (end > static_cast<std::size_t>(readings.rows()) || begin >= end) {
    throw Error(ErrorKind::InvalidConfig, "end: range " + range + " is outside the data");
  }
  if (labels.empty()) return;
  const LabelTrack track = load_labels(labels);
  require_same_shape(readings, track);
  if (track.any_in(begin, end)) {
    throw Error(ErrorKind::InvalidConfig, "labels: range " + range + " contains labeled anomalies");
  }
}

// ---- synth -----------------------------------------------------------------

struct SynthCmd {
  CommonOptions common;
  std::string preset;
  std::vector<std::string> params;

  void attach(CLI::App* app) {
    common.attach(app);
    app->add_option("--preset,--scenario", preset, "scenario preset name or scenario file");
    app->add_option("--param", params, "override one scenario field (key=value)");
  }

  int run(std::ostream& out) const {
    const RunConfig cfg = common.resolve();
    ScenarioSpec spec = resolve_scenario(preset.empty() ? cfg.scenario : preset);
    if (common.seed) spec.seed = *common.seed;
    spec = apply_params(spec, params);
    spec.validate();
    const Scenario sc = generate(spec);
    const std::string text = format_scenario(spec);
    const std::string prov = provenance_line(hash_hex(text), spec.seed);
    ensure_dir(cfg.output_dir);
    std::ostringstream data;
    write_readings_csv(data, sc.readings, {prov});
    std::ostringstream labels;
    write_labels_csv(labels, sc.labels, {prov});
    write_text_file(join_path(cfg.output_dir, "data.csv"), data.str());
    write_text_file(join_path(cfg.output_dir, "labels.csv"), labels.str());
    write_text_file(join_path(cfg.output_dir, "scenario.txt"), with_comment(prov, text));
    out << "wrote " << sc.readings.rows() << "x" << sc.readings.cols() << " readings, "
        << sc.labels.count() << " anomalous labels to " << cfg.output_dir << "\n";
    return kExitOk;
  }
};

// ---- ingest ----------------------------------------------------------------

std::vector<int> parse_ids(const std::string& text) {
  std::vector<int> ids;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    ids.push_back(static_cast<int>(parse_u64("motes", trim(part))));
  }
  if (ids.empty()) throw Error(ErrorKind::InvalidConfig, "motes: list is empty");
  return ids;
}

struct IngestCmd {
  CommonOptions common;
  std::string log;
  std::string motes;
  std::size_t select = 0;
  std::string field = "temperature";
  std::optional<std::int64_t> epoch_begin;
  std::optional<std::int64_t> epoch_end;

  void attach(CLI::App* app) {
    common.attach(app);
    app->add_option("--log", log, "whitespace-separated lab log")->required();
    app->add_option("--motes", motes, "comma-separated mote ids");
    app->add_option("--select", select, "pick this many motes with the highest mean pairwise correlation");
    app->add_option("--field", field, "temperature, humidity, light or voltage");
    app->add_option("--epoch-begin", epoch_begin, "first epoch (inclusive)");
    app->add_option("--epoch-end", epoch_end, "last epoch (exclusive)");
  }

  int run(std::ostream& out) const {
    const RunConfig cfg = common.resolve();
    const LabField f = parse_lab_field(field);
    const LabLog lab = load_lab_log(log);
    if (lab.records.empty()) throw Error(ErrorKind::NoData, "log '" + log + "' holds no parseable records");
    std::int64_t lo = lab.records.front().epoch;
    std::int64_t hi = lo;
    for (const auto& r : lab.records) {
      lo = std::min(lo, r.epoch);
      hi = std::max(hi, r.epoch);
    }
    const std::int64_t begin = epoch_begin.value_or(lo);
    const std::int64_t end = epoch_end.value_or(hi + 1);
    std::vector<int> ids;
    if (!motes.empty()) {
      ids = parse_ids(motes);
    } else if (select > 0) {
      std::vector<int> all;
      for (const auto& r : lab.records) all.push_back(r.mote_id);
      std::sort(all.begin(), all.end());
      all.erase(std::unique(all.begin(), all.end()), all.end());
      ids = most_correlated_motes(lab.records, all, select, f, begin, end);
    } else {
      throw Error(ErrorKind::InvalidConfig, "motes: give --motes or --select");
    }
    const AlignedSeries series = align(lab.records, ids, f, begin, end);

    std::string id_text;
    for (std::size_t i = 0; i < ids.size(); ++i) id_text += (i ? "," : "") + std::to_string(ids[i]);
    const std::string selection = "log=" + log + " motes=" + id_text + " field=" + std::string(to_string(f)) +
                                  " epochs=" + std::to_string(begin) + ":" + std::to_string(end);
    const std::string prov = provenance_line(hash_hex(selection), cfg.seed);
    ensure_dir(cfg.output_dir);
    std::ostringstream data;
    write_readings_csv(data, series.matrix,
                       {prov, "motes=" + id_text + " field=" + std::string(to_string(f)) +
                                  " first_epoch=" + std::to_string(series.first_epoch)});
    write_text_file(join_path(cfg.output_dir, "data.csv"), data.str());
    out << "parsed " << lab.records.size() << " records (" << lab.skipped << " skipped); motes "
        << id_text << "; " << series.matrix.rows() << " steps; filled cells:";
    for (const auto g : series.gap_report) out << ' ' << g;
    out << "\n";
    return kExitOk;
  }
};

// ---- train -----------------------------------------------------------------

struct TrainCmd {
  CommonOptions common;
  std::string data;
  std::string labels;
  std::size_t begin = 0;
  std::optional<std::size_t> end;

  void attach(CLI::App* app) {
    common.attach(app);
    app->add_option("--data", data, "readings CSV");
    app->add_option("--labels", labels, "labels CSV; training rows must be unlabeled");
    app->add_option("--begin", begin, "first training row");
    app->add_option("--end", end, "one past the last training row");
  }

  int run(std::ostream& out) const {
    const RunConfig cfg = common.resolve();
    const std::string path = data.empty() ? cfg.input : data;
    if (path.empty()) throw Error(ErrorKind::InvalidConfig, "input: --data is required");
    const ReadingMatrix readings = load_readings(path).readings;
    const std::size_t stop = end.value_or(static_cast<std::size_t>(readings.rows()));
    check_unlabeled(readings, labels, begin, stop);
    const DetectorBundle b = train_detectors(readings, begin, stop, cfg.detector_config());
    const std::string prov = provenance_line(config_hash(cfg), cfg.seed);
    ensure_dir(cfg.output_dir);
    save_pca(join_path(cfg.output_dir, "pca.model"), b.pca);
    save_autoencoder(join_path(cfg.output_dir, "ae.model"), b.ae);
    write_text_file(join_path(cfg.output_dir, "calibration.json"), calibration_json(b, prov));
    out << "trained on rows [" << begin << ", " << stop << "); PCA distance threshold "
        << format_real(b.pca_thresholds.distance_threshold) << ", AE loss threshold "
        << format_real(b.ae_thresholds.loss_threshold) << "\n";
    return kExitOk;
  }
};

// ---- calibrate -------------------------------------------------------------

struct CalibrateCmd {
  CommonOptions common;
  ModelPaths models;
  std::string data;
  std::string labels;
  std::size_t begin = 0;
  std::optional<std::size_t> end;

  void attach(CLI::App* app) {
    common.attach(app);
    models.attach(app);
    app->add_option("--data", data, "readings CSV");
    app->add_option("--labels", labels, "labels CSV; calibration rows must be unlabeled");
    app->add_option("--begin", begin, "first calibration row");
    app->add_option("--end", end, "one past the last calibration row");
  }

  int run(std::ostream& out) const {
    const RunConfig cfg = common.resolve();
    const std::string path = data.empty() ? cfg.input : data;
    if (path.empty()) throw Error(ErrorKind::InvalidConfig, "input: --data is required");
    DetectorBundle b = models.load(true, true);
    check_window(b, cfg);
    const ReadingMatrix readings = load_readings(path).readings;
    const std::size_t stop = end.value_or(static_cast<std::size_t>(readings.rows()));
    check_unlabeled(readings, labels, begin, stop);
    calibrate_detectors(b, readings, begin, stop, cfg.c, cfg.q, cfg.normalize);
    b.rule = cfg.rule;
    ensure_dir(cfg.output_dir);
    write_text_file(join_path(cfg.output_dir, "calibration.json"),
                    calibration_json(b, provenance_line(config_hash(cfg), cfg.seed)));
    out << "calibrated on rows [" << begin << ", " << stop << "); PCA distance threshold "
        << format_real(b.pca_thresholds.distance_threshold) << ", AE loss threshold "
        << format_real(b.ae_thresholds.loss_threshold) << "\n";
    return kExitOk;
  }
};

// ---- run -------------------------------------------------------------------

struct RunCmd {
  CommonOptions common;
  ModelPaths models;
  std::string data;
  std::string detector;
  std::string timing = "on";

  void attach(CLI::App* app) {
    common.attach(app);
    models.attach(app);
    app->add_option("--data", data, "readings CSV");
    app->add_option("--detector", detector, "pca, ae or hybrid");
    app->add_option("--timing", timing, "record step times (on) or write zeros (off)")
        ->check(CLI::IsMember({"on", "off"}));
  }

  int run(std::ostream& out) const {
    RunConfig cfg = common.resolve();
    if (!detector.empty()) cfg.detector = parse_detector_kind(detector);
    const std::string path = data.empty() ? cfg.input : data;
    if (path.empty()) throw Error(ErrorKind::InvalidConfig, "input: --data is required");
    const DetectorBundle b = models.load(cfg.detector != DetectorKind::Ae, cfg.detector != DetectorKind::Pca);
    check_window(b, cfg);
    const ReadingMatrix readings = load_readings(path).readings;
    const bool timed = timing == "on";
    const StreamResult r = run_stream(cfg.detector, readings, b, timed);

    const std::string prov = provenance_line(config_hash(cfg), cfg.seed);
    const std::vector<std::string> comments = {prov, "detector=" + std::string(to_string(cfg.detector))};
    ensure_dir(cfg.output_dir);
    std::ostringstream verdicts;
    write_verdicts_csv(verdicts, r.verdicts, b.sensors(), comments);
    std::ostringstream distances;
    write_distances_csv(distances, r.verdicts, b.sensors(), comments);
    write_text_file(join_path(cfg.output_dir, "verdicts.csv"), verdicts.str());
    write_text_file(join_path(cfg.output_dir, "distances.csv"), distances.str());

    std::vector<std::size_t> flagged(b.sensors(), 0);
    for (const auto& v : r.verdicts) {
      for (std::size_t s = 0; s < v.flags.size(); ++s) flagged[s] += v.flags[s] == 1 ? 1 : 0;
    }
    json summary = {{"provenance", prov},
                    {"detector", std::string(to_string(cfg.detector))},
                    {"steps", r.verdicts.size()},
                    {"steps_evaluated", r.steps_evaluated},
                    {"pca_flagged_steps", r.pca_flagged_steps},
                    {"ae_invocations", r.ae_invocations},
                    {"flagged_steps_per_sensor", flagged}};
    if (timed) {
      summary["mean_step_ns"] = r.timing.mean_ns;
      summary["median_step_ns"] = r.timing.median_ns;
      summary["p95_step_ns"] = r.timing.p95_ns;
    }
    write_text_file(join_path(cfg.output_dir, "summary.json"), summary.dump(2) + "\n");
    out << to_string(cfg.detector) << ": " << r.steps_evaluated << " steps evaluated, AE invoked "
        << r.ae_invocations << " times\n";
    return kExitOk;
  }
};

// ---- eval ------------------------------------------------------------------

struct EvalCmd {
  CommonOptions common;
  ModelPaths models;
  std::string preset;
  std::string data;
  std::string labels;
  std::size_t sensor = 3;
  std::vector<std::string> dists;

  void attach(CLI::App* app) {
    common.attach(app);
    models.attach(app);
    app->add_option("--preset", preset, "fig1, means, probability, probability-zoom, table2 or fig11")
        ->required()
        ->check(CLI::IsMember({"fig1", "means", "probability", "probability-zoom", "table2", "fig11"}));
    app->add_option("--data", data, "table2 on a recorded stream instead of the stand-in");
    app->add_option("--labels", labels, "labels of --data");
    app->add_option("--sensor", sensor, "anomalous sensor scored by table2");
    app->add_option("--dist", dists, "distributions for the means sweep (default all)");
  }

  int run(std::ostream& out) const {
    const RunConfig cfg = common.resolve();
    if (!data.empty() && (labels.empty() || !models.given())) {
      throw Error(ErrorKind::InvalidConfig, "data: table2 on recorded data needs --labels and --models");
    }
    // Read recorded inputs before any training so bad files fail fast.
    std::optional<Scenario> recorded;
    if (!data.empty()) {
      if (preset != "table2") throw Error(ErrorKind::InvalidConfig, "data: only the table2 preset reads --data");
      recorded = Scenario{load_readings(data).readings, load_labels(labels)};
      require_same_shape(recorded->readings, recorded->labels);
    }
    const std::string prov = provenance_line(config_hash(cfg), cfg.seed);
    const DetectorBundle b = models_or_reference(models, cfg, out);
    const EvalOptions opt = cfg.eval_options();
    ensure_dir(cfg.output_dir);
    auto emit = [&](const std::string& stem, const std::string& csv, const std::string& js) {
      write_text_file(join_path(cfg.output_dir, stem + ".csv"), with_comment(prov, csv));
      write_text_file(join_path(cfg.output_dir, stem + ".json"), js);
      out << "wrote " << join_path(cfg.output_dir, stem) << ".{csv,json}\n";
    };

    if (preset == "fig1") {
      std::ostringstream csv;
      csv << "scenario,pca_precision,pca_recall,pca_f1,ae_precision,ae_recall,ae_f1,hybrid_precision,"
             "hybrid_recall,hybrid_f1\n";
      json rows = json::array();
      for (const auto& name : scenario_preset_names()) {
        if (name.rfind("fig1-", 0) != 0) continue;
        ScenarioSpec spec = scenario_preset(name);
        spec.seed = cfg.seed;
        const auto scores = score_scenario(b, spec, opt);
        csv << name;
        json row = {{"scenario", name}};
        for (const DetectorKind k : kAllDetectors) {
          const auto& m = scores[index_of(k)].metrics;
          csv << ',' << format_real(m.precision) << ',' << format_real(m.recall) << ',' << format_real(m.f1);
          row[std::string(to_string(k))] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
        }
        csv << '\n';
        rows.push_back(row);
      }
      emit("fig1", csv.str(), json{{"provenance", prov}, {"rows", rows}}.dump(2) + "\n");
    } else if (preset == "means") {
      std::vector<std::string> kinds = dists;
      if (kinds.empty()) kinds = {"normal", "uniform", "poisson", "point"};
      const auto grid = odd_mean_grid();
      for (const auto& k : kinds) {
        const SweepReport r = mean_sweep(b, parse_dist_kind(k), grid, scenario_preset("fig1-normal-80"), opt);
        emit("means_" + k, sweep_csv(r), sweep_json(r, prov));
      }
    } else if (preset == "probability" || preset == "probability-zoom") {
      const auto grid = preset == "probability" ? probability_grid() : probability_zoom_grid();
      const SweepReport r = probability_sweep(b, grid, scenario_preset("fig1-erasure-5"), opt);
      emit(preset == "probability" ? "probability" : "probability_zoom", sweep_csv(r), sweep_json(r, prov));
    } else if (preset == "table2") {
      const Scenario sc = recorded ? *recorded : generate(reference_spec(cfg.seed));
      const auto rows = table2(b, sc, sensor, cfg.timing_steps, std::max<std::size_t>(cfg.reps, 3), opt.labels);
      emit("table2", table2_csv(rows), table2_json(rows, prov));
    } else {
      ScenarioSpec base = reference_spec(cfg.seed);
      base.steps = cfg.timing_steps;
      const auto curve = response_reduction_curve(b, base, response_rate_grid(), cfg.reps);
      emit("fig11", reduction_csv(curve), reduction_json(curve, prov));
      out << "pearson R = " << format_real(curve.pearson) << "\n";
    }
    return kExitOk;
  }
};

// ---- bench -----------------------------------------------------------------

struct BenchCmd {
  CommonOptions common;
  ModelPaths models;
  std::string data;

  void attach(CLI::App* app) {
    common.attach(app);
    models.attach(app);
    app->add_option("--data", data, "readings CSV (default: the lab stand-in)");
  }

  int run(std::ostream& out) const {
    const RunConfig cfg = common.resolve();
    std::optional<ReadingMatrix> stream;
    if (!data.empty()) stream = load_readings(data).readings;
    const DetectorBundle b = models_or_reference(models, cfg, out);
    if (!stream) stream = generate(reference_spec(cfg.seed)).readings;
    const auto rows_total = static_cast<std::size_t>(stream->rows());
    const ReadingMatrix slice = stream->topRows(static_cast<Eigen::Index>(std::min(cfg.timing_steps, rows_total)));
    const auto rows = bench(b, slice, kAllDetectors, std::max<std::size_t>(cfg.reps, 3));
    ensure_dir(cfg.output_dir);
    const std::string prov = provenance_line(config_hash(cfg), cfg.seed);
    write_text_file(join_path(cfg.output_dir, "bench.csv"), with_comment(prov, bench_csv(rows)));
    for (const auto& r : rows) {
      out << to_string(r.kind) << ": " << format_real(r.median_of_means_ns / 1e6) << " ms/step\n";
    }
    return kExitOk;
  }
};

int exit_code_for(ErrorKind kind) {
  return kind == ErrorKind::Io || kind == ErrorKind::Diverged ? kExitRuntime : kExitValidation;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Correlated-sensor anomaly detection with PCA, an LSTM autoencoder and their hybrid"};
  app.require_subcommand(1);
  SynthCmd synth;
  IngestCmd ingest;
  TrainCmd train;
  CalibrateCmd calibrate;
  RunCmd run;
  EvalCmd eval;
  BenchCmd bench_cmd;
  auto* synth_app = app.add_subcommand("synth", "generate a labeled scenario");
  auto* ingest_app = app.add_subcommand("ingest", "align lab-log motes into a readings CSV");
  auto* train_app = app.add_subcommand("train", "fit PCA and the autoencoder on anomaly-free rows");
  auto* calibrate_app = app.add_subcommand("calibrate", "refit normalization and thresholds of saved models");
  auto* run_app = app.add_subcommand("run", "stream a detector over a readings CSV");
  auto* eval_app = app.add_subcommand("eval", "accuracy sweeps, the bin-shift comparison and the response-rate curve");
  auto* bench_app = app.add_subcommand("bench", "per-step latency of every detector");
  synth.attach(synth_app);
  ingest.attach(ingest_app);
  train.attach(train_app);
  calibrate.attach(calibrate_app);
  run.attach(run_app);
  eval.attach(eval_app);
  bench_cmd.attach(bench_app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  try {
    if (synth_app->parsed()) return synth.run(out);
    if (ingest_app->parsed()) return ingest.run(out);
    if (train_app->parsed()) return train.run(out);
    if (calibrate_app->parsed()) return calibrate.run(out);
    if (run_app->parsed()) return run.run(out);
    if (eval_app->parsed()) return eval.run(out);
    return bench_cmd.run(out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace corrdet
