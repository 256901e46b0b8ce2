// Prints one PASS/FAIL line per acceptance criterion, followed by the
// measurements behind it. Exit status is 0 once every check has run; pass
// --strict to turn any FAIL into exit status 1.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <functional>
#include <map>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "cli.hpp"
#include "corrdet/config.hpp"
#include "corrdet/distance.hpp"
#include "corrdet/eval.hpp"
#include "corrdet/io.hpp"
#include "corrdet/pca.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace corrdet;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- 1 --------------------------------------------------------------------

Outcome gradient_criterion() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  Pcg32 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    AeConfig cfg;
    cfg.hidden = 2 + rng.below(7);                    // 2..8
    cfg.latent = 1 + rng.below(static_cast<std::uint32_t>(cfg.hidden));
    cfg.input_len = 4 + rng.below(9);                 // 4..12
    cfg.seed = derive_seed(7, static_cast<std::uint64_t>(trial));
    const AeModel m = init_autoencoder(cfg);
    const Vector x = oracle::random_matrix(rng, static_cast<Eigen::Index>(cfg.input_len), 1).col(0);
    Vector g;
    loss_and_gradient(m, Matrix(x), g);
    worst = std::max(worst, oracle::relative_error(g, oracle::ae_numeric_gradient(m, x)));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 60.0, fmt("max relative error %.3g over 20 trials, %.1f s", worst, secs)};
}

// ---- 2 --------------------------------------------------------------------

Outcome pca_criterion() {
  Pcg32 rng(77);
  double worst_component = 0.0;
  double worst_orth = 0.0;
  double worst_var = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = static_cast<Eigen::Index>(3 + rng.below(48));  // 3..50
    const auto n = static_cast<Eigen::Index>(2 + rng.below(19));  // 2..20
    const auto max_k = std::min<Eigen::Index>(n, m - 1);
    const auto k = static_cast<std::size_t>(1 + rng.below(static_cast<std::uint32_t>(max_k)));
    const Matrix x = oracle::random_matrix(rng, m, n, 1.0 + 9.0 * rng.uniform());
    const PcaModel model = fit_pca(x, k);
    const oracle::Pca ref = oracle::pca(x, k);
    for (std::size_t r = 0; r < k; ++r) {
      double same = 0.0, flipped = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const double a = model.components(static_cast<Eigen::Index>(r), j);
        const double b = ref.components[r][static_cast<std::size_t>(j)];
        same = std::max(same, std::abs(a - b));
        flipped = std::max(flipped, std::abs(a + b));
      }
      worst_component = std::max(worst_component, std::min(same, flipped));
      worst_var = std::max(worst_var, std::abs(model.explained_variance(static_cast<Eigen::Index>(r)) - ref.variance[r]) /
                                          std::max(1.0, ref.variance[r]));
    }
    const Matrix gram = model.components * model.components.transpose();
    worst_orth = std::max(worst_orth, (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff());
  }
  return {worst_component < 1e-8 && worst_orth < 1e-8 && worst_var < 1e-8,
          fmt("max component diff %.3g, max orthonormality error %.3g, max variance diff %.3g (100 matrices)",
              worst_component, worst_orth, worst_var)};
}

// ---- 3 --------------------------------------------------------------------

Outcome distance_criterion() {
  Pcg32 rng(99);
  std::size_t violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng.below(7));
    const auto dim = static_cast<Eigen::Index>(1 + rng.below(6));
    const Matrix z = oracle::random_matrix(rng, dim, n, 1.0 + 10.0 * rng.uniform());
    const Matrix d = distance_matrix(z).d;
    for (Eigen::Index i = 0; i < n; ++i) {
      violations += d(i, i) != 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        violations += d(i, j) != d(j, i);
        violations += d(i, j) < 0.0;
        for (Eigen::Index k = 0; k < n; ++k) violations += d(i, k) > d(i, j) + d(j, k) + 1e-12;
      }
    }
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(static_cast<std::uint32_t>(i + 1))]);
    Matrix zp(dim, n);
    for (Eigen::Index j = 0; j < n; ++j) zp.col(j) = z.col(perm[static_cast<std::size_t>(j)]);
    const Matrix dp = distance_matrix(zp).d;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        violations += std::abs(dp(i, j) - d(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)])) > 1e-12;
  }
  return {violations == 0, fmt("%zu violations of symmetry/diagonal/nonnegativity/triangle/permutation over 1000 sets",
                               violations)};
}

// ---- 4-7 ------------------------------------------------------------------

std::string prf(const DetectorScore& s) {
  return fmt("P=%.3f R=%.3f F1=%.3f", s.metrics.precision, s.metrics.recall, s.metrics.f1);
}

Outcome mean_shift_criterion(const DetectorBundle& models, double train_secs) {
  const auto t0 = Clock::now();
  const EvalOptions opt;
  const auto big = score_scenario(models, scenario_preset("fig1-shift-40"), opt);
  const auto small = score_scenario(models, scenario_preset("fig1-shift-5"), opt);
  const double secs = train_secs + seconds_since(t0);
  const auto& pb = big[index_of(DetectorKind::Pca)];
  const auto& ab = big[index_of(DetectorKind::Ae)];
  const auto& ps = small[index_of(DetectorKind::Pca)];
  const auto& as = small[index_of(DetectorKind::Ae)];
  const bool pass = pb.metrics.recall >= 0.9 && ab.metrics.recall >= 0.9 && ps.metrics.recall > as.metrics.recall &&
                    secs < 300.0;
  return {pass, "delta=40: pca " + prf(pb) + ", ae " + prf(ab) + "; delta=5: pca " + prf(ps) + ", ae " + prf(as) +
                    fmt("; %.0f s including training", secs)};
}

Outcome erasure_criterion(const DetectorBundle& models) {
  const EvalOptions opt;
  const auto e5 = score_scenario(models, scenario_preset("fig1-erasure-5"), opt);
  const auto e20 = score_scenario(models, scenario_preset("fig1-erasure-20"), opt);
  const auto& p5 = e5[index_of(DetectorKind::Pca)];
  const auto& a5 = e5[index_of(DetectorKind::Ae)];
  const auto& p20 = e20[index_of(DetectorKind::Pca)];
  const auto& a20 = e20[index_of(DetectorKind::Ae)];
  const bool pass = a5.metrics.f1 > 0.5 && a20.metrics.f1 > 0.5 && p20.metrics.f1 > p5.metrics.f1;
  return {pass, "5%: pca " + prf(p5) + ", ae " + prf(a5) + "; 20%: pca " + prf(p20) + ", ae " + prf(a20)};
}

std::string onset_text(const std::optional<double>& v) { return v ? fmt("%.3f", *v) : std::string("none"); }

Outcome onset_criterion(const DetectorBundle& models) {
  const auto grid = probability_zoom_grid();
  const SweepReport r = probability_sweep(models, grid, scenario_preset("fig1-erasure-5"), EvalOptions{});
  const auto& pca = r.onset[index_of(DetectorKind::Pca)];
  const auto& ae = r.onset[index_of(DetectorKind::Ae)];
  const bool pass = pca && ae && *pca <= 0.5 * *ae;
  std::string curve;
  for (std::size_t i = 0; i <= 10 && i < r.points.size(); ++i) {
    const auto& p = r.points[i];
    curve += fmt(" p=%.3f:%.2f/%.2f", p.value, p.scores[0].metrics.f1, p.scores[1].metrics.f1);
  }
  return {pass, "erasure sweep on 0..0.1, onset = first F1 > 0.5: pca " + onset_text(pca) + ", ae " + onset_text(ae) +
                    "; F1 pca/ae:" + curve};
}

Outcome rope_criterion(const DetectorBundle& models) {
  bool pass = true;
  std::string detail;
  for (const DistKind k : {DistKind::Normal, DistKind::Uniform, DistKind::Point}) {
    const SweepReport r = mean_sweep(models, k, odd_mean_grid(), scenario_preset("fig1-normal-80"), EvalOptions{});
    const RopeSummary s = rope_summary(r, RopeBand{});
    const double pca = s.inside_f1[index_of(DetectorKind::Pca)];
    const double ae = s.inside_f1[index_of(DetectorKind::Ae)];
    pass = pass && ae < pca;
    detail += fmt("%s inside-ROPE F1 pca %.3f ae %.3f (outside %.3f / %.3f); ", std::string(to_string(k)).c_str(), pca,
                  ae, s.outside_f1[index_of(DetectorKind::Pca)], s.outside_f1[index_of(DetectorKind::Ae)]);
  }
  return {pass, detail};
}

// ---- 8-10 -----------------------------------------------------------------

Outcome table2_criterion(const DetectorBundle& models, const RunConfig& cfg) {
  const Scenario sc = generate(reference_spec(cfg.seed));
  const auto rows = table2(models, sc, 3, cfg.timing_steps, cfg.reps, LabelMode::Window);
  const auto& p = rows[index_of(DetectorKind::Pca)];
  const auto& a = rows[index_of(DetectorKind::Ae)];
  const auto& h = rows[index_of(DetectorKind::Hybrid)];
  const double fp = p.sensor.metrics.f1, fa = a.sensor.metrics.f1, fh = h.sensor.metrics.f1;
  const bool f1_ok = fa >= fh && fh >= fa - 0.05 && fa >= fp + 0.10 && fh >= fp + 0.10;
  const bool time_ok = p.mean_step_ms < h.mean_step_ms && h.mean_step_ms < a.mean_step_ms &&
                       p.mean_step_ms * 10.0 <= a.mean_step_ms;
  std::string detail = fmt("sensor-3 F1 pca %.4f ae %.4f hybrid %.4f (%s); ms/step pca %.4f hybrid %.4f ae %.4f (%s)",
                           fp, fa, fh, f1_ok ? "ordering ok" : "ordering fails", p.mean_step_ms, h.mean_step_ms,
                           a.mean_step_ms, time_ok ? "ordering ok" : "ordering fails");
  detail += fmt("; all-track F1 pca %.4f ae %.4f hybrid %.4f", p.all_tracks.metrics.f1, a.all_tracks.metrics.f1,
                h.all_tracks.metrics.f1);
  return {f1_ok && time_ok, detail};
}

Outcome reduction_criterion(const DetectorBundle& models, const RunConfig& cfg) {
  ScenarioSpec base = reference_spec(cfg.seed);
  base.steps = cfg.timing_steps;
  const ReductionCurve c = response_reduction_curve(models, base, response_rate_grid(), 1);
  const double gap = c.points.front().reduction_pct - c.points.back().reduction_pct;
  std::string curve;
  for (const auto& p : c.points) curve += fmt(" %.0f%%:%.1f", p.rate * 100, p.reduction_pct);
  return {c.pearson <= -0.9 && gap >= 15.0,
          fmt("R = %.4f, reduction(20%%) - reduction(100%%) = %.1f points; reduction by rate:", c.pearson, gap) + curve};
}

Outcome gating_criterion(const DetectorBundle& reference) {
  std::size_t streams = 0, bad_counts = 0, bad_fp = 0;
  std::size_t hybrid_fp_total = 0, pca_fp_total = 0, sensor_fp_hybrid = 0, sensor_fp_pca = 0;
  auto check = [&](const DetectorBundle& models, const Scenario& sc) {
    const StreamResult pca = run_stream(DetectorKind::Pca, sc.readings, models, false);
    const StreamResult hy = run_stream(DetectorKind::Hybrid, sc.readings, models, false);
    ++streams;
    bad_counts += hy.ae_invocations != hy.pca_flagged_steps;
    std::size_t pca_steps_flagged = 0;
    std::size_t fp_h = 0, fp_p = 0;
    std::vector<std::vector<std::uint8_t>> truth;
    for (std::size_t s = 0; s < sc.labels.sensors(); ++s) truth.push_back(window_labels(sc.labels.sensor_track(s), models.window));
    for (std::size_t t = models.window - 1; t < hy.verdicts.size(); ++t) {
      bool any_label = false;
      for (const auto& tr : truth) any_label = any_label || tr[t];
      auto any_flag = [](const Flags& f) { return std::find(f.begin(), f.end(), 1) != f.end(); };
      pca_steps_flagged += any_flag(pca.verdicts[t].flags);
      if (!any_label) {
        fp_h += any_flag(hy.verdicts[t].flags);
        fp_p += any_flag(pca.verdicts[t].flags);
      }
      for (std::size_t s = 0; s < truth.size(); ++s) {
        if (truth[s][t]) continue;
        sensor_fp_hybrid += hy.verdicts[t].flags[s] == 1;
        sensor_fp_pca += pca.verdicts[t].flags[s] == 1;
      }
    }
    bad_counts += hy.pca_flagged_steps != pca_steps_flagged;
    bad_fp += fp_h > fp_p;
    hybrid_fp_total += fp_h;
    pca_fp_total += fp_p;
  };
  for (const auto& name : scenario_preset_names()) {
    if (name.rfind("fig1-", 0) != 0) continue;
    const ScenarioSpec spec = scenario_preset(name);
    DetectorBundle m = reference;
    calibrate_detectors(m, generate(spec).readings, 0, spec.anomaly_start, 3.0, 0.99);
    check(m, generate(spec));
  }
  ScenarioSpec lab = reference_spec(1);
  lab.steps = 3000;
  check(reference, generate(lab));
  for (const double rate : {0.2, 0.6, 1.0}) {
    ScenarioSpec r = lab;
    r.anomaly = AnomalyKind::RateShift;
    r.rate = rate;
    check(reference, generate(r));
  }
  return {bad_counts == 0 && bad_fp == 0,
          fmt("%zu streams: %zu counter mismatches, %zu streams with more hybrid than PCA false-positive steps "
              "(totals %zu vs %zu); per-sensor false flags hybrid %zu vs pca %zu (diagnostic)",
              streams, bad_counts, bad_fp, hybrid_fp_total, pca_fp_total, sensor_fp_hybrid, sensor_fp_pca)};
}

// ---- 11 -------------------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_text_file(e.path().string());
  }
  return files;
}

// Drops fields that hold wall-clock measurements.
std::string without_timing(const std::string& json_text) {
  auto j = nlohmann::json::parse(json_text);
  for (auto& row : j["rows"]) {
    row.erase("mean_step_ms");
    row.erase("median_step_ms");
  }
  return j.dump();
}

Outcome determinism_criterion() {
  const fs::path root = fs::temp_directory_path() / ("corrdet_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::vector<std::string> tiny = {"--set", "window=20", "--set", "ae_hidden=6", "--set", "ae_latent=2",
                                         "--set", "ae_epochs=3"};
  std::size_t commands = 0;
  std::string failure;
  auto pipeline = [&](const fs::path& out) {
    const std::string o = out.string();
    std::vector<std::vector<std::string>> cmds = {
        {"synth", "--preset", "binshift-6000", "--param", "steps=2000", "--out", o + "/ref"},
        {"synth", "--preset", "fig1-shift-5", "--out", o + "/s5"},
        {"train", "--data", o + "/ref/data.csv", "--labels", o + "/ref/labels.csv", "--end", "1000", "--out", o + "/m"},
        {"calibrate", "--models", o + "/m", "--data", o + "/s5/data.csv", "--labels", o + "/s5/labels.csv", "--end",
         "250", "--out", o + "/m5"},
        {"run", "--data", o + "/s5/data.csv", "--pca-model", o + "/m/pca.model", "--ae-model", o + "/m/ae.model",
         "--calibration", o + "/m5/calibration.json", "--timing", "off", "--out", o + "/run"},
        {"eval", "--preset", "fig1", "--models", o + "/m", "--out", o + "/fig1"},
        {"eval", "--preset", "probability-zoom", "--models", o + "/m", "--out", o + "/pz"},
        {"eval", "--preset", "table2", "--data", o + "/ref/data.csv", "--labels", o + "/ref/labels.csv", "--models",
         o + "/m", "--set", "timing_steps=200", "--out", o + "/t2"},
    };
    for (auto args : cmds) {
      args.insert(args.end(), tiny.begin(), tiny.end());
      std::ostringstream sink;
      const int rc = run_cli(args, sink, sink);
      ++commands;
      if (rc != 0 && failure.empty()) failure = args[0] + " exited " + std::to_string(rc) + ": " + sink.str();
    }
  };
  pipeline(root / "a");
  pipeline(root / "b");
  auto a = snapshot(root / "a");
  auto b = snapshot(root / "b");
  std::size_t compared = 0, differing = 0;
  std::string first_diff;
  for (auto& [name, bytes] : a) {
    if (name == "t2/table2.csv") continue;  // timing columns; JSON copy compared below
    std::string other = b.count(name) ? b[name] : std::string("<missing>");
    std::string mine = bytes;
    if (name == "t2/table2.json") {
      mine = without_timing(mine);
      other = without_timing(other);
    }
    ++compared;
    if (mine != other) {
      ++differing;
      if (first_diff.empty()) first_diff = name;
    }
  }
  fs::remove_all(root);
  const bool pass = failure.empty() && differing == 0 && a.size() == b.size() && compared > 0;
  return {pass, fmt("%zu commands run twice, %zu output files compared byte for byte, %zu differ", commands / 2,
                    compared, differing) +
                    (first_diff.empty() ? "" : " (first: " + first_diff + ")") +
                    (failure.empty() ? "" : "; " + failure) +
                    "; step-time fields of table2/fig11/bench are wall-clock and excluded"};
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::string(argv[1]) == "--strict";
  std::vector<std::pair<std::string, Outcome>> results;
  auto report = [&](const std::string& id, const std::string& name, Outcome o) {
    std::cout << id << ' ' << (o.pass ? "PASS" : "FAIL") << ' ' << name << " :: " << o.detail << std::endl;
    results.emplace_back(id, std::move(o));
  };
  const auto t0 = Clock::now();
  report("C1", "gradient correctness", gradient_criterion());
  report("C2", "PCA oracle equivalence", pca_criterion());
  report("C3", "distance-matrix properties", distance_criterion());

  const RunConfig cfg;
  const auto train_start = Clock::now();
  const DetectorBundle models = reference_models(cfg.detector_config(), cfg.seed);
  const double train_secs = seconds_since(train_start);
  std::cout << "   reference models fitted on bin 0 of the lab stand-in in " << fmt("%.0f", train_secs) << " s"
            << std::endl;

  report("C4", "mean-shift reproduction", mean_shift_criterion(models, train_secs));
  report("C5", "erasure reproduction", erasure_criterion(models));
  report("C6", "probability-sweep onset ordering", onset_criterion(models));
  report("C7", "ROPE false-positive property", rope_criterion(models));
  report("C8", "bin-shift comparison pattern", table2_criterion(models, cfg));
  report("C9", "response-time reduction curve", reduction_criterion(models, cfg));
  report("C10", "hybrid gating soundness", gating_criterion(models));
  report("C11", "determinism", determinism_criterion());

  std::size_t passed = 0;
  for (const auto& [id, o] : results) passed += o.pass;
  std::cout << passed << "/" << results.size() << " criteria pass (" << fmt("%.0f", seconds_since(t0)) << " s)"
            << std::endl;
  return strict && passed != results.size() ? 1 : 0;
}
