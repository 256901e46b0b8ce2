#include "corrdet/hybrid.hpp"

#include <algorithm>
#include <chrono>
#include <string>

#include "corrdet/error.hpp"
#include "corrdet/stats.hpp"

namespace corrdet {

namespace {

using Clock = std::chrono::steady_clock;

bool any_set(const Flags& flags) {
  return std::any_of(flags.begin(), flags.end(), [](std::uint8_t f) { return f != 0; });
}

// Distance matrices of every full-window step in rows [begin, end), given per-window latents.
template <typename Encode>
std::vector<DistanceMatrix> segment_matrices(const ReadingMatrix& normalized, std::size_t begin,
                                             std::size_t end, std::size_t window,
                                             Encode&& encode) {
  std::vector<DistanceMatrix> out;
  const auto n = normalized.cols();
  const auto w = static_cast<Eigen::Index>(window);
  for (std::size_t t = begin + window - 1; t < end; ++t) {
    Matrix cols(w, n);
    for (Eigen::Index s = 0; s < n; ++s) {
      cols.col(s) = normalized.col(s).segment(static_cast<Eigen::Index>(t + 1 - window), w);
    }
    out.push_back(distance_matrix(encode(cols)));
  }
  return out;
}

}  // namespace

std::string_view to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::Pca: return "pca";
    case DetectorKind::Ae: return "ae";
    case DetectorKind::Hybrid: return "hybrid";
  }
  return "unknown";
}

DetectorKind parse_detector_kind(std::string_view text) {
  if (text == "pca") return DetectorKind::Pca;
  if (text == "ae") return DetectorKind::Ae;
  if (text == "hybrid") return DetectorKind::Hybrid;
  throw Error(ErrorKind::InvalidConfig, "detector must be pca, ae or hybrid, got '" +
                                            std::string(text) + "'");
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Undetermined: return "undetermined";
    case Stage::PcaClear: return "pca_clear";
    case Stage::PcaFlagged: return "pca_flagged";
    case Stage::AeConfirmed: return "ae_confirmed";
    case Stage::AeCleared: return "ae_cleared";
  }
  return "unknown";
}

Matrix pooled_windows(const ReadingMatrix& normalized, std::size_t begin, std::size_t end,
                      std::size_t window, std::size_t stride) {
  if (end > static_cast<std::size_t>(normalized.rows()) || begin > end || end - begin < window) {
    throw Error(ErrorKind::EmptyCalibration, "training segment shorter than one window");
  }
  stride = std::max<std::size_t>(stride, 1);
  const std::size_t per_sensor = (end - begin - window) / stride + 1;
  const auto n = static_cast<std::size_t>(normalized.cols());
  const auto w = static_cast<Eigen::Index>(window);
  Matrix out(static_cast<Eigen::Index>(per_sensor * n), w);
  Eigen::Index row = 0;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t k = 0; k < per_sensor; ++k) {
      const auto start = static_cast<Eigen::Index>(begin + k * stride);
      out.row(row++) = normalized.col(static_cast<Eigen::Index>(s)).segment(start, w).transpose();
    }
  }
  return out;
}

void calibrate_detectors(DetectorBundle& bundle, const ReadingMatrix& readings, std::size_t begin,
                         std::size_t end, double c, double q, bool normalize) {
  if (end > static_cast<std::size_t>(readings.rows()) || begin >= end ||
      end - begin < bundle.window) {
    throw Error(ErrorKind::EmptyCalibration, "calibration segment shorter than one window");
  }
  bundle.norm = normalize ? NormStats::fit(readings, begin, end)
                          : NormStats::identity(static_cast<std::size_t>(readings.cols()));
  const ReadingMatrix normalized = bundle.norm.normalize(readings);
  if (bundle.has_pca) {
    const auto mats = segment_matrices(normalized, begin, end, bundle.window, [&](const Matrix& x) {
      return project_columns(bundle.pca, x);
    });
    bundle.pca_thresholds = calibrate(mats, c, {}, q);
  }
  if (bundle.has_ae) {
    std::vector<double> losses;
    const auto mats = segment_matrices(normalized, begin, end, bundle.window, [&](const Matrix& x) {
      AeBatchOutput out = forward_batch(bundle.ae, x);
      losses.insert(losses.end(), out.loss.data(), out.loss.data() + out.loss.size());
      return out.latent;
    });
    bundle.ae_thresholds = calibrate(mats, c, losses, q);
  }
}

DetectorBundle train_detectors(const ReadingMatrix& readings, std::size_t begin, std::size_t end,
                               const DetectorConfig& cfg) {
  if (readings.cols() < 2) throw Error(ErrorKind::DimMismatch, "need at least two sensors");
  DetectorBundle bundle;
  bundle.window = cfg.window;
  bundle.rule = cfg.rule;
  bundle.norm = cfg.normalize ? NormStats::fit(readings, begin, end)
                              : NormStats::identity(static_cast<std::size_t>(readings.cols()));
  const ReadingMatrix normalized = bundle.norm.normalize(readings);
  if (cfg.fit_pca) {
    bundle.pca = fit_pca(pooled_windows(normalized, begin, end, cfg.window), cfg.pca_k);
    bundle.has_pca = true;
  }
  if (cfg.fit_ae) {
    AeConfig ae_cfg = cfg.ae;
    ae_cfg.input_len = cfg.window;
    const Matrix train_windows =
        pooled_windows(normalized, begin, end, cfg.window, cfg.ae_train_stride);
    bundle.ae = train(init_autoencoder(ae_cfg), train_windows).model;
    bundle.has_ae = true;
  }
  calibrate_detectors(bundle, readings, begin, end, cfg.c, cfg.q, cfg.normalize);
  return bundle;
}

TimingStats TimingStats::from(std::span<const std::int64_t> samples) {
  TimingStats s;
  s.count = samples.size();
  if (samples.empty()) return s;
  std::vector<double> v(samples.begin(), samples.end());
  s.mean_ns = mean_of(v);
  s.median_ns = quantile_of(v, 0.5);
  s.p95_ns = quantile_of(v, 0.95);
  return s;
}

StreamDetector::StreamDetector(const DetectorBundle& bundle, DetectorKind kind, bool record_timing)
    : bundle_(&bundle), kind_(kind), record_timing_(record_timing) {
  const bool needs_pca = kind != DetectorKind::Ae;
  const bool needs_ae = kind != DetectorKind::Pca;
  if ((needs_pca && !bundle.has_pca) || (needs_ae && !bundle.has_ae)) {
    throw Error(ErrorKind::InvalidConfig, "detector '" + std::string(to_string(kind)) +
                                              "' needs a model the bundle does not contain");
  }
  if (needs_pca && bundle.pca.input_dim() != bundle.window) {
    throw Error(ErrorKind::DimMismatch, "PCA input dimension differs from the window length");
  }
  if (needs_ae && bundle.ae.config().input_len != bundle.window) {
    throw Error(ErrorKind::DimMismatch, "autoencoder input length differs from the window length");
  }
  windows_.assign(bundle.sensors(), SensorWindow(bundle.window));
  snapshot_.resize(static_cast<Eigen::Index>(bundle.window),
                   static_cast<Eigen::Index>(bundle.sensors()));
}

Flags StreamDetector::run_pca(const Matrix& windows, DistanceMatrix& distances) const {
  distances = distance_matrix(project_columns(bundle_->pca, windows));
  return classify(distances, bundle_->pca_thresholds, bundle_->rule);
}

StreamDetector::AeResult StreamDetector::run_ae(const Matrix& windows) const {
  const AeBatchOutput out = forward_batch(bundle_->ae, windows);
  AeResult r;
  r.distances = distance_matrix(out.latent);
  const Flags by_distance = classify(r.distances, bundle_->ae_thresholds, bundle_->rule);
  Flags by_loss(by_distance.size());
  for (std::size_t i = 0; i < by_loss.size(); ++i) {
    by_loss[i] = loss_flag(out.loss(static_cast<Eigen::Index>(i)), bundle_->ae_thresholds);
  }
  r.flags = ae_verdict(by_distance, by_loss);
  return r;
}

AnomalyVerdict StreamDetector::step(std::span<const double> readings) {
  const std::size_t n = windows_.size();
  if (readings.size() != n) {
    throw Error(ErrorKind::DimMismatch, "step received " + std::to_string(readings.size()) +
                                            " readings for " + std::to_string(n) + " sensors");
  }
  AnomalyVerdict verdict;
  verdict.t = steps_total_++;
  bool ready = true;
  for (std::size_t s = 0; s < n; ++s) {
    windows_[s].push(bundle_->norm.normalize(readings[s], s));
    ready = ready && windows_[s].full();
  }
  if (!ready) {
    verdict.flags.assign(n, kUndetermined);
    return verdict;
  }
  ++steps_evaluated_;
  for (std::size_t s = 0; s < n; ++s) {
    windows_[s].snapshot_into(
        std::span<double>(snapshot_.col(static_cast<Eigen::Index>(s)).data(), bundle_->window));
  }

  const auto start = Clock::now();
  DistanceMatrix distances;
  switch (kind_) {
    case DetectorKind::Pca: {
      verdict.flags = run_pca(snapshot_, distances);
      verdict.pca_flags = verdict.flags;
      const bool flagged = any_set(verdict.flags);
      pca_flagged_steps_ += flagged ? 1 : 0;
      verdict.stage = flagged ? Stage::PcaFlagged : Stage::PcaClear;
      break;
    }
    case DetectorKind::Ae: {
      AeResult ae = run_ae(snapshot_);
      ++ae_invocations_;
      verdict.flags = std::move(ae.flags);
      distances = std::move(ae.distances);
      verdict.stage = any_set(verdict.flags) ? Stage::AeConfirmed : Stage::AeCleared;
      break;
    }
    case DetectorKind::Hybrid: {
      verdict.pca_flags = run_pca(snapshot_, distances);
      if (!any_set(verdict.pca_flags)) {
        verdict.flags.assign(n, 0);
        verdict.stage = Stage::PcaClear;
        break;
      }
      ++pca_flagged_steps_;
      AeResult ae = run_ae(snapshot_);
      ++ae_invocations_;
      verdict.flags = std::move(ae.flags);
      distances = std::move(ae.distances);
      verdict.stage = any_set(verdict.flags) ? Stage::AeConfirmed : Stage::AeCleared;
      break;
    }
  }
  const auto stop = Clock::now();
  if (record_timing_) {
    verdict.step_time_ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count();
    step_times_.push_back(verdict.step_time_ns);
  }
  verdict.distances = distances.upper_triangle();
  return verdict;
}

StreamResult run_stream(DetectorKind kind, const ReadingMatrix& readings,
                        const DetectorBundle& bundle, bool record_timing) {
  if (static_cast<std::size_t>(readings.rows()) <= bundle.window) {
    throw Error(ErrorKind::InvalidConfig, "stream must be longer than the window");
  }
  if (static_cast<std::size_t>(readings.cols()) != bundle.sensors()) {
    throw Error(ErrorKind::DimMismatch, "stream has " + std::to_string(readings.cols()) +
                                            " sensors, models expect " +
                                            std::to_string(bundle.sensors()));
  }
  StreamDetector detector(bundle, kind, record_timing);
  StreamResult result;
  result.verdicts.reserve(static_cast<std::size_t>(readings.rows()));
  std::vector<double> row(static_cast<std::size_t>(readings.cols()));
  for (Eigen::Index t = 0; t < readings.rows(); ++t) {
    for (Eigen::Index s = 0; s < readings.cols(); ++s) row[static_cast<std::size_t>(s)] = readings(t, s);
    result.verdicts.push_back(detector.step(row));
  }
  result.timing = TimingStats::from(detector.step_times_ns());
  result.steps_evaluated = detector.steps_evaluated();
  result.pca_flagged_steps = detector.pca_flagged_steps();
  result.ae_invocations = detector.ae_invocations();
  return result;
}

const std::vector<Flags>& BulkFlags::track(DetectorKind kind) const {
  switch (kind) {
    case DetectorKind::Pca: return pca;
    case DetectorKind::Ae: return ae;
    case DetectorKind::Hybrid: return hybrid;
  }
  return pca;
}

BulkFlags bulk_flags(const ReadingMatrix& readings, const DetectorBundle& bundle) {
  const auto rows = static_cast<std::size_t>(readings.rows());
  const std::size_t w = bundle.window;
  if (rows < w) throw Error(ErrorKind::InvalidConfig, "stream shorter than one window");
  if (static_cast<std::size_t>(readings.cols()) != bundle.sensors()) {
    throw Error(ErrorKind::DimMismatch, "stream and models disagree on sensor count");
  }
  const ReadingMatrix normalized = bundle.norm.normalize(readings);
  const auto n = normalized.cols();
  const std::size_t steps = rows - w + 1;
  const auto wi = static_cast<Eigen::Index>(w);

  BulkFlags out;
  out.first_step = w - 1;
  // Chunks of whole steps: each step's n windows stay adjacent columns.
  constexpr std::size_t kStepsPerChunk = 64;
  for (std::size_t base = 0; base < steps; base += kStepsPerChunk) {
    const std::size_t count = std::min(kStepsPerChunk, steps - base);
    Matrix cols(wi, static_cast<Eigen::Index>(count) * n);
    for (std::size_t k = 0; k < count; ++k) {
      for (Eigen::Index s = 0; s < n; ++s) {
        cols.col(static_cast<Eigen::Index>(k) * n + s) =
            normalized.col(s).segment(static_cast<Eigen::Index>(base + k), wi);
      }
    }
    Matrix pca_latent;
    AeBatchOutput ae_out;
    if (bundle.has_pca) pca_latent = project_columns(bundle.pca, cols);
    if (bundle.has_ae) ae_out = forward_batch(bundle.ae, cols);
    for (std::size_t k = 0; k < count; ++k) {
      const auto first = static_cast<Eigen::Index>(k) * n;
      if (bundle.has_pca) {
        out.pca.push_back(classify(distance_matrix(Matrix(pca_latent.middleCols(first, n))),
                                   bundle.pca_thresholds, bundle.rule));
      }
      if (bundle.has_ae) {
        const Flags by_distance = classify(
            distance_matrix(Matrix(ae_out.latent.middleCols(first, n))), bundle.ae_thresholds,
            bundle.rule);
        Flags by_loss(static_cast<std::size_t>(n));
        for (Eigen::Index s = 0; s < n; ++s) {
          by_loss[static_cast<std::size_t>(s)] = loss_flag(ae_out.loss(first + s), bundle.ae_thresholds);
        }
        out.ae.push_back(ae_verdict(by_distance, by_loss));
      }
    }
  }
  if (bundle.has_pca && bundle.has_ae) {
    out.hybrid.reserve(out.pca.size());
    for (std::size_t i = 0; i < out.pca.size(); ++i) {
      out.hybrid.push_back(any_set(out.pca[i]) ? out.ae[i] : Flags(static_cast<std::size_t>(n), 0));
    }
  }
  return out;
}

}  // namespace corrdet
