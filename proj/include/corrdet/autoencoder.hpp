#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "corrdet/stream.hpp"

namespace corrdet {

struct AeConfig {
  std::size_t input_len = kDefaultWindow;
  std::size_t hidden = 32;
  std::size_t latent = 4;
  std::size_t epochs = 50;
  std::size_t batch = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;

  /// Throws Error(InvalidConfig) naming the offending field.
  void validate() const;
};

/// Summary of per-window reconstruction loss on the training set.
struct LossStats {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
  double q95 = 0.0;
  double q99 = 0.0;
  double q999 = 0.0;

  static LossStats from(std::span<const double> losses);
};

/// Offsets of every parameter block inside the flat parameter vector.
///
/// Gate blocks are stacked [input, forget, cell, output], each `hidden` rows.
struct AeLayout {
  std::size_t hidden = 0;
  std::size_t latent = 0;

  std::size_t enc_wx = 0;    // 4H x 1
  std::size_t enc_wh = 0;    // 4H x H
  std::size_t enc_b = 0;     // 4H
  std::size_t latent_w = 0;  // L x H
  std::size_t latent_b = 0;  // L
  std::size_t state_w = 0;   // 2H x L, rows [h0; c0]
  std::size_t state_b = 0;   // 2H
  std::size_t dec_wh = 0;    // 4H x H
  std::size_t dec_b = 0;     // 4H
  std::size_t out_w = 0;     // 1 x H
  std::size_t out_b = 0;     // 1
  std::size_t size = 0;

  static AeLayout make(std::size_t hidden, std::size_t latent);
};

/// LSTM encoder-decoder over one sensor's scalar window.
///
/// The encoder reads the window one value per step; its final hidden state
/// maps linearly to the latent code. The latent maps linearly to the
/// decoder's initial (h, c); the decoder then runs W steps on zero input and
/// a linear head emits one reconstructed value per step.
class AeModel {
 public:
  using MatMap = Eigen::Map<Matrix>;
  using ConstMatMap = Eigen::Map<const Matrix>;
  using VecMap = Eigen::Map<Vector>;
  using ConstVecMap = Eigen::Map<const Vector>;

  AeModel() = default;
  explicit AeModel(const AeConfig& config);

  const AeConfig& config() const noexcept { return config_; }
  const AeLayout& layout() const noexcept { return layout_; }

  Vector& parameters() noexcept { return params_; }
  const Vector& parameters() const noexcept { return params_; }

  const LossStats& loss_stats() const noexcept { return loss_stats_; }
  bool has_loss_stats() const noexcept { return has_loss_stats_; }
  void set_loss_stats(const LossStats& stats) {
    loss_stats_ = stats;
    has_loss_stats_ = true;
  }

  ConstMatMap enc_wx() const { return block(layout_.enc_wx, 4 * h(), 1); }
  ConstMatMap enc_wh() const { return block(layout_.enc_wh, 4 * h(), h()); }
  ConstVecMap enc_b() const { return vec(layout_.enc_b, 4 * h()); }
  ConstMatMap latent_w() const { return block(layout_.latent_w, l(), h()); }
  ConstVecMap latent_b() const { return vec(layout_.latent_b, l()); }
  ConstMatMap state_w() const { return block(layout_.state_w, 2 * h(), l()); }
  ConstVecMap state_b() const { return vec(layout_.state_b, 2 * h()); }
  ConstMatMap dec_wh() const { return block(layout_.dec_wh, 4 * h(), h()); }
  ConstVecMap dec_b() const { return vec(layout_.dec_b, 4 * h()); }
  ConstMatMap out_w() const { return block(layout_.out_w, 1, h()); }
  double out_b() const { return params_(static_cast<Eigen::Index>(layout_.out_b)); }

  bool operator==(const AeModel& other) const;

 private:
  Eigen::Index h() const { return static_cast<Eigen::Index>(layout_.hidden); }
  Eigen::Index l() const { return static_cast<Eigen::Index>(layout_.latent); }
  ConstMatMap block(std::size_t offset, Eigen::Index rows, Eigen::Index cols) const {
    return ConstMatMap(params_.data() + offset, rows, cols);
  }
  ConstVecMap vec(std::size_t offset, Eigen::Index n) const {
    return ConstVecMap(params_.data() + offset, n);
  }

  AeConfig config_;
  AeLayout layout_;
  Vector params_;
  LossStats loss_stats_;
  bool has_loss_stats_ = false;
};

struct AeOutput {
  Vector latent;
  Vector recon;
  double loss = 0.0;
};

/// Outputs for a batch of windows stored as columns.
struct AeBatchOutput {
  Matrix latent;  // L x B
  Matrix recon;   // W x B
  Vector loss;    // B, per-window mean squared error
};

/// Seeded uniform(-1/sqrt(H), 1/sqrt(H)) parameters with forget-gate biases at 1.
AeModel init_autoencoder(const AeConfig& config);

AeOutput forward(const AeModel& model, const Vector& x);
/// Runs every column of `windows` (W x B) through the model.
AeBatchOutput forward_batch(const AeModel& model, const Matrix& windows);
Vector encode(const AeModel& model, const Vector& x);

/// Mean over columns of the per-window loss, plus its gradient w.r.t. every parameter.
double loss_and_gradient(const AeModel& model, const Matrix& windows, Vector& gradient);

struct TrainResult {
  AeModel model;
  std::vector<double> loss_history;  // mean batch loss per epoch
};

/// Mini-batch Adam (beta1 0.9, beta2 0.999, eps 1e-8) over the rows of `windows`
/// (m x W). Batch order comes from the config seed. Recomputes loss statistics
/// on the training windows. Throws Error(Diverged) on a non-finite final loss.
TrainResult train(AeModel model, const Matrix& windows);

/// Per-window reconstruction loss of every row of `windows` (m x W).
std::vector<double> window_losses(const AeModel& model, const Matrix& windows);

/// Central finite-difference gradient of `loss` around `params` (step h).
Vector numeric_gradient(const std::function<double(const Vector&)>& loss, const Vector& params,
                        double h);

/// max_i |a_i - f_i| / max(1e-8, |a_i| + |f_i|).
double max_relative_error(const Vector& analytic, const Vector& numeric);

/// Compares the BPTT gradient for window `x` against central differences (h = 1e-5).
double gradient_check(const AeModel& model, const Vector& x);

}  // namespace corrdet
