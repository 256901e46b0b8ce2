#include "corrdet/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "corrdet/error.hpp"
#include "corrdet/rng.hpp"
#include "corrdet/stats.hpp"

namespace corrdet {

namespace {

using Index = Eigen::Index;
using ArrayXX = Eigen::ArrayXXd;

Matrix sigmoid(const Matrix& a) {
  return (1.0 / (1.0 + (-a.array()).exp())).matrix();
}

// Activations of one LSTM layer over a sequence, kept for the backward pass.
struct LayerTape {
  std::vector<Matrix> gates;  // 4H x B after activation: [i; f; g; o]
  std::vector<Matrix> cell;   // H x B, c_t
  std::vector<Matrix> cell_tanh;
  std::vector<Matrix> hidden;  // H x B, h_t

  void reset(std::size_t steps) {
    gates.resize(steps);
    cell.resize(steps);
    cell_tanh.resize(steps);
    hidden.resize(steps);
  }
};

struct Tape {
  LayerTape encoder;
  LayerTape decoder;
  Matrix latent;      // L x B
  Matrix dec_h0;      // H x B
  Matrix dec_c0;      // H x B
  Matrix recon;       // W x B
};

// One LSTM step: pre-activations in `pre` (4H x B) are turned into gates in place.
void lstm_cell(Matrix& pre, const Matrix& c_prev, Index hid, Matrix& c, Matrix& c_tanh,
               Matrix& h) {
  pre.topRows(2 * hid) = sigmoid(pre.topRows(2 * hid));
  pre.middleRows(2 * hid, hid) = pre.middleRows(2 * hid, hid).array().tanh().matrix();
  pre.bottomRows(hid) = sigmoid(pre.bottomRows(hid));
  const auto i = pre.topRows(hid).array();
  const auto f = pre.middleRows(hid, hid).array();
  const auto g = pre.middleRows(2 * hid, hid).array();
  const auto o = pre.bottomRows(hid).array();
  c = (f * c_prev.array() + i * g).matrix();
  c_tanh = c.array().tanh().matrix();
  h = (o * c_tanh.array()).matrix();
}

void run_forward(const AeModel& model, const Matrix& x, Tape& tape) {
  const auto& lay = model.layout();
  const auto hid = static_cast<Index>(lay.hidden);
  const Index steps = x.rows();
  const Index batch = x.cols();
  tape.encoder.reset(static_cast<std::size_t>(steps));
  tape.decoder.reset(static_cast<std::size_t>(steps));

  const auto wx = model.enc_wx();
  const auto wh = model.enc_wh();
  const auto eb = model.enc_b();
  Matrix h_prev = Matrix::Zero(hid, batch);
  Matrix c_prev = Matrix::Zero(hid, batch);
  for (Index t = 0; t < steps; ++t) {
    const auto st = static_cast<std::size_t>(t);
    Matrix& pre = tape.encoder.gates[st];
    pre.noalias() = wh * h_prev;
    pre.noalias() += wx * x.row(t);
    pre.colwise() += eb;
    lstm_cell(pre, c_prev, hid, tape.encoder.cell[st], tape.encoder.cell_tanh[st],
              tape.encoder.hidden[st]);
    h_prev = tape.encoder.hidden[st];
    c_prev = tape.encoder.cell[st];
  }

  tape.latent.noalias() = model.latent_w() * h_prev;
  tape.latent.colwise() += model.latent_b();
  Matrix state = model.state_w() * tape.latent;
  state.colwise() += model.state_b();
  tape.dec_h0 = state.topRows(hid);
  tape.dec_c0 = state.bottomRows(hid);

  const auto dwh = model.dec_wh();
  const auto db = model.dec_b();
  const auto ow = model.out_w();
  tape.recon.resize(steps, batch);
  h_prev = tape.dec_h0;
  c_prev = tape.dec_c0;
  for (Index t = 0; t < steps; ++t) {
    const auto st = static_cast<std::size_t>(t);
    Matrix& pre = tape.decoder.gates[st];
    pre.noalias() = dwh * h_prev;
    pre.colwise() += db;
    lstm_cell(pre, c_prev, hid, tape.decoder.cell[st], tape.decoder.cell_tanh[st],
              tape.decoder.hidden[st]);
    h_prev = tape.decoder.hidden[st];
    c_prev = tape.decoder.cell[st];
    tape.recon.row(t).noalias() = ow * h_prev;
  }
  tape.recon.array() += model.out_b();
}

// Backward through one LSTM step. `dh`/`dc` carry the gradient w.r.t. h_t / c_t in,
// and w.r.t. the gate pre-activations out (returned), leaving dc_prev in `dc`.
Matrix cell_backward(const Matrix& gates, const Matrix& c_prev, const Matrix& c_tanh,
                     Index hid, const Matrix& dh, Matrix& dc) {
  const auto i = gates.topRows(hid).array();
  const auto f = gates.middleRows(hid, hid).array();
  const auto g = gates.middleRows(2 * hid, hid).array();
  const auto o = gates.bottomRows(hid).array();
  const auto tc = c_tanh.array();

  Matrix pre_grad(4 * hid, dh.cols());
  const ArrayXX dct = dc.array() + dh.array() * o * (1.0 - tc.square());
  pre_grad.topRows(hid) = (dct * g * i * (1.0 - i)).matrix();
  pre_grad.middleRows(hid, hid) = (dct * c_prev.array() * f * (1.0 - f)).matrix();
  pre_grad.middleRows(2 * hid, hid) = (dct * i * (1.0 - g.square())).matrix();
  pre_grad.bottomRows(hid) = (dh.array() * tc * o * (1.0 - o)).matrix();
  dc = (dct * f).matrix();
  return pre_grad;
}

double backward(const AeModel& model, const Matrix& x, const Tape& tape, Vector& grad) {
  const auto& lay = model.layout();
  const auto hid = static_cast<Index>(lay.hidden);
  const auto lat = static_cast<Index>(lay.latent);
  const Index steps = x.rows();
  const Index batch = x.cols();
  grad.setZero(static_cast<Index>(lay.size));

  auto gmat = [&](std::size_t off, Index r, Index c) {
    return Eigen::Map<Matrix>(grad.data() + off, r, c);
  };
  auto g_enc_wx = gmat(lay.enc_wx, 4 * hid, 1);
  auto g_enc_wh = gmat(lay.enc_wh, 4 * hid, hid);
  auto g_enc_b = gmat(lay.enc_b, 4 * hid, 1);
  auto g_lat_w = gmat(lay.latent_w, lat, hid);
  auto g_lat_b = gmat(lay.latent_b, lat, 1);
  auto g_st_w = gmat(lay.state_w, 2 * hid, lat);
  auto g_st_b = gmat(lay.state_b, 2 * hid, 1);
  auto g_dec_wh = gmat(lay.dec_wh, 4 * hid, hid);
  auto g_dec_b = gmat(lay.dec_b, 4 * hid, 1);
  auto g_out_w = gmat(lay.out_w, 1, hid);

  const Matrix diff = tape.recon - x;
  const double scale = 1.0 / static_cast<double>(steps * batch);
  const double loss = diff.squaredNorm() * scale;
  const Matrix dy = diff * (2.0 * scale);  // W x B

  const auto ow = model.out_w();
  const auto dwh = model.dec_wh();
  Matrix dh_next = Matrix::Zero(hid, batch);
  Matrix dc = Matrix::Zero(hid, batch);
  grad(static_cast<Index>(lay.out_b)) = dy.sum();
  for (Index t = steps - 1; t >= 0; --t) {
    const auto st = static_cast<std::size_t>(t);
    const Matrix& h_t = tape.decoder.hidden[st];
    g_out_w.noalias() += dy.row(t) * h_t.transpose();
    Matrix dh = dh_next;
    dh.noalias() += ow.transpose() * dy.row(t);
    const Matrix& c_prev = t > 0 ? tape.decoder.cell[st - 1] : tape.dec_c0;
    const Matrix& h_prev = t > 0 ? tape.decoder.hidden[st - 1] : tape.dec_h0;
    const Matrix pre_grad =
        cell_backward(tape.decoder.gates[st], c_prev, tape.decoder.cell_tanh[st], hid, dh, dc);
    g_dec_wh.noalias() += pre_grad * h_prev.transpose();
    g_dec_b += pre_grad.rowwise().sum();
    dh_next.noalias() = dwh.transpose() * pre_grad;
  }

  Matrix d_state(2 * hid, batch);
  d_state.topRows(hid) = dh_next;
  d_state.bottomRows(hid) = dc;
  g_st_w.noalias() += d_state * tape.latent.transpose();
  g_st_b += d_state.rowwise().sum();
  const Matrix d_latent = model.state_w().transpose() * d_state;

  const Matrix& h_last = tape.encoder.hidden[static_cast<std::size_t>(steps - 1)];
  g_lat_w.noalias() += d_latent * h_last.transpose();
  g_lat_b += d_latent.rowwise().sum();
  dh_next = model.latent_w().transpose() * d_latent;
  dc.setZero(hid, batch);

  const auto ewh = model.enc_wh();
  const Matrix zeros = Matrix::Zero(hid, batch);
  for (Index t = steps - 1; t >= 0; --t) {
    const auto st = static_cast<std::size_t>(t);
    const Matrix& c_prev = t > 0 ? tape.encoder.cell[st - 1] : zeros;
    const Matrix& h_prev = t > 0 ? tape.encoder.hidden[st - 1] : zeros;
    const Matrix pre_grad = cell_backward(tape.encoder.gates[st], c_prev,
                                          tape.encoder.cell_tanh[st], hid, dh_next, dc);
    g_enc_wh.noalias() += pre_grad * h_prev.transpose();
    g_enc_wx.noalias() += pre_grad * x.row(t).transpose();
    g_enc_b += pre_grad.rowwise().sum();
    dh_next.noalias() = ewh.transpose() * pre_grad;
  }
  return loss;
}

void require_window_length(const AeModel& model, Index rows) {
  if (static_cast<std::size_t>(rows) != model.config().input_len) {
    throw Error(ErrorKind::DimMismatch, "window length " + std::to_string(rows) +
                                            " != autoencoder input_len " +
                                            std::to_string(model.config().input_len));
  }
}


// Scalar forward pass in long double; used only as the finite-difference side
// of gradient_check.
long double extended_loss(const AeLayout& lay, const std::vector<long double>& p,
                          const std::vector<long double>& x) {
  const std::size_t hid = lay.hidden;
  const std::size_t lat = lay.latent;
  auto sig = [](long double v) { return 1.0L / (1.0L + std::exp(-v)); };
  // Column-major storage of the weight blocks: entry (r, k) of a rows x cols block sits at r + k*rows.
  auto at = [&](std::size_t off, std::size_t rows, std::size_t r, std::size_t k) {
    return p[off + r + k * rows];
  };
  std::vector<long double> h(hid, 0.0L), c(hid, 0.0L);
  auto cell = [&](std::size_t wx, bool has_x, long double xin, std::size_t wh, std::size_t b) {
    std::vector<long double> pre(4 * hid);
    for (std::size_t r = 0; r < 4 * hid; ++r) {
      long double acc = p[b + r];
      if (has_x) acc += p[wx + r] * xin;
      for (std::size_t k = 0; k < hid; ++k) acc += at(wh, 4 * hid, r, k) * h[k];
      pre[r] = acc;
    }
    for (std::size_t j = 0; j < hid; ++j) {
      const long double ig = sig(pre[j]);
      const long double fg = sig(pre[hid + j]);
      const long double gg = std::tanh(pre[2 * hid + j]);
      const long double og = sig(pre[3 * hid + j]);
      c[j] = fg * c[j] + ig * gg;
      h[j] = og * std::tanh(c[j]);
    }
  };
  for (const long double v : x) cell(lay.enc_wx, true, v, lay.enc_wh, lay.enc_b);
  std::vector<long double> z(lat);
  for (std::size_t r = 0; r < lat; ++r) {
    long double acc = p[lay.latent_b + r];
    for (std::size_t k = 0; k < hid; ++k) acc += at(lay.latent_w, lat, r, k) * h[k];
    z[r] = acc;
  }
  for (std::size_t r = 0; r < 2 * hid; ++r) {
    long double acc = p[lay.state_b + r];
    for (std::size_t k = 0; k < lat; ++k) acc += at(lay.state_w, 2 * hid, r, k) * z[k];
    (r < hid ? h[r] : c[r - hid]) = acc;
  }
  long double loss = 0.0L;
  for (const long double v : x) {
    cell(0, false, 0.0L, lay.dec_wh, lay.dec_b);
    long double y = p[lay.out_b];
    for (std::size_t k = 0; k < hid; ++k) y += p[lay.out_w + k] * h[k];
    loss += (y - v) * (y - v);
  }
  return loss / static_cast<long double>(x.size());
}

}  // namespace

void AeConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw Error(ErrorKind::InvalidConfig, std::string(name) + " must be positive");
  };
  positive(input_len, "input_len");
  positive(hidden, "hidden");
  positive(latent, "latent");
  positive(epochs, "epochs");
  positive(batch, "batch");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorKind::InvalidConfig, "learning_rate must be positive");
  }
  if (latent > hidden) {
    throw Error(ErrorKind::InvalidConfig, "latent (" + std::to_string(latent) +
                                              ") must not exceed hidden (" +
                                              std::to_string(hidden) + ")");
  }
}

LossStats LossStats::from(std::span<const double> losses) {
  if (losses.empty()) throw Error(ErrorKind::EmptyCalibration, "no training losses");
  std::vector<double> v(losses.begin(), losses.end());
  LossStats s;
  s.mean = mean_of(losses);
  s.std = stddev_of(losses);
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  s.q50 = quantile_of(v, 0.5);
  s.q90 = quantile_of(v, 0.9);
  s.q95 = quantile_of(v, 0.95);
  s.q99 = quantile_of(v, 0.99);
  s.q999 = quantile_of(v, 0.999);
  return s;
}

AeLayout AeLayout::make(std::size_t hidden, std::size_t latent) {
  AeLayout lay;
  lay.hidden = hidden;
  lay.latent = latent;
  std::size_t off = 0;
  auto take = [&off](std::size_t n) {
    const std::size_t at = off;
    off += n;
    return at;
  };
  lay.enc_wx = take(4 * hidden);
  lay.enc_wh = take(4 * hidden * hidden);
  lay.enc_b = take(4 * hidden);
  lay.latent_w = take(latent * hidden);
  lay.latent_b = take(latent);
  lay.state_w = take(2 * hidden * latent);
  lay.state_b = take(2 * hidden);
  lay.dec_wh = take(4 * hidden * hidden);
  lay.dec_b = take(4 * hidden);
  lay.out_w = take(hidden);
  lay.out_b = take(1);
  lay.size = off;
  return lay;
}

AeModel::AeModel(const AeConfig& config)
    : config_(config),
      layout_(AeLayout::make(config.hidden, config.latent)),
      params_(Vector::Zero(static_cast<Index>(layout_.size))) {
  config_.validate();
}

bool AeModel::operator==(const AeModel& other) const {
  return config_.input_len == other.config_.input_len && config_.hidden == other.config_.hidden &&
         config_.latent == other.config_.latent && params_.size() == other.params_.size() &&
         params_ == other.params_;
}

AeModel init_autoencoder(const AeConfig& config) {
  config.validate();
  AeModel model(config);
  Pcg32 rng(derive_seed(config.seed, 0));
  const double r = 1.0 / std::sqrt(static_cast<double>(config.hidden));
  Vector& p = model.parameters();
  for (Index i = 0; i < p.size(); ++i) p(i) = (2.0 * rng.uniform() - 1.0) * r;
  const auto& lay = model.layout();
  for (std::size_t j = 0; j < config.hidden; ++j) {
    p(static_cast<Index>(lay.enc_b + config.hidden + j)) = 1.0;
    p(static_cast<Index>(lay.dec_b + config.hidden + j)) = 1.0;
  }
  return model;
}

AeBatchOutput forward_batch(const AeModel& model, const Matrix& windows) {
  require_window_length(model, windows.rows());
  Tape tape;
  run_forward(model, windows, tape);
  AeBatchOutput out;
  out.latent = std::move(tape.latent);
  out.loss = (tape.recon - windows).colwise().squaredNorm().transpose() /
             static_cast<double>(windows.rows());
  out.recon = std::move(tape.recon);
  return out;
}

AeOutput forward(const AeModel& model, const Vector& x) {
  AeBatchOutput b = forward_batch(model, Matrix(x));
  return AeOutput{b.latent.col(0), b.recon.col(0), b.loss(0)};
}

Vector encode(const AeModel& model, const Vector& x) { return forward(model, x).latent; }

double loss_and_gradient(const AeModel& model, const Matrix& windows, Vector& gradient) {
  require_window_length(model, windows.rows());
  Tape tape;
  run_forward(model, windows, tape);
  return backward(model, windows, tape, gradient);
}

std::vector<double> window_losses(const AeModel& model, const Matrix& windows) {
  std::vector<double> losses;
  losses.reserve(static_cast<std::size_t>(windows.rows()));
  constexpr Index kChunk = 256;
  for (Index start = 0; start < windows.rows(); start += kChunk) {
    const Index n = std::min(kChunk, windows.rows() - start);
    const Matrix cols = windows.middleRows(start, n).transpose();
    const AeBatchOutput out = forward_batch(model, cols);
    for (Index j = 0; j < n; ++j) losses.push_back(out.loss(j));
  }
  return losses;
}

TrainResult train(AeModel model, const Matrix& windows) {
  const AeConfig& cfg = model.config();
  const auto m = static_cast<std::size_t>(windows.rows());
  if (m < cfg.batch) {
    throw Error(ErrorKind::InvalidConfig, "training set of " + std::to_string(m) +
                                              " windows is smaller than batch " +
                                              std::to_string(cfg.batch));
  }
  require_window_length(model, windows.cols());

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  Vector& theta = model.parameters();
  Vector moment1 = Vector::Zero(theta.size());
  Vector moment2 = Vector::Zero(theta.size());
  Vector grad;
  std::size_t step = 0;

  Pcg32 order_rng(derive_seed(cfg.seed, 1));
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Matrix batch_cols(static_cast<Index>(cfg.input_len), static_cast<Index>(cfg.batch));

  TrainResult result;
  result.loss_history.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = m - 1; i > 0; --i) {
      std::swap(order[i], order[order_rng.below(static_cast<std::uint32_t>(i + 1))]);
    }
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < m; start += cfg.batch) {
      const std::size_t n = std::min(cfg.batch, m - start);
      batch_cols.resize(static_cast<Index>(cfg.input_len), static_cast<Index>(n));
      for (std::size_t j = 0; j < n; ++j) {
        batch_cols.col(static_cast<Index>(j)) =
            windows.row(static_cast<Index>(order[start + j])).transpose();
      }
      epoch_loss += loss_and_gradient(model, batch_cols, grad);
      ++batches;

      ++step;
      moment1 = kBeta1 * moment1 + (1.0 - kBeta1) * grad;
      moment2 = kBeta2 * moment2 + (1.0 - kBeta2) * grad.cwiseProduct(grad);
      const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      theta.array() -= cfg.learning_rate * (moment1.array() / bc1) /
                       ((moment2.array() / bc2).sqrt() + kEps);
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(batches));
  }

  if (!std::isfinite(result.loss_history.back()) || !theta.allFinite()) {
    throw Error(ErrorKind::Diverged, "training loss is not finite");
  }
  const std::vector<double> losses = window_losses(model, windows);
  model.set_loss_stats(LossStats::from(losses));
  result.model = std::move(model);
  return result;
}

Vector numeric_gradient(const std::function<double(const Vector&)>& loss, const Vector& params,
                        double h) {
  Vector probe = params;
  Vector out(params.size());
  for (Index i = 0; i < params.size(); ++i) {
    const double saved = probe(i);
    probe(i) = saved + h;
    const double up = loss(probe);
    probe(i) = saved - h;
    const double down = loss(probe);
    probe(i) = saved;
    out(i) = (up - down) / (2.0 * h);
  }
  return out;
}

double max_relative_error(const Vector& analytic, const Vector& numeric) {
  if (analytic.size() != numeric.size()) {
    throw Error(ErrorKind::DimMismatch, "gradient vectors differ in length");
  }
  double worst = 0.0;
  for (Index i = 0; i < analytic.size(); ++i) {
    const double a = analytic(i);
    const double f = numeric(i);
    worst = std::max(worst, std::abs(a - f) / std::max(1e-8, std::abs(a) + std::abs(f)));
  }
  return worst;
}

double gradient_check(const AeModel& model, const Vector& x) {
  const Matrix column = x;
  Vector analytic;
  loss_and_gradient(model, column, analytic);
  // Differences are taken in extended precision so that roundoff in the loss
  // does not swamp the tiny gradients of early encoder steps.
  const AeLayout& layout = model.layout();
  std::vector<long double> theta(model.parameters().data(),
                                 model.parameters().data() + model.parameters().size());
  const std::vector<long double> input(x.data(), x.data() + x.size());
  const long double h = 1e-5L;
  Vector numeric(analytic.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const long double saved = theta[i];
    theta[i] = saved + h;
    const long double up = extended_loss(layout, theta, input);
    theta[i] = saved - h;
    const long double down = extended_loss(layout, theta, input);
    theta[i] = saved;
    numeric(static_cast<Index>(i)) = static_cast<double>((up - down) / (2.0L * h));
  }
  return max_relative_error(analytic, numeric);
}

}  // namespace corrdet
