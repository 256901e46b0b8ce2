#include <gtest/gtest.h>

#include "corrdet/autoencoder.hpp"
#include "corrdet/distance.hpp"
#include "corrdet/error.hpp"
#include "corrdet/stats.hpp"
#include "oracles.hpp"

using namespace corrdet;

namespace {

AeConfig small(std::size_t w = 8, std::size_t h = 4, std::size_t l = 2, std::uint64_t seed = 1) {
  AeConfig c;
  c.input_len = w;
  c.hidden = h;
  c.latent = l;
  c.seed = seed;
  return c;
}

Vector random_window(Pcg32& rng, std::size_t w) { return oracle::random_matrix(rng, static_cast<Eigen::Index>(w), 1).col(0); }

}  // namespace

TEST(Autoencoder, InitIsSeeded) {
  EXPECT_EQ(init_autoencoder(small()).parameters(), init_autoencoder(small()).parameters());
  EXPECT_NE(init_autoencoder(small(8, 4, 2, 1)).parameters(), init_autoencoder(small(8, 4, 2, 2)).parameters());
}

TEST(Autoencoder, LatentWiderThanHiddenRejected) {
  EXPECT_THROW(small(8, 2, 3).validate(), Error);
}

TEST(Autoencoder, ForwardMatchesScalarOracle) {
  Pcg32 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const AeModel m = init_autoencoder(small(10, 5, 3, 100 + trial));
    const Vector x = random_window(rng, 10);
    const AeOutput out = forward(m, x);
    EXPECT_GE(out.loss, 0.0);
    EXPECT_NEAR(out.loss, static_cast<double>(oracle::ae_loss(m, x)), 1e-12 * std::max(1.0, out.loss));
    EXPECT_EQ(out.loss, forward(m, x).loss);
    EXPECT_EQ(encode(m, x), out.latent);
  }
}

TEST(Autoencoder, BatchMatchesSingle) {
  Pcg32 rng(8);
  const AeModel m = init_autoencoder(small());
  Matrix xs(8, 3);
  for (int j = 0; j < 3; ++j) xs.col(j) = random_window(rng, 8);
  const AeBatchOutput b = forward_batch(m, xs);
  for (int j = 0; j < 3; ++j) {
    const AeOutput one = forward(m, xs.col(j));
    EXPECT_NEAR(b.loss(j), one.loss, 1e-14);
    EXPECT_LT((b.latent.col(j) - one.latent).norm(), 1e-14);
  }
}

TEST(Autoencoder, GradientMatchesFiniteDifferences) {
  Pcg32 rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    const AeModel m = init_autoencoder(small(8, 4, 2, 50 + trial));
    const Vector x = random_window(rng, 8);
    Matrix xs = x;
    Vector g;
    loss_and_gradient(m, xs, g);
    EXPECT_LT(oracle::relative_error(g, oracle::ae_numeric_gradient(m, x)), 1e-4);
    EXPECT_LT(gradient_check(m, x), 1e-4);
  }
}

TEST(Autoencoder, CorruptedGradientIsCaught) {
  Pcg32 rng(10);
  const AeModel m = init_autoencoder(small());
  const Vector x = random_window(rng, 8);
  Matrix xs = x;
  Vector g;
  loss_and_gradient(m, xs, g);
  g(3) += 0.1;
  EXPECT_GT(max_relative_error(g, oracle::ae_numeric_gradient(m, x)), 1e-2);
}

TEST(Autoencoder, NumericGradientExactOnLinear) {
  const Vector a = (Vector(3) << 2.0, -1.5, 0.25).finished();
  const Vector p = (Vector(3) << 0.3, 0.1, -4.0).finished();
  const Vector g = numeric_gradient([&](const Vector& q) { return a.dot(q); }, p, 1e-5);
  EXPECT_LT(max_relative_error(a, g), 1e-8);
}

TEST(Autoencoder, TrainingReducesLossAndIsDeterministic) {
  Pcg32 rng(12);
  Matrix windows(64, 12);
  for (Eigen::Index i = 0; i < windows.rows(); ++i) {
    const double phase = rng.uniform() * 6.28;
    for (Eigen::Index t = 0; t < 12; ++t) windows(i, t) = std::sin(phase + 0.5 * static_cast<double>(t));
  }
  AeConfig cfg = small(12, 8, 3);
  cfg.epochs = 40;
  cfg.batch = 16;
  cfg.learning_rate = 1e-2;
  const TrainResult a = train(init_autoencoder(cfg), windows);
  const TrainResult b = train(init_autoencoder(cfg), windows);
  EXPECT_EQ(a.loss_history, b.loss_history);
  const auto& h = a.loss_history;
  const std::size_t tenth = std::max<std::size_t>(1, h.size() / 10);
  const double first = mean_of(std::span(h).first(tenth));
  const double last = mean_of(std::span(h).last(tenth));
  EXPECT_LT(last, first);
  EXPECT_TRUE(a.model.has_loss_stats());
}

TEST(Autoencoder, ConstantTrainingPrefersItsLevel) {
  AeConfig cfg = small(10, 4, 2);
  cfg.epochs = 150;
  cfg.batch = 8;
  cfg.learning_rate = 5e-2;
  const Matrix windows = Matrix::Constant(16, 10, 50.0);
  const AeModel m = train(init_autoencoder(cfg), windows).model;
  EXPECT_LT(forward(m, Vector::Constant(10, 50.0)).loss, forward(m, Vector::Constant(10, 90.0)).loss);
}

TEST(Autoencoder, QuantileThresholdFlagsShiftedWindow) {
  // Gaussian(50, 5) windows standardised to z-scores; a +40 shift is +8 there.
  Pcg32 rng(13);
  const std::size_t w = 20;
  Matrix windows(200, static_cast<Eigen::Index>(w));
  for (Eigen::Index i = 0; i < windows.rows(); ++i)
    for (Eigen::Index t = 0; t < windows.cols(); ++t) windows(i, t) = rng.normal();
  AeConfig cfg = small(w, 8, 4);
  cfg.epochs = 10;
  const AeModel m = train(init_autoencoder(cfg), windows).model;
  DetectorThresholds th;
  th.loss_threshold = quantile_of(window_losses(m, windows), 0.99);
  Vector shifted = windows.row(0).transpose();
  shifted.array() += 8.0;
  EXPECT_EQ(loss_flag(forward(m, shifted).loss, th), 1);
  EXPECT_NEAR(th.loss_threshold, m.loss_stats().q99, 1e-12);
}
