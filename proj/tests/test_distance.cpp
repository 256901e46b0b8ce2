#include <gtest/gtest.h>

#include "corrdet/distance.hpp"
#include "corrdet/error.hpp"
#include "oracles.hpp"

using namespace corrdet;

namespace {

DetectorThresholds threshold(double d, double loss = 1.0) {
  DetectorThresholds th;
  th.distance_threshold = d;
  th.loss_threshold = loss;
  return th;
}

}  // namespace

TEST(Distance, IdenticalLatentsGiveZeros) {
  const Matrix z = Matrix::Constant(3, 4, 1.5);
  EXPECT_EQ(distance_matrix(z).d.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Distance, ThreeFourFive) {
  Matrix z(2, 2);
  z << 0, 3, 0, 4;
  EXPECT_DOUBLE_EQ(distance_matrix(z)(0, 1), 5.0);
}

TEST(Distance, MatchesLoopOracle) {
  Pcg32 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix z = oracle::random_matrix(rng, 3, 4);
    const auto ref = oracle::distances(z);
    const DistanceMatrix d = distance_matrix(z);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(d(i, j), ref[i][j], 1e-12);
    std::vector<Vector> cols;
    for (Eigen::Index j = 0; j < 4; ++j) cols.push_back(z.col(j));
    EXPECT_EQ(distance_matrix(std::span<const Vector>(cols)).d, d.d);
  }
}

TEST(Distance, UpperTriangleIsRowMajor) {
  Matrix z(1, 3);
  z << 0, 1, 3;
  EXPECT_EQ(distance_matrix(z).upper_triangle(), (std::vector<double>{1, 3, 2}));
}

TEST(Calibrate, ConstantDistancesGiveThatValue) {
  DistanceMatrix m{Matrix::Constant(3, 3, 2.0)};
  m.d.diagonal().setZero();
  const std::vector<DistanceMatrix> train(5, m);
  EXPECT_DOUBLE_EQ(calibrate(train, 7.0, {}, 0.99).distance_threshold, 2.0);
}

TEST(Calibrate, ZeroMultiplierGivesMean) {
  Pcg32 rng(2);
  std::vector<DistanceMatrix> train;
  double sum = 0.0;
  std::size_t count = 0;
  for (int k = 0; k < 10; ++k) {
    train.push_back(distance_matrix(oracle::random_matrix(rng, 2, 4)));
    for (double v : train.back().upper_triangle()) {
      sum += 2 * v;
      count += 2;
    }
  }
  EXPECT_NEAR(calibrate(train, 0.0, {}, 0.99).distance_threshold, sum / static_cast<double>(count), 1e-12);
}

TEST(Calibrate, GaussianExceedanceIsSmall) {
  // Entries drawn as |N(10, 1)| directly into symmetric matrices.
  Pcg32 rng(3);
  std::vector<DistanceMatrix> train;
  for (int k = 0; k < 4000; ++k) {
    DistanceMatrix m{Matrix::Zero(4, 4)};
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) m.d(i, j) = m.d(j, i) = rng.normal(10.0, 1.0);
    train.push_back(m);
  }
  const DetectorThresholds th = calibrate(train, 3.0, {}, 0.99);
  std::size_t over = 0, total = 0;
  for (const auto& m : train) {
    for (double v : m.upper_triangle()) {
      over += v > th.distance_threshold;
      ++total;
    }
  }
  const double rate = static_cast<double>(over) / static_cast<double>(total);
  EXPECT_GT(rate, 0.0005);
  EXPECT_LT(rate, 0.003);
}

TEST(Calibrate, EmptyTrainingRejected) {
  EXPECT_THROW(calibrate({}, 3.0, {}, 0.99), Error);
}

TEST(Classify, ZeroMatrixFlagsNothing) {
  const DistanceMatrix m{Matrix::Zero(4, 4)};
  EXPECT_EQ(classify(m, threshold(1.0)), (Flags{0, 0, 0, 0}));
}

TEST(Classify, OutlierFarFromAllOthers) {
  Matrix z(1, 4);
  z << 0.0, 0.1, 0.2, 10.0;
  EXPECT_EQ(classify(distance_matrix(z), threshold(1.0)), (Flags{0, 0, 0, 1}));
}

TEST(Classify, PairwiseNoiseSuppressed) {
  // 0 and 1 are far apart, but both sit next to 2.
  Matrix z(1, 3);
  z << -0.8, 0.8, 0.0;
  EXPECT_EQ(classify(distance_matrix(z), threshold(1.0)), (Flags{0, 0, 0}));
  EXPECT_EQ(classify(distance_matrix(z), threshold(1.0), FlagRule::Majority), (Flags{0, 0, 0}));
}

TEST(Classify, StrictInequality) {
  Matrix z(1, 2);
  z << 0.0, 1.0;
  EXPECT_EQ(classify(distance_matrix(z), threshold(1.0)), (Flags{0, 0}));
  EXPECT_EQ(classify(distance_matrix(z), threshold(0.999)), (Flags{1, 1}));
}

TEST(LossFlag, Boundary) {
  EXPECT_EQ(loss_flag(1.0, threshold(1.0, 1.0)), 0);
  EXPECT_EQ(loss_flag(2.0, threshold(1.0, 1.0)), 1);
}

TEST(AeVerdict, ElementwiseOr) {
  const Flags a{0, 0, 0, 1}, none{0, 0, 0, 0};
  EXPECT_EQ(ae_verdict(a, none), a);
  EXPECT_EQ(ae_verdict(none, a), a);
  EXPECT_EQ(ae_verdict(none, none), none);
  EXPECT_THROW(ae_verdict(a, Flags{0}), Error);
}
