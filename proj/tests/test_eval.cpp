#include <gtest/gtest.h>

#include <cmath>

#include "corrdet/error.hpp"
#include "corrdet/eval.hpp"
#include "oracles.hpp"

using namespace corrdet;

TEST(Confusion, HandExamples) {
  const std::vector<std::uint8_t> ones(6, 1), zeros(6, 0);
  EXPECT_EQ(confusion(ones, ones), (ConfusionCounts{6, 0, 0, 0}));
  EXPECT_EQ(confusion(zeros, ones), (ConfusionCounts{0, 0, 6, 0}));
  const std::vector<std::uint8_t> f{1, 0, 1, 0}, l{1, 1, 0, 0};
  EXPECT_EQ(confusion(f, l), (ConfusionCounts{1, 1, 1, 1}));
  EXPECT_THROW(confusion(f, ones), Error);
}

TEST(Prf1, Conventions) {
  const Prf1 half = prf1({1, 1, 1, 0});
  EXPECT_DOUBLE_EQ(half.precision, 0.5);
  EXPECT_DOUBLE_EQ(half.recall, 0.5);
  EXPECT_DOUBLE_EQ(half.f1, 0.5);
  const Prf1 perfect = prf1({4, 0, 0, 3});
  EXPECT_DOUBLE_EQ(perfect.f1, 1.0);
  const Prf1 none = prf1({0, 0, 5, 0});
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.f1, 0.0);
}

TEST(Prf1, BoundsProperty) {
  Pcg32 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const ConfusionCounts c{rng.below(5), rng.below(5), rng.below(5), rng.below(5)};
    const Prf1 m = prf1(c);
    for (double v : {m.precision, m.recall, m.f1}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_LE(m.f1, std::max(m.precision, m.recall) + 1e-15);
    if (m.precision == 0.0 || m.recall == 0.0) EXPECT_EQ(m.f1, 0.0);
  }
}

TEST(Pearson, Trivial) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(-2 * v + 7);
  EXPECT_NEAR(pearson_r(x, x), 1.0, 1e-15);
  EXPECT_NEAR(pearson_r(x, y), -1.0, 1e-15);
  const std::vector<double> flat(5, 3.0);
  EXPECT_THROW(pearson_r(x, flat), Error);
  EXPECT_THROW(pearson_r(x, std::vector<double>{1, 2}), Error);
  Pcg32 rng(2);
  std::vector<double> a, b;
  for (int i = 0; i < 100; ++i) {
    a.push_back(rng.normal());
    b.push_back(rng.normal());
  }
  const double r = pearson_r(a, b);
  EXPECT_GE(r, -1.0);
  EXPECT_LE(r, 1.0);
}

TEST(StepLabels, WindowAndPointModes) {
  LabelTrack t(8, 2);
  t.set(4, 1, true);
  EXPECT_EQ(step_labels(t, 1, 3, LabelMode::Point), (std::vector<std::uint8_t>{0, 0, 1, 0, 0, 0}));
  EXPECT_EQ(step_labels(t, 1, 3, LabelMode::Window), (std::vector<std::uint8_t>{0, 0, 1, 1, 1, 0}));
  EXPECT_EQ(parse_label_mode("point"), LabelMode::Point);
  EXPECT_THROW(parse_label_mode("points"), Error);
}

TEST(ScoreSensor, UndeterminedIsNotAFlag) {
  LabelTrack t(4, 2);
  t.set(3, 0, true);
  const std::vector<Flags> rows{{1, 0}, {1, 1}, {kUndetermined, 0}};
  EXPECT_EQ(score_sensor(rows, t, 0, 2, LabelMode::Point), (ConfusionCounts{0, 2, 1, 0}));
  EXPECT_EQ(score_all_sensors(rows, t, 2, LabelMode::Point).total(), 6u);
}

TEST(Rope, InsideOutsideMeans) {
  SweepReport r;
  for (double v : {1.0, 45.0, 47.0, 53.0, 99.0}) {
    SweepPoint p;
    p.value = v;
    for (auto& s : p.scores) s.metrics.f1 = v > 45 && v < 55 ? 0.2 : 0.9;
    r.points.push_back(p);
  }
  const RopeSummary s = rope_summary(r, RopeBand{});
  EXPECT_EQ(s.inside_points, 2u);
  EXPECT_EQ(s.outside_points, 3u);
  EXPECT_DOUBLE_EQ(s.inside_f1[0], 0.2);
  EXPECT_DOUBLE_EQ(s.outside_f1[2], 0.9);
  EXPECT_THROW(rope_summary(r, RopeBand{55, 45}), Error);
}

TEST(Bench, NeedsThreeRepetitions) {
  DetectorBundle b;
  const ReadingMatrix m = ReadingMatrix::Zero(10, 2);
  EXPECT_THROW(bench(b, m, kAllDetectors, 2), Error);
}

TEST(Reports, CsvShapes) {
  SweepReport r;
  r.variable = "p";
  r.points.resize(3);
  const std::string csv = sweep_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(csv.rfind("p,pca_precision", 0), 0u);
}
