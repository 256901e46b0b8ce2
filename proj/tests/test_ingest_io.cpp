#include <gtest/gtest.h>

#include <sstream>

#include "corrdet/config.hpp"
#include "corrdet/error.hpp"
#include "corrdet/ingest.hpp"
#include "corrdet/io.hpp"
#include "corrdet/model_io.hpp"
#include "corrdet/textio.hpp"
#include "oracles.hpp"

using namespace corrdet;

namespace {

LabLog parse(const std::string& text) {
  std::istringstream in(text);
  return parse_lab_log(in);
}

std::string line(int epoch, int mote, double temp) {
  return "2004-02-28 00:59:16.02785 " + std::to_string(epoch) + " " + std::to_string(mote) + " " +
         std::to_string(temp) + " 37.0933 45.08 2.69964\n";
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::Io;
}

}  // namespace

TEST(LabLog, ParsesDocumentedLine) {
  const LabLog log = parse("2004-02-28 00:59:16.02785 3 1 19.9884 37.0933 45.08 2.69964\n");
  ASSERT_EQ(log.records.size(), 1u);
  EXPECT_EQ(log.records[0].epoch, 3);
  EXPECT_EQ(log.records[0].mote_id, 1);
  EXPECT_DOUBLE_EQ(log.records[0].temperature, 19.9884);
  EXPECT_DOUBLE_EQ(log.records[0].voltage, 2.69964);
}

TEST(LabLog, SkipsMalformedAndEmpty) {
  const LabLog log = parse("2004-02-28 00:59:16 3 1 19.9 37.0\n" + line(4, 1, 20.0) + "\n");
  EXPECT_EQ(log.records.size(), 1u);
  EXPECT_EQ(log.skipped, 1u);
  const LabLog none = parse("");
  EXPECT_TRUE(none.records.empty());
  EXPECT_EQ(none.skipped, 0u);
}

TEST(Align, CompleteAndForwardFilled) {
  std::string text;
  for (int e = 0; e < 4; ++e) {
    text += line(e, 1, 10 + e);
    if (e != 2) text += line(e, 2, 20 + e);
  }
  const LabLog log = parse(text);
  const AlignedSeries s = align(log.records, {1, 2}, LabField::Temperature, 0, 4);
  EXPECT_EQ(s.matrix.rows(), 4);
  EXPECT_DOUBLE_EQ(s.matrix(3, 0), 13.0);
  EXPECT_DOUBLE_EQ(s.matrix(2, 1), 21.0);
  EXPECT_EQ(s.gap_report, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(kind_of([&] { align(log.records, {1, 9}, LabField::Temperature, 0, 4); }), ErrorKind::NoData);
}

TEST(Align, MostCorrelatedMotes) {
  std::string text;
  Pcg32 rng(4);
  for (int e = 0; e < 200; ++e) {
    const double level = std::sin(e * 0.05) * 5;
    text += line(e, 1, 20 + level + 0.01 * rng.normal());
    text += line(e, 2, 20 + level + 0.01 * rng.normal());
    text += line(e, 3, 20 + rng.normal());
    text += line(e, 4, 20 + level + 0.01 * rng.normal());
  }
  const LabLog log = parse(text);
  EXPECT_EQ(most_correlated_motes(log.records, {1, 2, 3, 4}, 3, LabField::Temperature, 0, 200),
            (std::vector<int>{1, 2, 4}));
}

TEST(ReadingsCsv, RoundTrip) {
  Pcg32 rng(1);
  const ReadingMatrix m = oracle::random_matrix(rng, 7, 3, 100.0);
  std::stringstream buf;
  write_readings_csv(buf, m, {"corrdet config=abc seed=1"});
  const ReadingTable back = read_readings_csv(buf);
  EXPECT_EQ(back.readings, m);
  EXPECT_EQ(back.comments.front(), "corrdet config=abc seed=1");
}

TEST(ReadingsCsv, Errors) {
  std::istringstream empty("");
  EXPECT_EQ(kind_of([&] { read_readings_csv(empty); }), ErrorKind::NoData);
  std::istringstream header_only("t,s0,s1\n");
  EXPECT_EQ(kind_of([&] { read_readings_csv(header_only); }), ErrorKind::NoData);
  std::istringstream ragged("t,s0,s1\n0,1,2\n1,3\n");
  EXPECT_EQ(kind_of([&] { read_readings_csv(ragged); }), ErrorKind::Format);
  std::istringstream skipped("t,s0,s1\n0,1,2\n2,3,4\n");
  EXPECT_EQ(kind_of([&] { read_readings_csv(skipped); }), ErrorKind::Format);
}

TEST(LabelsCsv, RoundTrip) {
  LabelTrack t(5, 2);
  t.set(3, 1, true);
  std::stringstream buf;
  write_labels_csv(buf, t, {});
  EXPECT_EQ(read_labels_csv(buf), t);
}

TEST(ModelFiles, PcaRoundTripAndTagCheck) {
  Pcg32 rng(2);
  const PcaModel m = fit_pca(oracle::random_matrix(rng, 20, 6), 2);
  std::stringstream buf;
  write_pca(buf, m);
  const std::string bytes = buf.str();
  std::istringstream in(bytes);
  const PcaModel back = read_pca(in);
  EXPECT_EQ(back.components, m.components);
  EXPECT_EQ(back.mean, m.mean);
  std::istringstream again(bytes);
  EXPECT_EQ(peek_model_tag(again), ModelTag::Pca);
  std::istringstream wrong(bytes);
  EXPECT_EQ(kind_of([&] { read_autoencoder(wrong); }), ErrorKind::Format);
  std::istringstream junk("not a model");
  EXPECT_EQ(kind_of([&] { read_pca(junk); }), ErrorKind::Format);
}

TEST(ModelFiles, AutoencoderRoundTrip) {
  AeConfig cfg;
  cfg.input_len = 6;
  cfg.hidden = 3;
  cfg.latent = 2;
  AeModel m = init_autoencoder(cfg);
  m.set_loss_stats(LossStats{1, 2, 3, 4, 5, 6, 7, 8, 9});
  std::stringstream a, b;
  write_autoencoder(a, m);
  write_autoencoder(b, m);
  EXPECT_EQ(a.str(), b.str());
  const AeModel back = read_autoencoder(a);
  EXPECT_TRUE(back == m);
  EXPECT_EQ(back.loss_stats().q99, 8);
}

TEST(Calibration, JsonRoundTrip) {
  DetectorBundle b;
  b.window = 50;
  b.norm = NormStats{{1.0, 2.0}, {0.5, 0.25}};
  b.has_pca = b.has_ae = true;
  b.pca_thresholds.distance_threshold = 1.25;
  b.ae_thresholds.distance_threshold = 0.5;
  b.ae_thresholds.loss_threshold = 0.125;
  b.rule = FlagRule::Majority;
  DetectorBundle c;
  apply_calibration_json(c, calibration_json(b, "p"));
  EXPECT_EQ(c.window, 50u);
  EXPECT_EQ(c.norm.std, b.norm.std);
  EXPECT_EQ(c.rule, FlagRule::Majority);
  EXPECT_EQ(c.ae_thresholds.loss_threshold, 0.125);
  EXPECT_EQ(c.pca_thresholds.distance_threshold, 1.25);
  EXPECT_EQ(kind_of([&] { apply_calibration_json(c, "{"); }), ErrorKind::Format);
}

TEST(Config, ParseOverrideAndHash) {
  std::istringstream in("# comment\nwindow = 60\nae_epochs = 7\nrule = majority\n");
  RunConfig cfg = parse_config(in);
  EXPECT_EQ(cfg.window, 60u);
  EXPECT_EQ(cfg.detector_config().ae.input_len, 60u);
  EXPECT_EQ(cfg.rule, FlagRule::Majority);
  std::istringstream round(format_config(cfg));
  EXPECT_EQ(config_hash(parse_config(round)), config_hash(cfg));
  RunConfig moved = cfg;
  moved.output_dir = "/elsewhere";
  moved.jobs = 4;
  EXPECT_EQ(config_hash(moved), config_hash(cfg));
  moved.seed = 2;
  EXPECT_NE(config_hash(moved), config_hash(cfg));
  std::istringstream unknown("window = 60\nwindoww = 3\n");
  EXPECT_EQ(kind_of([&] { parse_config(unknown); }), ErrorKind::InvalidConfig);
  cfg.q = 1.0;
  EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::InvalidConfig);
}

TEST(TextIo, Primitives) {
  EXPECT_EQ(format_real(0.1), "0.1");
  EXPECT_EQ(parse_real("x", format_real(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(hash_hex("").size(), 16u);
  EXPECT_EQ(hash_hex(""), "cbf29ce484222325");
  EXPECT_EQ(kind_of([] { parse_size("steps", "-3"); }), ErrorKind::InvalidConfig);
  EXPECT_TRUE(parse_bool("b", "true"));
}
