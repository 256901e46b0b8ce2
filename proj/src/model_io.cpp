#include "corrdet/model_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "corrdet/error.hpp"
#include "json.hpp"

namespace corrdet {

namespace {

constexpr std::array<char, 4> kMagic = {'C', 'R', 'D', 'M'};

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_reals(std::ostream& out, const double* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) put_f64(out, data[i]);
}

std::uint64_t get_bytes(std::istream& in, int count) {
  std::uint64_t v = 0;
  for (int i = 0; i < count; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw Error(ErrorKind::Format, "model file truncated");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

std::uint32_t get_u32(std::istream& in) { return static_cast<std::uint32_t>(get_bytes(in, 4)); }
std::uint64_t get_u64(std::istream& in) { return get_bytes(in, 8); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

// Guards allocations against corrupt size fields.
std::size_t get_size(std::istream& in, std::size_t limit, const char* what) {
  const std::uint64_t v = get_u64(in);
  if (v > limit) throw Error(ErrorKind::Format, std::string("model file: implausible ") + what);
  return static_cast<std::size_t>(v);
}

void put_header(std::ostream& out, ModelTag tag) {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kModelVersion);
  put_u32(out, static_cast<std::uint32_t>(tag));
}

ModelTag get_header(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error(ErrorKind::Format, "not a corrdet model file");
  const std::uint32_t version = get_u32(in);
  if (version != kModelVersion) {
    throw Error(ErrorKind::Format, "unsupported model file version " + std::to_string(version));
  }
  const std::uint32_t tag = get_u32(in);
  if (tag != static_cast<std::uint32_t>(ModelTag::Pca) &&
      tag != static_cast<std::uint32_t>(ModelTag::Autoencoder)) {
    throw Error(ErrorKind::Format, "unknown model payload tag " + std::to_string(tag));
  }
  return static_cast<ModelTag>(tag);
}

void expect_tag(std::istream& in, ModelTag want) {
  const ModelTag got = get_header(in);
  if (got != want) {
    throw Error(ErrorKind::Format, want == ModelTag::Pca ? "model file holds an autoencoder, not PCA"
                                                         : "model file holds PCA, not an autoencoder");
  }
}

template <typename Fn>
void to_file(const std::string& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  fn(out);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

template <typename Fn>
auto from_file(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return fn(in);
}

using nlohmann::json;

json thresholds_json(const DetectorThresholds& th) {
  return {{"distance_threshold", th.distance_threshold},
          {"loss_threshold", th.loss_threshold},
          {"distance_mean", th.calibration.distance_mean},
          {"distance_std", th.calibration.distance_std},
          {"c", th.calibration.multiplier},
          {"q", th.calibration.loss_quantile},
          {"distance_samples", th.calibration.distance_samples},
          {"loss_samples", th.calibration.loss_samples}};
}

DetectorThresholds thresholds_from(const json& j) {
  DetectorThresholds th;
  th.distance_threshold = j.at("distance_threshold").get<double>();
  th.loss_threshold = j.at("loss_threshold").get<double>();
  th.calibration.distance_mean = j.at("distance_mean").get<double>();
  th.calibration.distance_std = j.at("distance_std").get<double>();
  th.calibration.multiplier = j.at("c").get<double>();
  th.calibration.loss_quantile = j.at("q").get<double>();
  th.calibration.distance_samples = j.at("distance_samples").get<std::size_t>();
  th.calibration.loss_samples = j.at("loss_samples").get<std::size_t>();
  return th;
}

}  // namespace

void write_pca(std::ostream& out, const PcaModel& model) {
  put_header(out, ModelTag::Pca);
  const std::size_t w = model.input_dim();
  const std::size_t k = model.latent_dim();
  put_u64(out, w);
  put_u64(out, k);
  put_u64(out, model.rank_deficient ? 1 : 0);
  put_reals(out, model.mean.data(), w);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      put_f64(out, model.components(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    }
  }
  put_reals(out, model.explained_variance.data(), k);
}

void write_autoencoder(std::ostream& out, const AeModel& model) {
  put_header(out, ModelTag::Autoencoder);
  const AeConfig& c = model.config();
  put_u64(out, c.input_len);
  put_u64(out, c.hidden);
  put_u64(out, c.latent);
  put_u64(out, c.epochs);
  put_u64(out, c.batch);
  put_f64(out, c.learning_rate);
  put_u64(out, c.seed);
  put_u64(out, static_cast<std::uint64_t>(model.parameters().size()));
  put_reals(out, model.parameters().data(), static_cast<std::size_t>(model.parameters().size()));
  put_u64(out, model.has_loss_stats() ? 1 : 0);
  const LossStats& s = model.loss_stats();
  for (const double v : {s.mean, s.std, s.min, s.max, s.q50, s.q90, s.q95, s.q99, s.q999}) put_f64(out, v);
}

ModelTag peek_model_tag(std::istream& in) {
  const auto pos = in.tellg();
  const ModelTag tag = get_header(in);
  in.seekg(pos);
  return tag;
}

PcaModel read_pca(std::istream& in) {
  expect_tag(in, ModelTag::Pca);
  constexpr std::size_t kLimit = 1u << 20;
  const std::size_t w = get_size(in, kLimit, "window length");
  const std::size_t k = get_size(in, w, "latent dimension");
  PcaModel m;
  m.rank_deficient = get_u64(in) != 0;
  m.mean.resize(static_cast<Eigen::Index>(w));
  for (std::size_t i = 0; i < w; ++i) m.mean(static_cast<Eigen::Index>(i)) = get_f64(in);
  m.components.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(w));
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      m.components(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = get_f64(in);
    }
  }
  m.explained_variance.resize(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) m.explained_variance(static_cast<Eigen::Index>(i)) = get_f64(in);
  return m;
}

AeModel read_autoencoder(std::istream& in) {
  expect_tag(in, ModelTag::Autoencoder);
  constexpr std::size_t kLimit = 1u << 20;
  AeConfig c;
  c.input_len = get_size(in, kLimit, "window length");
  c.hidden = get_size(in, 4096, "hidden size");
  c.latent = get_size(in, 4096, "latent size");
  c.epochs = get_u64(in);
  c.batch = get_u64(in);
  c.learning_rate = get_f64(in);
  c.seed = get_u64(in);
  c.validate();
  AeModel model(c);
  const std::size_t count = get_size(in, 1u << 28, "parameter count");
  if (count != static_cast<std::size_t>(model.parameters().size())) {
    throw Error(ErrorKind::Format, "model file: parameter count does not match its configuration");
  }
  for (std::size_t i = 0; i < count; ++i) model.parameters()(static_cast<Eigen::Index>(i)) = get_f64(in);
  const bool has_stats = get_u64(in) != 0;
  LossStats s;
  for (double* v : {&s.mean, &s.std, &s.min, &s.max, &s.q50, &s.q90, &s.q95, &s.q99, &s.q999}) *v = get_f64(in);
  if (has_stats) model.set_loss_stats(s);
  return model;
}

void save_pca(const std::string& path, const PcaModel& model) {
  to_file(path, [&](std::ostream& out) { write_pca(out, model); });
}

void save_autoencoder(const std::string& path, const AeModel& model) {
  to_file(path, [&](std::ostream& out) { write_autoencoder(out, model); });
}

PcaModel load_pca(const std::string& path) {
  return from_file(path, [](std::istream& in) { return read_pca(in); });
}

AeModel load_autoencoder(const std::string& path) {
  return from_file(path, [](std::istream& in) { return read_autoencoder(in); });
}

ModelTag model_file_tag(const std::string& path) {
  return from_file(path, [](std::istream& in) { return peek_model_tag(in); });
}

std::string calibration_json(const DetectorBundle& bundle, const std::string& provenance) {
  json j;
  j["provenance"] = provenance;
  j["window"] = bundle.window;
  j["rule"] = bundle.rule == FlagRule::AllOthers ? "all" : "majority";
  j["norm_mean"] = bundle.norm.mean;
  j["norm_std"] = bundle.norm.std;
  if (bundle.has_pca) j["pca"] = thresholds_json(bundle.pca_thresholds);
  if (bundle.has_ae) j["ae"] = thresholds_json(bundle.ae_thresholds);
  return j.dump(2) + "\n";
}

void apply_calibration_json(DetectorBundle& bundle, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
    bundle.window = j.at("window").get<std::size_t>();
    const auto rule = j.at("rule").get<std::string>();
    if (rule != "all" && rule != "majority") throw Error(ErrorKind::Format, "calibration: unknown rule " + rule);
    bundle.rule = rule == "all" ? FlagRule::AllOthers : FlagRule::Majority;
    bundle.norm.mean = j.at("norm_mean").get<std::vector<double>>();
    bundle.norm.std = j.at("norm_std").get<std::vector<double>>();
    if (bundle.norm.mean.size() != bundle.norm.std.size()) {
      throw Error(ErrorKind::Format, "calibration: norm_mean and norm_std differ in length");
    }
    if (j.contains("pca")) bundle.pca_thresholds = thresholds_from(j.at("pca"));
    if (j.contains("ae")) bundle.ae_thresholds = thresholds_from(j.at("ae"));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, std::string("calibration: ") + e.what());
  }
}

}  // namespace corrdet
