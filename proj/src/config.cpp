#include "corrdet/config.hpp"

#include <fstream>
#include <sstream>

#include "corrdet/error.hpp"
#include "corrdet/textio.hpp"

namespace corrdet {

namespace {

std::string_view rule_name(FlagRule rule) { return rule == FlagRule::AllOthers ? "all" : "majority"; }

FlagRule parse_rule(std::string_view text) {
  if (text == "all") return FlagRule::AllOthers;
  if (text == "majority") return FlagRule::Majority;
  throw Error(ErrorKind::InvalidConfig, "rule: expected all or majority");
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorKind::InvalidConfig, message);
}

}  // namespace

void RunConfig::validate() const {
  require(window >= 2, "window: must be at least 2");
  require(pca_k >= 1 && pca_k <= window, "pca_k: must be in [1, window]");
  require(c >= 0.0, "c: must be nonnegative");
  require(q > 0.0 && q < 1.0, "q: must lie in (0, 1)");
  require(ae_train_stride >= 1, "ae_train_stride: must be at least 1");
  require(reps >= 1, "reps: must be at least 1");
  require(timing_steps > window, "timing_steps: must exceed window");
  require(jobs >= 1, "jobs: must be at least 1");
  detector_config().ae.validate();
}

void RunConfig::set(std::string_view key, std::string_view value) {
  if (key == "window") window = parse_size(key, value);
  else if (key == "pca_k") pca_k = parse_size(key, value);
  else if (key == "ae_hidden") ae_hidden = parse_size(key, value);
  else if (key == "ae_latent") ae_latent = parse_size(key, value);
  else if (key == "ae_epochs") ae_epochs = parse_size(key, value);
  else if (key == "ae_batch") ae_batch = parse_size(key, value);
  else if (key == "ae_learning_rate") ae_learning_rate = parse_real(key, value);
  else if (key == "ae_train_stride") ae_train_stride = parse_size(key, value);
  else if (key == "c") c = parse_real(key, value);
  else if (key == "q") q = parse_real(key, value);
  else if (key == "rule") rule = parse_rule(value);
  else if (key == "normalize") normalize = parse_bool(key, value);
  else if (key == "detector") detector = parse_detector_kind(value);
  else if (key == "labels") labels = parse_label_mode(value);
  else if (key == "scenario") scenario = std::string(value);
  else if (key == "input") input = std::string(value);
  else if (key == "seed") seed = parse_u64(key, value);
  else if (key == "output_dir") output_dir = std::string(value);
  else if (key == "reps") reps = parse_size(key, value);
  else if (key == "timing_steps") timing_steps = parse_size(key, value);
  else if (key == "jobs") jobs = parse_size(key, value);
  else throw Error(ErrorKind::InvalidConfig, std::string(key) + ": unknown config key");
}

DetectorConfig RunConfig::detector_config() const {
  DetectorConfig d;
  d.window = window;
  d.pca_k = pca_k;
  d.ae.input_len = window;
  d.ae.hidden = ae_hidden;
  d.ae.latent = ae_latent;
  d.ae.epochs = ae_epochs;
  d.ae.batch = ae_batch;
  d.ae.learning_rate = ae_learning_rate;
  d.ae.seed = seed;
  d.c = c;
  d.q = q;
  d.rule = rule;
  d.normalize = normalize;
  d.ae_train_stride = ae_train_stride;
  return d;
}

EvalOptions RunConfig::eval_options() const {
  EvalOptions o;
  o.c = c;
  o.q = q;
  o.labels = labels;
  o.seed = seed;
  o.jobs = jobs;
  return o;
}

std::string format_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "window = " << cfg.window << '\n'
      << "pca_k = " << cfg.pca_k << '\n'
      << "ae_hidden = " << cfg.ae_hidden << '\n'
      << "ae_latent = " << cfg.ae_latent << '\n'
      << "ae_epochs = " << cfg.ae_epochs << '\n'
      << "ae_batch = " << cfg.ae_batch << '\n'
      << "ae_learning_rate = " << format_real(cfg.ae_learning_rate) << '\n'
      << "ae_train_stride = " << cfg.ae_train_stride << '\n'
      << "c = " << format_real(cfg.c) << '\n'
      << "q = " << format_real(cfg.q) << '\n'
      << "rule = " << rule_name(cfg.rule) << '\n'
      << "normalize = " << (cfg.normalize ? "true" : "false") << '\n'
      << "detector = " << to_string(cfg.detector) << '\n'
      << "labels = " << to_string(cfg.labels) << '\n'
      << "scenario = " << cfg.scenario << '\n'
      << "input = " << cfg.input << '\n'
      << "seed = " << cfg.seed << '\n'
      << "output_dir = " << cfg.output_dir << '\n'
      << "reps = " << cfg.reps << '\n'
      << "timing_steps = " << cfg.timing_steps << '\n'
      << "jobs = " << cfg.jobs << '\n';
  return out.str();
}

std::string config_hash(const RunConfig& cfg) {
  // Where outputs go and how many threads compute them do not change them.
  RunConfig c = cfg;
  c.output_dir = ".";
  c.jobs = 1;
  return hash_hex(format_config(c));
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  for (const auto& [key, value] : parse_key_values(in)) cfg.set(key, value);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path + "'");
  return parse_config(in);
}

}  // namespace corrdet
