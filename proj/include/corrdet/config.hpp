#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "corrdet/eval.hpp"
#include "corrdet/hybrid.hpp"

namespace corrdet {

/// Settings shared by every command. Flat `key = value` text; see
/// format_config for the full key list.
struct RunConfig {
  std::size_t window = kDefaultWindow;
  std::size_t pca_k = 2;
  std::size_t ae_hidden = 32;
  std::size_t ae_latent = 4;
  std::size_t ae_epochs = 50;
  std::size_t ae_batch = 32;
  double ae_learning_rate = 1e-3;
  std::size_t ae_train_stride = 2;
  double c = 3.0;
  double q = 0.99;
  FlagRule rule = FlagRule::AllOthers;
  bool normalize = true;
  DetectorKind detector = DetectorKind::Hybrid;
  LabelMode labels = LabelMode::Window;
  std::string scenario;  // preset name or scenario file
  std::string input;     // readings CSV
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  std::size_t reps = 3;
  std::size_t timing_steps = 2000;
  std::size_t jobs = 1;

  /// Throws Error(InvalidConfig) naming the offending key.
  void validate() const;
  /// Sets one key from text; unknown keys throw Error(InvalidConfig).
  void set(std::string_view key, std::string_view value);

  DetectorConfig detector_config() const;
  EvalOptions eval_options() const;
};

/// Canonical text: every key, fixed order, shortest round-trip reals.
std::string format_config(const RunConfig& cfg);
/// Hash of the canonical text, ignoring output_dir and jobs.
std::string config_hash(const RunConfig& cfg);

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

}  // namespace corrdet
