#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "corrdet/autoencoder.hpp"
#include "corrdet/hybrid.hpp"
#include "corrdet/pca.hpp"

namespace corrdet {

/// Payload carried by a model file.
enum class ModelTag : std::uint32_t { Pca = 1, Autoencoder = 2 };

inline constexpr std::uint32_t kModelVersion = 1;

/// Layout: "CRDM" magic, u32 version, u32 tag, then the payload. Every
/// integer is a little-endian u64 and every real a little-endian IEEE double.
void write_pca(std::ostream& out, const PcaModel& model);
void write_autoencoder(std::ostream& out, const AeModel& model);

/// Reads the tag without consuming the payload.
ModelTag peek_model_tag(std::istream& in);
/// Throw Error(Format) on a bad magic, version or tag mismatch.
PcaModel read_pca(std::istream& in);
AeModel read_autoencoder(std::istream& in);

void save_pca(const std::string& path, const PcaModel& model);
void save_autoencoder(const std::string& path, const AeModel& model);
PcaModel load_pca(const std::string& path);
AeModel load_autoencoder(const std::string& path);
ModelTag model_file_tag(const std::string& path);

/// Normalization, thresholds and flag rule of a bundle as JSON text.
std::string calibration_json(const DetectorBundle& bundle, const std::string& provenance);
/// Fills the calibration part of `bundle` (models untouched).
void apply_calibration_json(DetectorBundle& bundle, const std::string& text);

}  // namespace corrdet
