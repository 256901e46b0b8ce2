#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "corrdet/hybrid.hpp"
#include "corrdet/stream.hpp"

namespace corrdet {

/// Header comment naming the configuration hash and seed behind an output file.
std::string provenance_line(const std::string& config_hash, std::uint64_t seed);

struct ReadingTable {
  std::vector<std::string> comments;  // without the leading "# "
  ReadingMatrix readings;
};

/// "t,s0,...,s{n-1}" with one row per step. Comment lines start with '#'.
void write_readings_csv(std::ostream& out, const ReadingMatrix& readings,
                        const std::vector<std::string>& comments);
/// Throws Error(NoData) for a file without data rows and Error(Format) for
/// ragged rows, non-numeric cells or a t column that is not 0, 1, 2, ...
ReadingTable read_readings_csv(std::istream& in);

void write_labels_csv(std::ostream& out, const LabelTrack& labels,
                      const std::vector<std::string>& comments);
LabelTrack read_labels_csv(std::istream& in);

/// "t,stage,f0,...,f{n-1},step_time_ns"; undetermined flags are written as "u".
void write_verdicts_csv(std::ostream& out, std::span<const AnomalyVerdict> verdicts,
                        std::size_t sensors, const std::vector<std::string>& comments);
/// "t,d0_1,d0_2,..." row-major upper triangle; warm-up steps are omitted.
void write_distances_csv(std::ostream& out, std::span<const AnomalyVerdict> verdicts,
                         std::size_t sensors, const std::vector<std::string>& comments);

ReadingTable load_readings(const std::string& path);
LabelTrack load_labels(const std::string& path);

/// Writes `text` to `path`, throwing Error(Io) on failure.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace corrdet
