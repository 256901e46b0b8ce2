#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "corrdet/stream.hpp"

namespace corrdet {

/// One line of the Intel Berkeley lab log.
struct LabRecord {
  std::string date;
  std::string time;
  std::int64_t epoch = 0;
  int mote_id = 0;
  double temperature = 0.0;  // deg C
  double humidity = 0.0;     // %
  double light = 0.0;        // lux
  double voltage = 0.0;      // V
};

struct LabLog {
  std::vector<LabRecord> records;
  std::size_t lines = 0;
  std::size_t skipped = 0;  // malformed or truncated lines
};

/// Whitespace-separated columns: date time epoch mote temperature humidity light voltage.
/// Lines that do not parse into exactly those eight fields are counted and skipped.
LabLog parse_lab_log(std::istream& in);
LabLog load_lab_log(const std::string& path);

enum class LabField { Temperature, Humidity, Light, Voltage };

std::string_view to_string(LabField field);
LabField parse_lab_field(std::string_view text);
double field_value(const LabRecord& r, LabField field);

struct AlignedSeries {
  std::vector<int> mote_ids;
  LabField field = LabField::Temperature;
  std::int64_t first_epoch = 0;
  ReadingMatrix matrix;                // one row per epoch, columns in mote_ids order
  std::vector<std::size_t> gap_report; // filled cells per mote
};

/// One row per epoch in [epoch_begin, epoch_end). A missing (mote, epoch) cell
/// repeats that mote's previous value; leading gaps take the first value in
/// range. Duplicate records keep the first. Throws NoData for a mote without
/// records in range.
AlignedSeries align(const std::vector<LabRecord>& records, const std::vector<int>& mote_ids,
                    LabField field, std::int64_t epoch_begin, std::int64_t epoch_end);

/// The `count` motes among `candidates` whose aligned series have the highest
/// mean pairwise Pearson correlation over the epoch range. Ties keep the
/// lexicographically smallest id set.
std::vector<int> most_correlated_motes(const std::vector<LabRecord>& records,
                                       const std::vector<int>& candidates, std::size_t count,
                                       LabField field, std::int64_t epoch_begin,
                                       std::int64_t epoch_end);

}  // namespace corrdet
