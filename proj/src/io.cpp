#include "corrdet/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "corrdet/error.hpp"
#include "corrdet/textio.hpp"

namespace corrdet {

namespace {

void write_comments(std::ostream& out, const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
}

void write_header(std::ostream& out, std::size_t sensors, const char* prefix) {
  out << 't';
  for (std::size_t s = 0; s < sensors; ++s) out << ',' << prefix << s;
  out << '\n';
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

struct RawTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

RawTable read_table(std::istream& in, const char* what) {
  RawTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      table.comments.push_back(trim(std::string_view(line).substr(1)));
      continue;
    }
    if (table.header.empty()) {
      table.header = split_commas(line);
      if (table.header.size() < 2 || table.header[0] != "t") {
        throw Error(ErrorKind::Format, std::string(what) + ": header must start with t");
      }
      continue;
    }
    auto cells = split_commas(line);
    if (cells.size() != table.header.size()) {
      throw Error(ErrorKind::Format, std::string(what) + ": row " + std::to_string(table.rows.size()) +
                                         " has " + std::to_string(cells.size()) + " cells, expected " +
                                         std::to_string(table.header.size()));
    }
    if (parse_u64("t", cells[0]) != table.rows.size()) {
      throw Error(ErrorKind::Format, std::string(what) + ": t column must count up from 0");
    }
    table.rows.push_back(std::move(cells));
  }
  if (in.bad()) throw Error(ErrorKind::Io, std::string(what) + ": read error");
  if (table.rows.empty()) throw Error(ErrorKind::NoData, std::string(what) + ": no data rows");
  return table;
}

template <typename Fn>
auto with_file(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return fn(in);
}

}  // namespace

std::string provenance_line(const std::string& config_hash, std::uint64_t seed) {
  return "corrdet config=" + config_hash + " seed=" + std::to_string(seed);
}

void write_readings_csv(std::ostream& out, const ReadingMatrix& readings,
                        const std::vector<std::string>& comments) {
  write_comments(out, comments);
  write_header(out, static_cast<std::size_t>(readings.cols()), "s");
  for (Eigen::Index t = 0; t < readings.rows(); ++t) {
    out << t;
    for (Eigen::Index s = 0; s < readings.cols(); ++s) out << ',' << format_real(readings(t, s));
    out << '\n';
  }
}

ReadingTable read_readings_csv(std::istream& in) {
  RawTable raw = read_table(in, "readings");
  ReadingTable table;
  table.comments = std::move(raw.comments);
  const auto cols = static_cast<Eigen::Index>(raw.header.size() - 1);
  table.readings.resize(static_cast<Eigen::Index>(raw.rows.size()), cols);
  for (std::size_t t = 0; t < raw.rows.size(); ++t) {
    for (Eigen::Index s = 0; s < cols; ++s) {
      try {
        table.readings(static_cast<Eigen::Index>(t), s) =
            parse_real(raw.header[static_cast<std::size_t>(s) + 1], raw.rows[t][static_cast<std::size_t>(s) + 1]);
      } catch (const Error& e) {
        throw Error(ErrorKind::Format, "readings row " + std::to_string(t) + ": " + e.what());
      }
    }
  }
  return table;
}

void write_labels_csv(std::ostream& out, const LabelTrack& labels,
                      const std::vector<std::string>& comments) {
  write_comments(out, comments);
  write_header(out, labels.sensors(), "s");
  for (std::size_t t = 0; t < labels.steps(); ++t) {
    out << t;
    for (std::size_t s = 0; s < labels.sensors(); ++s) out << ',' << int(labels.at(t, s));
    out << '\n';
  }
}

LabelTrack read_labels_csv(std::istream& in) {
  RawTable raw = read_table(in, "labels");
  const std::size_t sensors = raw.header.size() - 1;
  LabelTrack labels(raw.rows.size(), sensors);
  for (std::size_t t = 0; t < raw.rows.size(); ++t) {
    for (std::size_t s = 0; s < sensors; ++s) {
      const std::string& cell = raw.rows[t][s + 1];
      if (cell != "0" && cell != "1") {
        throw Error(ErrorKind::Format, "labels row " + std::to_string(t) + ": expected 0 or 1");
      }
      labels.set(t, s, cell == "1");
    }
  }
  return labels;
}

void write_verdicts_csv(std::ostream& out, std::span<const AnomalyVerdict> verdicts,
                        std::size_t sensors, const std::vector<std::string>& comments) {
  write_comments(out, comments);
  out << "t,stage";
  for (std::size_t s = 0; s < sensors; ++s) out << ",f" << s;
  out << ",step_time_ns\n";
  for (const auto& v : verdicts) {
    out << v.t << ',' << to_string(v.stage);
    for (const auto f : v.flags) {
      out << ',';
      if (f == kUndetermined) {
        out << 'u';
      } else {
        out << int(f);
      }
    }
    out << ',' << v.step_time_ns << '\n';
  }
}

void write_distances_csv(std::ostream& out, std::span<const AnomalyVerdict> verdicts,
                         std::size_t sensors, const std::vector<std::string>& comments) {
  write_comments(out, comments);
  out << 't';
  for (std::size_t i = 0; i < sensors; ++i) {
    for (std::size_t j = i + 1; j < sensors; ++j) out << ",d" << i << '_' << j;
  }
  out << '\n';
  for (const auto& v : verdicts) {
    if (v.stage == Stage::Undetermined) continue;
    out << v.t;
    for (const double d : v.distances) out << ',' << format_real(d);
    out << '\n';
  }
}

ReadingTable load_readings(const std::string& path) {
  return with_file(path, [](std::istream& in) { return read_readings_csv(in); });
}

LabelTrack load_labels(const std::string& path) {
  return with_file(path, [](std::istream& in) { return read_labels_csv(in); });
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace corrdet
