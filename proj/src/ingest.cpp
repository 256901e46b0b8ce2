#include "corrdet/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "corrdet/error.hpp"
#include "corrdet/stats.hpp"

namespace corrdet {

namespace {

template <typename T>
bool parse_whole(const std::string& text, T& out) {
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

bool parse_line(const std::string& line, LabRecord& r) {
  std::istringstream in(line);
  std::vector<std::string> cols;
  for (std::string tok; in >> tok;) cols.push_back(tok);
  if (cols.size() != 8) return false;
  r.date = cols[0];
  r.time = cols[1];
  if (!parse_whole(cols[2], r.epoch) || r.epoch < 0) return false;
  if (!parse_whole(cols[3], r.mote_id)) return false;
  double* measures[] = {&r.temperature, &r.humidity, &r.light, &r.voltage};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!parse_whole(cols[4 + i], *measures[i]) || !std::isfinite(*measures[i])) return false;
  }
  return true;
}

double correlation(const Vector& a, const Vector& b) {
  const Vector da = a.array() - a.mean();
  const Vector db = b.array() - b.mean();
  const double denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
  return denom > 0.0 ? da.dot(db) / denom : 0.0;
}

}  // namespace

LabLog parse_lab_log(std::istream& in) {
  LabLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++log.lines;
    LabRecord r;
    if (parse_line(line, r)) {
      log.records.push_back(std::move(r));
    } else {
      ++log.skipped;
    }
  }
  if (in.bad()) throw Error(ErrorKind::Io, "read error in lab log");
  return log;
}

LabLog load_lab_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open lab log " + path);
  return parse_lab_log(in);
}

std::string_view to_string(LabField field) {
  switch (field) {
    case LabField::Temperature: return "temperature";
    case LabField::Humidity: return "humidity";
    case LabField::Light: return "light";
    case LabField::Voltage: return "voltage";
  }
  return "unknown";
}

LabField parse_lab_field(std::string_view text) {
  if (text == "temperature") return LabField::Temperature;
  if (text == "humidity") return LabField::Humidity;
  if (text == "light") return LabField::Light;
  if (text == "voltage") return LabField::Voltage;
  throw Error(ErrorKind::InvalidConfig, "field: unknown lab field '" + std::string(text) + "'");
}

double field_value(const LabRecord& r, LabField field) {
  switch (field) {
    case LabField::Temperature: return r.temperature;
    case LabField::Humidity: return r.humidity;
    case LabField::Light: return r.light;
    case LabField::Voltage: return r.voltage;
  }
  return 0.0;
}

AlignedSeries align(const std::vector<LabRecord>& records, const std::vector<int>& mote_ids,
                    LabField field, std::int64_t epoch_begin, std::int64_t epoch_end) {
  if (mote_ids.size() < 2) throw Error(ErrorKind::InvalidConfig, "motes: need at least 2 motes");
  if (epoch_end <= epoch_begin) throw Error(ErrorKind::InvalidConfig, "epochs: empty epoch range");
  const auto rows = static_cast<std::size_t>(epoch_end - epoch_begin);
  const std::size_t n = mote_ids.size();
  std::map<int, std::size_t> column;
  for (std::size_t i = 0; i < n; ++i) {
    if (!column.emplace(mote_ids[i], i).second) {
      throw Error(ErrorKind::InvalidConfig, "motes: duplicate mote id " + std::to_string(mote_ids[i]));
    }
  }

  std::vector<double> value(rows * n, 0.0);
  std::vector<std::uint8_t> present(rows * n, 0);
  for (const LabRecord& r : records) {
    if (r.epoch < epoch_begin || r.epoch >= epoch_end) continue;
    const auto it = column.find(r.mote_id);
    if (it == column.end()) continue;
    const std::size_t cell = static_cast<std::size_t>(r.epoch - epoch_begin) * n + it->second;
    if (present[cell]) continue;
    present[cell] = 1;
    value[cell] = field_value(r, field);
  }

  AlignedSeries out;
  out.mote_ids = mote_ids;
  out.field = field;
  out.first_epoch = epoch_begin;
  out.matrix.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
  out.gap_report.assign(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t first = rows;
    for (std::size_t t = 0; t < rows; ++t) {
      if (present[t * n + s]) {
        first = t;
        break;
      }
    }
    if (first == rows) {
      throw Error(ErrorKind::NoData, "mote " + std::to_string(mote_ids[s]) + " has no records in range");
    }
    double last = value[first * n + s];
    for (std::size_t t = 0; t < rows; ++t) {
      if (present[t * n + s]) {
        last = value[t * n + s];
      } else {
        ++out.gap_report[s];
      }
      out.matrix(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)) = last;
    }
  }
  return out;
}

std::vector<int> most_correlated_motes(const std::vector<LabRecord>& records,
                                       const std::vector<int>& candidates, std::size_t count,
                                       LabField field, std::int64_t epoch_begin,
                                       std::int64_t epoch_end) {
  if (count < 2 || count > candidates.size()) {
    throw Error(ErrorKind::InvalidConfig, "count: must lie between 2 and the number of candidates");
  }
  std::vector<int> ids = candidates;
  std::sort(ids.begin(), ids.end());
  const AlignedSeries all = align(records, ids, field, epoch_begin, epoch_end);
  const std::size_t m = ids.size();
  Matrix corr(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      const double r = correlation(all.matrix.col(static_cast<Eigen::Index>(i)),
                                   all.matrix.col(static_cast<Eigen::Index>(j)));
      corr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r;
      corr(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = r;
    }
  }
  // Exhaustive search over index subsets in lexicographic order.
  std::vector<std::size_t> pick(count);
  for (std::size_t i = 0; i < count; ++i) pick[i] = i;
  std::vector<std::size_t> best = pick;
  double best_score = -2.0;
  while (true) {
    double score = 0.0;
    for (std::size_t a = 0; a < count; ++a) {
      for (std::size_t b = a + 1; b < count; ++b) {
        score += corr(static_cast<Eigen::Index>(pick[a]), static_cast<Eigen::Index>(pick[b]));
      }
    }
    if (score > best_score) {
      best_score = score;
      best = pick;
    }
    std::size_t k = count;
    while (k > 0 && pick[k - 1] == m - count + k - 1) --k;
    if (k == 0) break;
    ++pick[k - 1];
    for (std::size_t i = k; i < count; ++i) pick[i] = pick[i - 1] + 1;
  }
  std::vector<int> out;
  for (const std::size_t i : best) out.push_back(ids[i]);
  return out;
}

}  // namespace corrdet
