#include "corrdet/textio.hpp"

#include <charconv>
#include <cstdio>
#include <istream>

#include "corrdet/error.hpp"

namespace corrdet {

namespace {

[[noreturn]] void bad_field(std::string_view field, std::string_view text, const char* what) {
  throw Error(ErrorKind::InvalidConfig,
              std::string(field) + ": " + what + " (got '" + std::string(text) + "')");
}

}  // namespace

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

KeyValues parse_key_values(std::istream& in) {
  KeyValues out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Format, "line " + std::to_string(lineno) + ": expected key = value");
    }
    out.emplace_back(trim(std::string_view(body).substr(0, eq)),
                     trim(std::string_view(body).substr(eq + 1)));
  }
  return out;
}

double parse_real(std::string_view field, std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) bad_field(field, text, "expected a number");
  return v;
}

std::uint64_t parse_u64(std::string_view field, std::string_view text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    bad_field(field, text, "expected a non-negative integer");
  }
  return v;
}

std::size_t parse_size(std::string_view field, std::string_view text) {
  return static_cast<std::size_t>(parse_u64(field, text));
}

bool parse_bool(std::string_view field, std::string_view text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  bad_field(field, text, "expected true or false");
}

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) return std::to_string(value);
  return std::string(buf, ptr);
}

std::string hash_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace corrdet
