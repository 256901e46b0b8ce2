#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace corrdet {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Reads `key = value` lines in order. Blank lines and `#` comments are skipped.
/// Throws Error(Format) on a line without '='.
KeyValues parse_key_values(std::istream& in);

std::string trim(std::string_view text);

// Field parsers; errors name the field.
double parse_real(std::string_view field, std::string_view text);
std::size_t parse_size(std::string_view field, std::string_view text);
std::uint64_t parse_u64(std::string_view field, std::string_view text);
bool parse_bool(std::string_view field, std::string_view text);

/// Shortest text that reads back to the same double.
std::string format_real(double value);

/// FNV-1a 64-bit hash, rendered as 16 hex digits.
std::string hash_hex(std::string_view text);

}  // namespace corrdet
