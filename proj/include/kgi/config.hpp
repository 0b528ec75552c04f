#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kgi {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// `key = value` lines; blank lines and '#' comments are skipped. Keys keep
/// file order. Throws ParseError for lines without '=' or with an empty key.
KeyValues parse_key_values(std::istream& in);
KeyValues load_key_values(const std::string& path);

/// Strict value parsers; each throws Error(kConfiguration) naming `key`.
std::size_t parse_size(std::string_view key, std::string_view value);
std::uint64_t parse_u64(std::string_view key, std::string_view value);
double parse_real(std::string_view key, std::string_view value);
/// true/false, yes/no, 1/0, on/off.
bool parse_flag(std::string_view key, std::string_view value);

/// Shortest decimal form that reads back to the same double.
std::string format_real(double v);

}  // namespace kgi
