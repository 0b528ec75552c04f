#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kgi {

/// ASCII lowercase; bytes outside ASCII pass through untouched.
std::string to_lower(std::string_view s);

std::string_view trim(std::string_view s);

/// Splits on runs of ASCII whitespace.
std::vector<std::string> split_whitespace(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Utterance tokenizer: lowercased runs of letters, digits, apostrophes and
/// non-ASCII bytes. Everything else separates tokens and is dropped.
std::vector<std::string> tokenize(std::string_view text);

/// Camel-case segmentation: "SearchOneWayFlight" -> Search|One|Way|Flight,
/// "GetATMLocation" -> Get|ATM|Location. Digits stay attached to the
/// preceding segment.
std::vector<std::string> split_camel(std::string_view label);

}  // namespace kgi
