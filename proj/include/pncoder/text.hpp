#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pncoder::text {

/// Unicode NFC normalization (canonical composition) of a UTF-8 string.
std::string nfc(std::string_view utf8);

/// Collapses runs of ASCII whitespace to a single space and trims both ends.
std::string normalize_whitespace(std::string_view s);

/// normalize_whitespace equality.
bool ws_equal(std::string_view a, std::string_view b);

std::string trim(std::string_view s);

/// Lowercased alphanumeric-or-apostrophe token runs, in order of appearance.
std::vector<std::string> word_tokens(std::string_view s);

bool is_ascii_space(char c);

/// Fixed-point decimal rendering ("0.8400" for decimals=4), identical bytes
/// on every platform. Used for all CSV and SVG numeric output.
std::string format_fixed(double value, int decimals);

} // namespace pncoder::text
