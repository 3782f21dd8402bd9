#include "pncoder/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <array>
#include <cctype>
#include <charconv>
#include <system_error>

#include "pncoder/errors.hpp"

namespace pncoder::text {

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string nfc(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2 *normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error("unicode normalizer unavailable");
  }
  icu::UnicodeString input =
      icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int>(utf8.size())));
  icu::UnicodeString normalized = normalizer->normalize(input, status);
  if (U_FAILURE(status)) {
    throw ParseError("input is not valid UTF-8");
  }
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_ascii_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return out;
}

bool ws_equal(std::string_view a, std::string_view b) {
  return normalize_whitespace(a) == normalize_whitespace(b);
}

std::string trim(std::string_view s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && is_ascii_space(s[begin])) {
    ++begin;
  }
  while (end > begin && is_ascii_space(s[end - 1])) {
    --end;
  }
  return std::string(s.substr(begin, end - begin));
}

std::vector<std::string> word_tokens(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : s) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc) || c == '\'') {
      current.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) {
    tokens.push_back(std::move(current));
  }
  return tokens;
}

std::string format_fixed(double value, int decimals) {
  std::array<char, 64> buf;
  std::to_chars_result res =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed,
                    decimals);
  if (res.ec != std::errc()) {
    throw Error("number does not fit fixed-point formatting");
  }
  std::string out(buf.data(), res.ptr);
  if (out == "-0" || out.rfind("-0.", 0) == 0) {
    // Collapse negative zero so equal values always print identically.
    bool all_zero = true;
    for (char c : out) {
      if (c != '-' && c != '0' && c != '.') {
        all_zero = false;
        break;
      }
    }
    if (all_zero) {
      out.erase(0, 1);
    }
  }
  return out;
}

} // namespace pncoder::text
