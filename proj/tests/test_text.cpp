#include <doctest.h>

#include "pncoder/text.hpp"

using namespace pncoder::text;

TEST_CASE("nfc composes decomposed sequences") {
  // "e" + combining acute accent composes to a single code point.
  CHECK(nfc("cafe\xCC\x81") == "caf\xC3\xA9");
  CHECK(nfc("caf\xC3\xA9") == "caf\xC3\xA9");
  CHECK(nfc("") == "");
  CHECK(nfc("plain ascii 123") == "plain ascii 123");
}

TEST_CASE("nfc is idempotent") {
  std::string mixed = "A\xCC\x8A ngstro\xCC\x88m \xE2\x80\x94 3.5";
  std::string once = nfc(mixed);
  CHECK(nfc(once) == once);
}

TEST_CASE("normalize_whitespace collapses and trims") {
  CHECK(normalize_whitespace("  a   b\tc \n d  ") == "a b c d");
  CHECK(normalize_whitespace("") == "");
  CHECK(normalize_whitespace(" \t\n ") == "");
  CHECK(normalize_whitespace("single") == "single");
}

TEST_CASE("ws_equal ignores whitespace differences only") {
  CHECK(ws_equal("a  b", "a b"));
  CHECK(ws_equal(" a b ", "a\tb"));
  CHECK_FALSE(ws_equal("a b", "a c"));
  CHECK_FALSE(ws_equal("ab", "a b"));
}

TEST_CASE("trim strips both ends") {
  CHECK(trim("  x  ") == "x");
  CHECK(trim("x") == "x");
  CHECK(trim("   ") == "");
}

TEST_CASE("word_tokens lowercases and keeps apostrophes inside tokens") {
  CHECK(word_tokens("I'm here, NOW!") == std::vector<std::string>{"i'm", "here", "now"});
  CHECK(word_tokens("We decided.") == std::vector<std::string>{"we", "decided"});
  CHECK(word_tokens("") == std::vector<std::string>{});
  CHECK(word_tokens("a-b c_d") == std::vector<std::string>{"a", "b", "c", "d"});
  CHECK(word_tokens("3.5 points") == std::vector<std::string>{"3", "5", "points"});
}

TEST_CASE("is_ascii_space covers the usual suspects") {
  CHECK(is_ascii_space(' '));
  CHECK(is_ascii_space('\t'));
  CHECK(is_ascii_space('\n'));
  CHECK(is_ascii_space('\r'));
  CHECK_FALSE(is_ascii_space('x'));
  CHECK_FALSE(is_ascii_space('0'));
}

TEST_CASE("format_fixed renders stable decimals") {
  CHECK(format_fixed(0.84, 4) == "0.8400");
  CHECK(format_fixed(0.0, 4) == "0.0000");
  CHECK(format_fixed(-0.5, 4) == "-0.5000");
  CHECK(format_fixed(1.0, 2) == "1.00");
  CHECK(format_fixed(48.61, 2) == "48.61");
  CHECK(format_fixed(2.0 / 3.0, 4) == "0.6667");
  CHECK(format_fixed(123.0, 0) == "123");
}

TEST_CASE("format_fixed never emits negative zero") {
  CHECK(format_fixed(-0.0, 4) == "0.0000");
  CHECK(format_fixed(-1e-9, 4) == "0.0000");
}
