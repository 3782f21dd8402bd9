#include "pncoder/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pncoder/errors.hpp"
#include "pncoder/text.hpp"

namespace pncoder {

namespace {

// Words before a '.' that do not end a sentence (compared case-insensitively).
constexpr std::array<std::string_view, 13> kAbbreviations = {
    "mr", "mrs", "ms", "dr", "prof", "st", "vs", "etc", "e.g", "i.e", "u.s", "a.m", "p.m"};

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

// Closing quote/bracket bytes that may trail a terminator. Multi-byte UTF-8
// closers (right double/single quotation marks) are matched as sequences.
std::size_t skip_closers(std::string_view s, std::size_t pos) {
  while (pos < s.size()) {
    char c = s[pos];
    if (c == '"' || c == '\'' || c == ')' || c == ']') {
      ++pos;
      continue;
    }
    if (s.compare(pos, 3, "\xe2\x80\x9d") == 0 || s.compare(pos, 3, "\xe2\x80\x99") == 0) {
      pos += 3;
      continue;
    }
    break;
  }
  return pos;
}

bool is_opening_quote_at(std::string_view s, std::size_t pos) {
  if (pos >= s.size()) {
    return false;
  }
  char c = s[pos];
  if (c == '"' || c == '\'' || c == '(' || c == '[') {
    return true;
  }
  return s.compare(pos, 3, "\xe2\x80\x9c") == 0 || s.compare(pos, 3, "\xe2\x80\x98") == 0;
}

bool starts_new_sentence_at(std::string_view s, std::size_t pos) {
  if (pos >= s.size()) {
    return false;
  }
  unsigned char c = static_cast<unsigned char>(s[pos]);
  return std::isupper(c) || std::isdigit(c) || is_opening_quote_at(s, pos);
}

bool iequal(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

// The word immediately preceding position `dot` (letters and internal dots).
std::string_view word_before(std::string_view s, std::size_t dot) {
  std::size_t begin = dot;
  while (begin > 0) {
    char c = s[begin - 1];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '.') {
      --begin;
    } else {
      break;
    }
  }
  return s.substr(begin, dot - begin);
}

bool is_abbreviation(std::string_view word) {
  return std::any_of(kAbbreviations.begin(), kAbbreviations.end(),
                     [&](std::string_view abbr) { return iequal(word, abbr); });
}

void append_sentences(std::string_view paragraph, std::vector<Sentence> &out) {
  std::size_t start = 0;
  std::size_t pos = 0;
  auto flush = [&](std::size_t end) {
    std::string sentence = text::normalize_whitespace(paragraph.substr(start, end - start));
    if (!sentence.empty()) {
      out.push_back({out.size(), std::move(sentence)});
    }
    start = end;
  };
  while (pos < paragraph.size()) {
    char c = paragraph[pos];
    if (!is_terminator(c)) {
      ++pos;
      continue;
    }
    if (c == '.') {
      bool digit_before = pos > 0 && std::isdigit(static_cast<unsigned char>(paragraph[pos - 1]));
      bool digit_after =
          pos + 1 < paragraph.size() && std::isdigit(static_cast<unsigned char>(paragraph[pos + 1]));
      if (digit_before && digit_after) { // decimal point
        ++pos;
        continue;
      }
      if (is_abbreviation(word_before(paragraph, pos))) {
        ++pos;
        continue;
      }
    }
    std::size_t end = skip_closers(paragraph, pos + 1);
    if (end >= paragraph.size()) {
      ++pos;
      continue;
    }
    if (!text::is_ascii_space(paragraph[end])) {
      ++pos;
      continue;
    }
    std::size_t next = end;
    while (next < paragraph.size() && text::is_ascii_space(paragraph[next])) {
      ++next;
    }
    if (!starts_new_sentence_at(paragraph, next)) {
      ++pos;
      continue;
    }
    flush(end);
    pos = next;
    start = next;
  }
  flush(paragraph.size());
}

} // namespace

std::vector<Sentence> segment_sentences(std::string_view utf8_text) {
  std::string normalized = text::nfc(utf8_text);
  std::vector<Sentence> sentences;
  // Paragraph breaks (a line of only whitespace) are hard boundaries.
  std::size_t start = 0;
  std::size_t pos = 0;
  std::string_view body = normalized;
  while (pos < body.size()) {
    if (body[pos] == '\n') {
      std::size_t scan = pos + 1;
      while (scan < body.size() && (body[scan] == ' ' || body[scan] == '\t' || body[scan] == '\r')) {
        ++scan;
      }
      if (scan < body.size() && body[scan] == '\n') {
        append_sentences(body.substr(start, pos - start), sentences);
        while (scan < body.size() && text::is_ascii_space(body[scan])) {
          ++scan;
        }
        start = pos = scan;
        continue;
      }
    }
    ++pos;
  }
  append_sentences(body.substr(start), sentences);
  return sentences;
}

NarrativeDocument::NarrativeDocument(std::string id, std::vector<Sentence> sentences,
                                     std::optional<std::string> title,
                                     std::optional<std::string> source)
    : id_(std::move(id)), title_(std::move(title)), source_(std::move(source)),
      sentences_(std::move(sentences)) {
  if (id_.empty()) {
    throw ValidationError("narrative id must be non-empty");
  }
  if (sentences_.empty()) {
    throw EmptyDocumentError("narrative \"" + id_ + "\" has no sentences");
  }
  for (std::size_t i = 0; i < sentences_.size(); ++i) {
    if (sentences_[i].index != i) {
      throw ValidationError("sentence indices must be contiguous from 0; record " +
                            std::to_string(i) + " has index " +
                            std::to_string(sentences_[i].index));
    }
    const std::string &t = sentences_[i].text;
    if (t.empty()) {
      throw ValidationError("sentence " + std::to_string(i) + " is empty");
    }
    if (text::is_ascii_space(t.front()) || text::is_ascii_space(t.back())) {
      throw ValidationError("sentence " + std::to_string(i) +
                            " has leading or trailing whitespace");
    }
  }
}

NarrativeDocument document_from_text(std::string id, std::string_view utf8_text) {
  return NarrativeDocument(std::move(id), segment_sentences(utf8_text));
}

NarrativeDocument parse_segmented(std::string_view content, std::string fallback_id) {
  std::string id = std::move(fallback_id);
  std::optional<std::string> title;
  std::optional<std::string> source;
  std::vector<Sentence> sentences;

  std::istringstream lines{std::string(content)};
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(lines, line)) {
    ++lineno;
    if (text::trim(line).empty()) {
      continue;
    }
    nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      throw ParseError("line " + std::to_string(lineno) + ": not a JSON object record");
    }
    if (first && !record.contains("index")) {
      // Leading metadata record.
      if (record.contains("id") && record["id"].is_string()) {
        id = record["id"].get<std::string>();
      }
      if (record.contains("title") && record["title"].is_string()) {
        title = record["title"].get<std::string>();
      }
      if (record.contains("source") && record["source"].is_string()) {
        source = record["source"].get<std::string>();
      }
      first = false;
      continue;
    }
    first = false;
    if (!record.contains("index") || !record["index"].is_number_integer() ||
        !record.contains("text") || !record["text"].is_string()) {
      throw ParseError("line " + std::to_string(lineno) +
                       ": sentence record needs integer \"index\" and string \"text\"");
    }
    long long index = record["index"].get<long long>();
    if (index < 0 || static_cast<std::size_t>(index) != sentences.size()) {
      throw ParseError("line " + std::to_string(lineno) + ": non-contiguous sentence index " +
                       std::to_string(index) + " (expected " +
                       std::to_string(sentences.size()) + ")");
    }
    sentences.push_back({sentences.size(), record["text"].get<std::string>()});
  }
  if (sentences.empty()) {
    throw EmptyDocumentError("segmented narrative contains no sentence records");
  }
  return NarrativeDocument(std::move(id), std::move(sentences), std::move(title),
                           std::move(source));
}

namespace {

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

} // namespace

NarrativeDocument load_narrative(const std::filesystem::path &path, NarrativeFormat format) {
  std::string content = read_file(path);
  if (format == NarrativeFormat::Auto) {
    std::string ext = path.extension().string();
    format = (ext == ".jsonl" || ext == ".ndjson") ? NarrativeFormat::Segmented
                                                   : NarrativeFormat::RawText;
  }
  std::string stem = path.stem().string();
  if (stem.empty()) {
    stem = "narrative";
  }
  if (format == NarrativeFormat::Segmented) {
    return parse_segmented(content, std::move(stem));
  }
  if (text::trim(content).empty()) {
    throw EmptyDocumentError("file is empty: " + path.string());
  }
  return document_from_text(std::move(stem), content);
}

std::string narrative_to_jsonl(const NarrativeDocument &doc) {
  std::string out;
  nlohmann::ordered_json meta;
  meta["id"] = doc.id();
  if (doc.title()) {
    meta["title"] = *doc.title();
  }
  if (doc.source()) {
    meta["source"] = *doc.source();
  }
  out += meta.dump() + "\n";
  for (const Sentence &s : doc.sentences()) {
    nlohmann::ordered_json record;
    record["index"] = s.index;
    record["text"] = s.text;
    out += record.dump() + "\n";
  }
  return out;
}

void save_narrative(const NarrativeDocument &doc, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write file: " + path.string());
  }
  out << narrative_to_jsonl(doc);
  if (!out) {
    throw IoError("failed writing file: " + path.string());
  }
}

} // namespace pncoder
