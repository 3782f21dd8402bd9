#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pncoder {

struct Sentence {
  std::size_t index = 0; // zero-based, contiguous in document order
  std::string text;      // trimmed, internal whitespace collapsed

  bool operator==(const Sentence &) const = default;
};

/// An ordered, immutable list of segmented sentences. All annotation matrices
/// refer to these sentence indices.
class NarrativeDocument {
public:
  NarrativeDocument(std::string id, std::vector<Sentence> sentences,
                    std::optional<std::string> title = std::nullopt,
                    std::optional<std::string> source = std::nullopt);

  const std::string &id() const { return id_; }
  const std::optional<std::string> &title() const { return title_; }
  const std::optional<std::string> &source() const { return source_; }
  const std::vector<Sentence> &sentences() const { return sentences_; }
  std::size_t size() const { return sentences_.size(); }

  bool operator==(const NarrativeDocument &) const = default;

private:
  std::string id_;
  std::optional<std::string> title_;
  std::optional<std::string> source_;
  std::vector<Sentence> sentences_;
};

/// Deterministic rule-based sentence segmentation.
///
/// The input is NFC-normalized first. A paragraph break (a blank line) is a
/// hard sentence boundary. Within a paragraph, a sentence ends after '.',
/// '!', or '?' (plus any closing quotes/brackets) when the terminator is
/// followed by whitespace and then an uppercase ASCII letter, a digit, or an
/// opening quote. A '.' does not end a sentence when the preceding word is a
/// known abbreviation (Mr, Mrs, Ms, Dr, Prof, St, vs, etc, e.g, i.e, U.S,
/// a.m, p.m; matched case-insensitively) or when it sits between two digits.
/// Sentence texts are trimmed and internal whitespace runs are collapsed to
/// single spaces; no non-whitespace character is dropped or altered.
std::vector<Sentence> segment_sentences(std::string_view utf8_text);

enum class NarrativeFormat {
  Auto,      // by extension: .jsonl/.ndjson pre-segmented, else raw text
  RawText,   // plain .txt, segmented on load
  Segmented  // line-delimited JSON records {"index": n, "text": "..."}
};

/// Loads a narrative. Pre-segmented input is taken verbatim (no
/// re-segmentation) so that externally fixed sentence units survive exactly.
NarrativeDocument load_narrative(const std::filesystem::path &path,
                                 NarrativeFormat format = NarrativeFormat::Auto);

/// Builds a document by segmenting raw text.
NarrativeDocument document_from_text(std::string id, std::string_view utf8_text);

/// Parses the pre-segmented line-delimited record format.
NarrativeDocument parse_segmented(std::string_view content, std::string fallback_id);

std::string narrative_to_jsonl(const NarrativeDocument &doc);
void save_narrative(const NarrativeDocument &doc, const std::filesystem::path &path);

} // namespace pncoder
