#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pncoder/annotation.hpp"
#include "pncoder/codebook.hpp"
#include "pncoder/corpus.hpp"
#include "pncoder/errors.hpp"
#include "pncoder/provider.hpp"

namespace pncoder {

namespace detail {
// Frozen prompt template text; fixture tests pin these byte-for-byte
// (including the source text's own typos, which are preserved verbatim).
extern const char *const kSystemPrompt;
extern const char *const kStage1Header;
extern const char *const kStage2Header;
extern const char *const kStage3Header;
extern const char *const kStage1Steps;
extern const char *const kStage2Steps;
extern const char *const kStage3Steps;
} // namespace detail

struct ChainConfig {
  std::string model_name;
  int runs = 3;
  int max_retries_per_stage = 2;
  std::chrono::milliseconds request_timeout{60000};
  int concurrency_limit = 4;
  std::string prompt_variant = "cot-chain";

  void validate() const; // runs >= 1, concurrency_limit >= 1, retries >= 0, model named
};

/// One sentence's labels for a single stage, in that stage's code order.
struct StageRecord {
  std::size_t index = 0;
  std::string text;
  std::vector<std::uint8_t> values;

  bool operator==(const StageRecord &) const = default;
};

/// Parsed output of one stage over a whole narrative.
struct StageOutput {
  int stage = 0;
  std::vector<StageRecord> records; // one per sentence, in order
  std::string raw_response;         // verbatim model text, for audit

  bool operator==(const StageOutput &) const = default;
};

enum class StageParseErrorKind {
  NoJsonFound,
  MultipleJsonArrays,
  RecordCountMismatch,
  IndexMismatch,
  SentenceTextMismatch,
  MissingCodeField,
  NonBinaryValue,
};

class StageParseError : public Error {
public:
  StageParseError(StageParseErrorKind kind, const std::string &message,
                  std::optional<std::size_t> sentence_index = std::nullopt,
                  std::string code_id = "")
      : Error(message), kind_(kind), sentence_index_(sentence_index),
        code_id_(std::move(code_id)) {}

  StageParseErrorKind kind() const { return kind_; }
  std::optional<std::size_t> sentence_index() const { return sentence_index_; }
  const std::string &code_id() const { return code_id_; }

private:
  StageParseErrorKind kind_;
  std::optional<std::size_t> sentence_index_;
  std::string code_id_;
};

/// Stage 2/3 prompt requested without the earlier stages' annotations.
class MissingPriorError : public Error {
public:
  using Error::Error;
};

/// A stage kept failing to parse after its retry budget.
class StageFailedError : public Error {
public:
  StageFailedError(int stage, const std::string &last_error)
      : Error("stage " + std::to_string(stage) + " failed after retries: " + last_error),
        stage_(stage), last_error_(last_error) {}

  int stage() const { return stage_; }
  const std::string &last_error() const { return last_error_; }

private:
  int stage_;
  std::string last_error_;
};

class AllRunsFailedError : public Error {
public:
  using Error::Error;
};

/// One request/response pair, recorded verbatim.
struct AuditRecord {
  std::string narrative_id;
  int run_index = 0;
  int stage = 0;
  int attempt = 0; // 0 = first try
  std::string model_name;
  std::string system_prompt;
  std::string user_prompt;
  std::string response_content;
  std::string finish_reason;
  std::optional<long long> prompt_tokens;
  std::optional<long long> completion_tokens;
  std::optional<std::chrono::system_clock::time_point> timestamp;
  std::string error; // empty on success
};

// --- prompt construction ----------------------------------------------------

/// The shared system prompt; identical bytes for all three stages.
std::string render_system_prompt(int stage);

/// The stage's user prompt: code definitions, the narrative one sentence per
/// line as "<index>. <text>", and the output instructions. Stages 2 and 3
/// suffix each sentence line with the accumulated earlier-stage annotations
/// as " [self=0 us=1 now=0 ...]".
std::string render_user_prompt(int stage, const NarrativeDocument &doc, const Codebook &cb,
                               const std::vector<StageOutput> &prior = {});

// --- response parsing -------------------------------------------------------

/// Extracts the single candidate JSON array-of-objects from model text
/// (tolerating code fences and surrounding prose), then validates one record
/// per sentence in order: texts equal the narrative's under NFC + whitespace
/// normalization, and every one of the stage's code fields present with a
/// 0/1 value. Extra non-code fields are ignored.
StageOutput parse_stage_response(const std::string &content, int stage,
                                 const NarrativeDocument &doc, const Codebook &cb);

/// Serializes a StageOutput back to the JSON array shape the stages emit.
std::string stage_output_to_json(const StageOutput &out, const Codebook &cb);

/// Combines the three stage outputs into one full-width matrix.
AnnotationMatrix assemble_matrix(const std::vector<StageOutput> &stages,
                                 const NarrativeDocument &doc, const Codebook &cb,
                                 const AnnotatorId &annotator);

// --- chain execution --------------------------------------------------------

struct ChainResult {
  AnnotationMatrix matrix;
  std::vector<StageOutput> stages;
  std::vector<AuditRecord> audit;
};

/// Runs stages 1, 2, 3 in order, feeding each stage's annotations into the
/// next prompt.
/// Parse failures retry the stage with the identical prompt up to
/// config.max_retries_per_stage; exhaustion throws StageFailedError.
/// Provider errors propagate as-is (transport retries live in the provider).
ChainResult run_chain(ChatProvider &provider, const NarrativeDocument &doc, const Codebook &cb,
                      const ChainConfig &config, int run_index = 0);

struct RunFailure {
  int run_index = 0;
  std::string message;
};

struct RunManyResult {
  RunSet runs;                     // successful runs, ordered by run_index
  std::vector<AuditRecord> audit;  // all attempts, ordered by (run_index, stage, attempt)
  std::vector<RunFailure> failures;

  bool partial() const { return !failures.empty(); }
};

/// Executes config.runs independent chains, up to config.concurrency_limit
/// in flight. Per-run failures are collected, not fatal, unless every run
/// fails (AllRunsFailedError).
RunManyResult run_many(ChatProvider &provider, const NarrativeDocument &doc, const Codebook &cb,
                       const ChainConfig &config);

} // namespace pncoder
