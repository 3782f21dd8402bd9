#include "pncoder/prompting.hpp"

#include <atomic>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "pncoder/text.hpp"

namespace pncoder {

using nlohmann::json;
using nlohmann::ordered_json;

void ChainConfig::validate() const {
  if (model_name.empty()) {
    throw ValidationError("chain config needs a model name");
  }
  if (runs < 1) {
    throw ValidationError("chain config: runs must be >= 1, got " + std::to_string(runs));
  }
  if (concurrency_limit < 1) {
    throw ValidationError("chain config: concurrency_limit must be >= 1, got " +
                          std::to_string(concurrency_limit));
  }
  if (max_retries_per_stage < 0) {
    throw ValidationError("chain config: max_retries_per_stage must be >= 0, got " +
                          std::to_string(max_retries_per_stage));
  }
}

namespace {

const char *stage_header(int stage) {
  switch (stage) {
  case 1:
    return detail::kStage1Header;
  case 2:
    return detail::kStage2Header;
  case 3:
    return detail::kStage3Header;
  default:
    throw InvalidStageError("stage must be 1, 2, or 3, got " + std::to_string(stage));
  }
}

const char *stage_steps(int stage) {
  switch (stage) {
  case 1:
    return detail::kStage1Steps;
  case 2:
    return detail::kStage2Steps;
  case 3:
    return detail::kStage3Steps;
  default:
    throw InvalidStageError("stage must be 1, 2, or 3, got " + std::to_string(stage));
  }
}

void check_prior(int stage, const NarrativeDocument &doc, const Codebook &cb,
                 const std::vector<StageOutput> &prior) {
  if (stage == 1) {
    if (!prior.empty()) {
      throw ValidationError("stage 1 takes no prior annotations");
    }
    return;
  }
  if (prior.size() != static_cast<std::size_t>(stage - 1)) {
    throw MissingPriorError("stage " + std::to_string(stage) + " needs annotations from " +
                            std::to_string(stage - 1) + " earlier stage(s), got " +
                            std::to_string(prior.size()));
  }
  for (int s = 1; s < stage; ++s) {
    const StageOutput &p = prior[static_cast<std::size_t>(s - 1)];
    if (p.stage != s) {
      throw MissingPriorError("prior annotations out of order: slot " + std::to_string(s - 1) +
                              " holds stage " + std::to_string(p.stage));
    }
    if (p.records.size() != doc.sentences().size()) {
      throw MissingPriorError("stage " + std::to_string(s) + " prior covers " +
                              std::to_string(p.records.size()) + " sentences, document has " +
                              std::to_string(doc.sentences().size()));
    }
    std::size_t expected = cb.codes_for_stage(s).size();
    for (const StageRecord &r : p.records) {
      if (r.values.size() != expected) {
        throw MissingPriorError("stage " + std::to_string(s) + " prior record " +
                                std::to_string(r.index) + " has " +
                                std::to_string(r.values.size()) + " values, expected " +
                                std::to_string(expected));
      }
    }
  }
}

std::string annotation_suffix(std::size_t row, const Codebook &cb,
                              const std::vector<StageOutput> &prior) {
  std::string out = " [";
  bool first = true;
  for (const StageOutput &p : prior) {
    std::vector<Code> codes = cb.codes_for_stage(p.stage);
    for (std::size_t c = 0; c < codes.size(); ++c) {
      if (!first) {
        out += ' ';
      }
      first = false;
      out += codes[c].id;
      out += '=';
      out += p.records[row].values[c] ? '1' : '0';
    }
  }
  out += ']';
  return out;
}

} // namespace

std::string render_system_prompt(int stage) {
  if (stage < 1 || stage > 3) {
    throw InvalidStageError("stage must be 1, 2, or 3, got " + std::to_string(stage));
  }
  return detail::kSystemPrompt;
}

std::string render_user_prompt(int stage, const NarrativeDocument &doc, const Codebook &cb,
                               const std::vector<StageOutput> &prior) {
  const char *header = stage_header(stage);
  const char *steps = stage_steps(stage);
  check_prior(stage, doc, cb, prior);

  std::string out = header;
  out += '\n';
  std::vector<Code> codes = cb.codes_for_stage(stage);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    out += std::to_string(i + 1);
    out += ". ";
    out += codes[i].display_name;
    out += ": ";
    out += codes[i].definition;
    out += '\n';
  }
  out += "\n**Public Narrative:**\n";
  for (const Sentence &s : doc.sentences()) {
    out += std::to_string(s.index);
    out += ". ";
    out += s.text;
    if (stage > 1) {
      out += annotation_suffix(s.index, cb, prior);
    }
    out += '\n';
  }
  out += "\n**Output Instructions**\n";
  out += steps;
  return out;
}

namespace {

/// End index (inclusive) of the bracket-balanced span opening at `start`,
/// or npos. Skips JSON string literals, including escapes.
std::size_t balanced_end(const std::string &s, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[') {
      ++depth;
    } else if (c == ']') {
      --depth;
      if (depth == 0) {
        return i;
      }
    }
  }
  return std::string::npos;
}

/// All non-overlapping JSON arrays-of-objects in free text. Code fences and
/// prose around them fall away naturally; nested arrays inside one candidate
/// are not counted again.
std::vector<json> array_candidates(const std::string &content) {
  std::vector<json> found;
  std::size_t pos = 0;
  while ((pos = content.find('[', pos)) != std::string::npos) {
    std::size_t end = balanced_end(content, pos);
    if (end == std::string::npos) {
      ++pos;
      continue;
    }
    json j = json::parse(content.begin() + static_cast<std::ptrdiff_t>(pos),
                         content.begin() + static_cast<std::ptrdiff_t>(end) + 1, nullptr, false);
    bool ok = !j.is_discarded() && j.is_array() && !j.empty();
    if (ok) {
      for (const json &el : j) {
        if (!el.is_object()) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      found.push_back(std::move(j));
      pos = end + 1;
    } else {
      ++pos;
    }
  }
  return found;
}

} // namespace

StageOutput parse_stage_response(const std::string &content, int stage,
                                 const NarrativeDocument &doc, const Codebook &cb) {
  stage_header(stage); // validates stage

  std::vector<json> candidates = array_candidates(content);
  if (candidates.empty()) {
    throw StageParseError(StageParseErrorKind::NoJsonFound,
                          "no JSON array of records found in model output");
  }
  if (candidates.size() > 1) {
    throw StageParseError(StageParseErrorKind::MultipleJsonArrays,
                          "model output contains " + std::to_string(candidates.size()) +
                              " candidate JSON arrays; refusing to guess");
  }
  const json &arr = candidates.front();
  const std::vector<Sentence> &sentences = doc.sentences();
  if (arr.size() != sentences.size()) {
    throw StageParseError(StageParseErrorKind::RecordCountMismatch,
                          "model output has " + std::to_string(arr.size()) + " records for " +
                              std::to_string(sentences.size()) + " sentences");
  }

  std::vector<Code> codes = cb.codes_for_stage(stage);
  StageOutput out;
  out.stage = stage;
  out.raw_response = content;
  out.records.reserve(sentences.size());

  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const json &rec = arr[i];
    if (rec.contains("index")) {
      const json &idx = rec["index"];
      if (!idx.is_number_integer() ||
          idx.get<long long>() != static_cast<long long>(i)) {
        throw StageParseError(StageParseErrorKind::IndexMismatch,
                              "record " + std::to_string(i) + " carries index " + idx.dump(), i);
      }
    }
    if (!rec.contains("text") || !rec["text"].is_string()) {
      throw StageParseError(StageParseErrorKind::SentenceTextMismatch,
                            "record " + std::to_string(i) + " has no text field", i);
    }
    std::string text = text::normalize_whitespace(text::nfc(rec["text"].get<std::string>()));
    if (text != sentences[i].text) {
      throw StageParseError(StageParseErrorKind::SentenceTextMismatch,
                            "record " + std::to_string(i) + " text was edited: \"" + text +
                                "\" vs \"" + sentences[i].text + "\"",
                            i);
    }

    StageRecord r;
    r.index = i;
    r.text = sentences[i].text;
    r.values.reserve(codes.size());
    for (const Code &code : codes) {
      if (!rec.contains(code.id)) {
        throw StageParseError(StageParseErrorKind::MissingCodeField,
                              "record " + std::to_string(i) + " is missing field \"" + code.id +
                                  "\"",
                              i, code.id);
      }
      const json &v = rec[code.id];
      long long value = -1;
      if (v.is_number_integer() || v.is_number_unsigned()) {
        value = v.get<long long>();
      }
      if (value != 0 && value != 1) {
        throw StageParseError(StageParseErrorKind::NonBinaryValue,
                              "record " + std::to_string(i) + " field \"" + code.id +
                                  "\" is not 0/1: " + v.dump(),
                              i, code.id);
      }
      r.values.push_back(static_cast<std::uint8_t>(value));
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

std::string stage_output_to_json(const StageOutput &out, const Codebook &cb) {
  std::vector<Code> codes = cb.codes_for_stage(out.stage);
  ordered_json arr = ordered_json::array();
  for (const StageRecord &r : out.records) {
    ordered_json rec;
    rec["index"] = r.index;
    rec["text"] = r.text;
    for (std::size_t c = 0; c < codes.size(); ++c) {
      rec[codes[c].id] = static_cast<int>(r.values[c]);
    }
    arr.push_back(std::move(rec));
  }
  return arr.dump(2);
}

AnnotationMatrix assemble_matrix(const std::vector<StageOutput> &stages,
                                 const NarrativeDocument &doc, const Codebook &cb,
                                 const AnnotatorId &annotator) {
  if (stages.size() != 3) {
    throw ValidationError("matrix assembly needs all three stage outputs, got " +
                          std::to_string(stages.size()));
  }
  AnnotationMatrix m(doc.id(), cb.version(), annotator, doc.sentences().size(), cb.size());
  for (int s = 1; s <= 3; ++s) {
    const StageOutput &out = stages[static_cast<std::size_t>(s - 1)];
    if (out.stage != s) {
      throw ValidationError("stage outputs out of order: slot " + std::to_string(s - 1) +
                            " holds stage " + std::to_string(out.stage));
    }
    if (out.records.size() != doc.sentences().size()) {
      throw AlignmentError("stage " + std::to_string(s) + " covers " +
                           std::to_string(out.records.size()) + " sentences, document has " +
                           std::to_string(doc.sentences().size()));
    }
    std::vector<Code> codes = cb.codes_for_stage(s);
    for (std::size_t c = 0; c < codes.size(); ++c) {
      std::size_t col = *cb.index_of(codes[c].id);
      for (std::size_t row = 0; row < out.records.size(); ++row) {
        m.set_cell(row, col, out.records[row].values[c]);
      }
    }
  }
  return m;
}

ChainResult run_chain(ChatProvider &provider, const NarrativeDocument &doc, const Codebook &cb,
                      const ChainConfig &config, int run_index) {
  config.validate();
  std::string system_prompt = render_system_prompt(1);
  std::vector<StageOutput> stages;
  std::vector<AuditRecord> audit;

  for (int stage = 1; stage <= 3; ++stage) {
    std::string user_prompt = render_user_prompt(stage, doc, cb, stages);
    ProviderRequest request{system_prompt, user_prompt, config.model_name};

    std::optional<StageOutput> parsed;
    std::string last_error;
    for (int attempt = 0; attempt <= config.max_retries_per_stage; ++attempt) {
      AuditRecord rec;
      rec.narrative_id = doc.id();
      rec.run_index = run_index;
      rec.stage = stage;
      rec.attempt = attempt;
      rec.model_name = config.model_name;
      rec.system_prompt = system_prompt;
      rec.user_prompt = user_prompt;
      rec.timestamp = std::chrono::system_clock::now();

      ProviderResponse response;
      try {
        response = provider.complete(request);
      } catch (const Error &e) {
        rec.error = e.what();
        audit.push_back(std::move(rec));
        // Transport/auth failures already exhausted the provider's own retry
        // budget; parse retries do not apply to them.
        throw;
      }
      rec.response_content = response.content;
      rec.finish_reason = response.finish_reason;
      rec.prompt_tokens = response.prompt_tokens;
      rec.completion_tokens = response.completion_tokens;

      try {
        parsed = parse_stage_response(response.content, stage, doc, cb);
      } catch (const StageParseError &e) {
        last_error = e.what();
        rec.error = e.what();
      }
      audit.push_back(std::move(rec));
      if (parsed) {
        break;
      }
    }
    if (!parsed) {
      throw StageFailedError(stage, last_error);
    }
    stages.push_back(std::move(*parsed));
  }

  AnnotatorId annotator =
      AnnotatorId::model_run(config.model_name, run_index, config.prompt_variant);
  AnnotationMatrix matrix = assemble_matrix(stages, doc, cb, annotator);
  return ChainResult{std::move(matrix), std::move(stages), std::move(audit)};
}

namespace {

std::string run_transcript(const ChainResult &result) {
  std::string out;
  for (const StageOutput &s : result.stages) {
    ordered_json line;
    line["stage"] = s.stage;
    line["content"] = s.raw_response;
    out += line.dump();
    out += '\n';
  }
  return out;
}

} // namespace

RunManyResult run_many(ChatProvider &provider, const NarrativeDocument &doc, const Codebook &cb,
                       const ChainConfig &config) {
  config.validate();
  const int n = config.runs;
  std::vector<std::optional<ChainResult>> results(static_cast<std::size_t>(n));
  std::vector<std::optional<RunFailure>> failures(static_cast<std::size_t>(n));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) {
        return;
      }
      try {
        results[static_cast<std::size_t>(i)] = run_chain(provider, doc, cb, config, i);
      } catch (const std::exception &e) {
        failures[static_cast<std::size_t>(i)] = RunFailure{i, e.what()};
      }
    }
  };

  int workers = std::min(config.concurrency_limit, n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
      threads.emplace_back(worker);
    }
    for (std::thread &t : threads) {
      t.join();
    }
  }

  RunManyResult out;
  out.runs.narrative_id = doc.id();
  for (int i = 0; i < n; ++i) {
    std::optional<ChainResult> &r = results[static_cast<std::size_t>(i)];
    if (r) {
      out.runs.raw_transcripts.push_back(run_transcript(*r));
      for (AuditRecord &rec : r->audit) {
        out.audit.push_back(std::move(rec));
      }
      out.runs.runs.push_back(std::move(r->matrix));
    } else {
      out.failures.push_back(*failures[static_cast<std::size_t>(i)]);
    }
  }
  if (out.runs.runs.empty()) {
    std::string msg = "all " + std::to_string(n) + " runs failed; first error: " +
                      out.failures.front().message;
    throw AllRunsFailedError(msg);
  }
  out.runs.validate();
  return out;
}

} // namespace pncoder
