#include <array>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pncoder/prompting.hpp"
#include "pncoder/provider.hpp"
#include "pncoder/text.hpp"

namespace pncoder {

namespace {

using nlohmann::ordered_json;

struct KeywordRule {
  std::string_view code_id;
  std::vector<std::string_view> tokens;
};

// Token-level triggers, matched case-insensitively against word_tokens of the
// sentence. A code fires iff any of its trigger tokens appears.
const std::array<std::vector<KeywordRule>, 3> kStageRules = {{
    {
        {"self", {"i", "my", "me"}},
        {"us", {"we", "us", "our", "together"}},
        {"now", {"now", "today", "tonight"}},
    },
    {
        {"challenge", {"struggle", "problem", "hard", "crisis"}},
        {"choice", {"decided", "chose", "choice"}},
        {"outcome", {"result", "became", "finally"}},
    },
    {
        {"story_details", {"remember", "morning", "night", "saw"}},
        {"hope", {"hope", "believe", "possible"}},
        {"values", {"justice", "dignity", "values", "fairness"}},
        {"vulnerability", {"afraid", "scared", "failed", "alone"}},
        {"urgency", {"urgent", "immediately", "cannot"}},
        {"call_to_action", {"join", "act", "must"}},
        {"dream", {"dream", "imagine", "vision"}},
        {"nightmare", {"nightmare", "disaster", "lose"}},
    },
}};

int stage_from_prompt(const std::string &user_prompt) {
  const std::array<const char *, 3> headers = {detail::kStage1Header, detail::kStage2Header,
                                               detail::kStage3Header};
  for (int s = 1; s <= 3; ++s) {
    std::string_view header = headers[static_cast<std::size_t>(s - 1)];
    if (user_prompt.size() > header.size() &&
        std::string_view(user_prompt).substr(0, header.size()) == header) {
      return s;
    }
  }
  throw UnrecognizedPromptError("user prompt does not start with a known stage header");
}

struct MockSentence {
  std::size_t index;
  std::string text;
};

/// True when `s` looks like the accumulated-annotation suffix body, i.e.
/// "id=0 id=1 ..." with ids of lowercase/underscore form.
bool is_annotation_body(std::string_view s) {
  if (s.empty()) {
    return false;
  }
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t id_len = 0;
    while (pos + id_len < s.size() &&
           (s[pos + id_len] == '_' || (s[pos + id_len] >= 'a' && s[pos + id_len] <= 'z'))) {
      ++id_len;
    }
    if (id_len == 0 || pos + id_len >= s.size() || s[pos + id_len] != '=') {
      return false;
    }
    pos += id_len + 1;
    if (pos >= s.size() || (s[pos] != '0' && s[pos] != '1')) {
      return false;
    }
    ++pos;
    if (pos == s.size()) {
      return true;
    }
    if (s[pos] != ' ') {
      return false;
    }
    ++pos;
  }
  return false;
}

std::vector<MockSentence> narrative_from_prompt(const std::string &user_prompt, int stage) {
  const std::string begin_marker = "\n**Public Narrative:**\n";
  const std::string end_marker = "\n\n**Output Instructions**\n";
  std::size_t begin = user_prompt.find(begin_marker);
  if (begin == std::string::npos) {
    throw UnrecognizedPromptError("user prompt has no narrative block");
  }
  begin += begin_marker.size();
  std::size_t end = user_prompt.find(end_marker, begin);
  if (end == std::string::npos || end < begin) {
    throw UnrecognizedPromptError("user prompt has no output instructions after the narrative");
  }

  std::vector<MockSentence> sentences;
  std::size_t line_start = begin;
  while (line_start < end) {
    std::size_t line_end = user_prompt.find('\n', line_start);
    if (line_end == std::string::npos || line_end > end) {
      line_end = end;
    }
    std::string_view line(user_prompt.data() + line_start, line_end - line_start);
    line_start = line_end + 1;

    std::size_t digits = 0;
    while (digits < line.size() && line[digits] >= '0' && line[digits] <= '9') {
      ++digits;
    }
    if (digits == 0 || line.substr(digits, 2) != ". ") {
      throw UnrecognizedPromptError("narrative line is not \"<index>. <text>\": \"" +
                                    std::string(line) + "\"");
    }
    MockSentence s;
    s.index = std::stoull(std::string(line.substr(0, digits)));
    std::string_view body = line.substr(digits + 2);

    if (stage > 1) {
      // Strip the prior-annotation suffix " [self=0 ...]".
      if (body.empty() || body.back() != ']') {
        throw UnrecognizedPromptError("stage " + std::to_string(stage) +
                                      " narrative line lacks an annotation suffix");
      }
      std::size_t open = body.rfind(" [");
      if (open == std::string_view::npos ||
          !is_annotation_body(body.substr(open + 2, body.size() - open - 3))) {
        throw UnrecognizedPromptError("stage " + std::to_string(stage) +
                                      " narrative line has a malformed annotation suffix");
      }
      body = body.substr(0, open);
    }
    s.text = std::string(body);
    sentences.push_back(std::move(s));
  }
  if (sentences.empty()) {
    throw UnrecognizedPromptError("user prompt has an empty narrative block");
  }
  return sentences;
}

} // namespace

ProviderResponse MockChatProvider::complete(const ProviderRequest &request) {
  int stage = stage_from_prompt(request.user_prompt);
  std::vector<MockSentence> sentences = narrative_from_prompt(request.user_prompt, stage);

  ordered_json arr = ordered_json::array();
  const std::vector<KeywordRule> &rules = kStageRules[static_cast<std::size_t>(stage - 1)];
  for (const MockSentence &s : sentences) {
    std::vector<std::string> tokens = text::word_tokens(s.text);
    ordered_json rec;
    rec["index"] = s.index;
    rec["text"] = s.text;
    for (const KeywordRule &rule : rules) {
      int hit = 0;
      for (const std::string &tok : tokens) {
        for (std::string_view trigger : rule.tokens) {
          if (tok == trigger) {
            hit = 1;
            break;
          }
        }
        if (hit) {
          break;
        }
      }
      rec[std::string(rule.code_id)] = hit;
    }
    arr.push_back(std::move(rec));
  }

  ProviderResponse response;
  response.content = arr.dump(2);
  response.finish_reason = "stop";
  return response;
}

std::string MockChatProvider::describe() const { return "mock"; }

} // namespace pncoder
