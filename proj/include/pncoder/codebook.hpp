#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pncoder {

inline constexpr const char *kDefaultCodebookVersion = "pn-14.1";

/// The three coding groups. Each group is annotated by exactly one chain stage:
/// Categorical -> stage 1, Structural -> stage 2, Content -> stage 3.
enum class CodeGroup { Categorical, Structural, Content };

int stage_of(CodeGroup group);
CodeGroup group_for_stage(int stage);
std::string_view group_name(CodeGroup group);
std::optional<CodeGroup> group_from_name(std::string_view name);

struct Code {
  std::string id;           // stable machine token, e.g. "call_to_action"
  std::string display_name; // prose name used in prompt code lists
  CodeGroup group = CodeGroup::Categorical;
  std::string definition;   // codebook definition injected into prompts

  bool operator==(const Code &) const = default;
};

/// Immutable, validated coding scheme. Code order is load-bearing: it defines
/// matrix column order in every CSV/JSON artifact downstream.
class Codebook {
public:
  Codebook(std::string version, std::vector<Code> codes);

  const std::string &version() const { return version_; }
  const std::vector<Code> &codes() const { return codes_; }
  std::size_t size() const { return codes_.size(); }
  const Code &at(std::size_t column) const;

  /// Column index of a code id, if present.
  std::optional<std::size_t> index_of(std::string_view id) const;

  /// Codes annotated by the given chain stage, in codebook order.
  /// Throws InvalidStageError for stages outside {1,2,3}.
  std::vector<Code> codes_for_stage(int stage) const;

  /// Codes of all stages up to and including `stage`, in codebook order.
  std::vector<Code> codes_through_stage(int stage) const;

  bool operator==(const Codebook &) const = default;

private:
  std::string version_;
  std::vector<Code> codes_;
};

/// The 14-code default scheme (3 categorical, 3 structural, 8 content).
Codebook default_codebook();

/// Parses and validates a codebook from its JSON document form.
Codebook parse_codebook(std::string_view json_text);
Codebook load_codebook(const std::filesystem::path &path);

std::string codebook_to_json(const Codebook &cb);
void save_codebook(const Codebook &cb, const std::filesystem::path &path);

} // namespace pncoder
