#include "pncoder/codebook.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pncoder/errors.hpp"
#include "pncoder/text.hpp"

namespace pncoder {

using nlohmann::json;

int stage_of(CodeGroup group) {
  switch (group) {
  case CodeGroup::Categorical:
    return 1;
  case CodeGroup::Structural:
    return 2;
  case CodeGroup::Content:
    return 3;
  }
  throw ValidationError("unknown code group");
}

CodeGroup group_for_stage(int stage) {
  switch (stage) {
  case 1:
    return CodeGroup::Categorical;
  case 2:
    return CodeGroup::Structural;
  case 3:
    return CodeGroup::Content;
  default:
    throw InvalidStageError("stage must be 1, 2, or 3; got " + std::to_string(stage));
  }
}

std::string_view group_name(CodeGroup group) {
  switch (group) {
  case CodeGroup::Categorical:
    return "categorical";
  case CodeGroup::Structural:
    return "structural";
  case CodeGroup::Content:
    return "content";
  }
  return "?";
}

std::optional<CodeGroup> group_from_name(std::string_view name) {
  if (name == "categorical") {
    return CodeGroup::Categorical;
  }
  if (name == "structural") {
    return CodeGroup::Structural;
  }
  if (name == "content") {
    return CodeGroup::Content;
  }
  return std::nullopt;
}

namespace {

void validate_code(const Code &code) {
  if (code.id.empty()) {
    throw ValidationError("code id must be non-empty");
  }
  for (char c : code.id) {
    if (text::is_ascii_space(c)) {
      throw ValidationError("code id contains whitespace: \"" + code.id + "\"");
    }
    if (std::isupper(static_cast<unsigned char>(c))) {
      throw ValidationError("code id must be lowercase: \"" + code.id + "\"");
    }
  }
  if (code.definition.empty()) {
    throw ValidationError("code \"" + code.id + "\" has an empty definition");
  }
}

} // namespace

Codebook::Codebook(std::string version, std::vector<Code> codes)
    : version_(std::move(version)), codes_(std::move(codes)) {
  if (codes_.empty()) {
    throw ValidationError("codebook has no codes");
  }
  std::set<std::string> seen;
  for (const Code &code : codes_) {
    validate_code(code);
    if (!seen.insert(code.id).second) {
      throw ValidationError("duplicate code id \"" + code.id + "\"");
    }
  }
}

const Code &Codebook::at(std::size_t column) const {
  if (column >= codes_.size()) {
    throw ValidationError("code column " + std::to_string(column) + " out of range");
  }
  return codes_[column];
}

std::optional<std::size_t> Codebook::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    if (codes_[i].id == id) {
      return i;
    }
  }
  return std::nullopt;
}

std::vector<Code> Codebook::codes_for_stage(int stage) const {
  CodeGroup group = group_for_stage(stage);
  std::vector<Code> out;
  for (const Code &code : codes_) {
    if (code.group == group) {
      out.push_back(code);
    }
  }
  return out;
}

std::vector<Code> Codebook::codes_through_stage(int stage) const {
  group_for_stage(stage); // range check
  std::vector<Code> out;
  for (const Code &code : codes_) {
    if (stage_of(code.group) <= stage) {
      out.push_back(code);
    }
  }
  return out;
}

Codebook parse_codebook(std::string_view json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) {
    throw ParseError("codebook file is not valid JSON");
  }
  if (!doc.is_object() || !doc.contains("version") || !doc.contains("codes")) {
    throw ParseError("codebook JSON must be an object with \"version\" and \"codes\"");
  }
  if (!doc["version"].is_string() || !doc["codes"].is_array()) {
    throw ParseError("codebook \"version\" must be a string and \"codes\" an array");
  }
  std::vector<Code> codes;
  for (const json &entry : doc["codes"]) {
    if (!entry.is_object()) {
      throw ParseError("codebook code entry is not an object");
    }
    for (const char *field : {"id", "name", "group", "definition"}) {
      if (!entry.contains(field) || !entry[field].is_string()) {
        throw ParseError(std::string("codebook code entry missing string field \"") + field +
                         "\"");
      }
    }
    auto group = group_from_name(entry["group"].get<std::string>());
    if (!group) {
      throw ValidationError("unknown code group \"" + entry["group"].get<std::string>() +
                            "\" (expected categorical, structural, or content)");
    }
    codes.push_back({entry["id"].get<std::string>(), entry["name"].get<std::string>(), *group,
                     entry["definition"].get<std::string>()});
  }
  return Codebook(doc["version"].get<std::string>(), std::move(codes));
}

Codebook load_codebook(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open codebook file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_codebook(buffer.str());
}

std::string codebook_to_json(const Codebook &cb) {
  nlohmann::ordered_json doc;
  doc["version"] = cb.version();
  doc["codes"] = nlohmann::ordered_json::array();
  for (const Code &code : cb.codes()) {
    nlohmann::ordered_json entry;
    entry["id"] = code.id;
    entry["name"] = code.display_name;
    entry["group"] = std::string(group_name(code.group));
    entry["definition"] = code.definition;
    doc["codes"].push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

void save_codebook(const Codebook &cb, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write codebook file: " + path.string());
  }
  out << codebook_to_json(cb);
  if (!out) {
    throw IoError("failed writing codebook file: " + path.string());
  }
}

} // namespace pncoder
