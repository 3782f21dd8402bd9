#include "pncoder/annotation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pncoder/errors.hpp"
#include "pncoder/text.hpp"

namespace pncoder {

AnnotatorId AnnotatorId::human(std::string label) {
  AnnotatorId id;
  id.kind = AnnotatorKind::Human;
  id.label = std::move(label);
  return id;
}

AnnotatorId AnnotatorId::model_run(std::string model_name, int run_index,
                                   std::string prompt_variant) {
  AnnotatorId id;
  id.kind = AnnotatorKind::ModelRun;
  id.label = model_name + "/run" + std::to_string(run_index);
  id.model_name = std::move(model_name);
  id.run_index = run_index;
  id.prompt_variant = std::move(prompt_variant);
  return id;
}

AnnotationMatrix::AnnotationMatrix(std::string narrative_id, std::string codebook_version,
                                   AnnotatorId annotator, std::size_t num_sentences,
                                   std::size_t num_codes)
    : narrative_id_(std::move(narrative_id)), codebook_version_(std::move(codebook_version)),
      annotator_(std::move(annotator)), rows_(num_sentences), cols_(num_codes),
      cells_(num_sentences * num_codes, 0) {
  if (rows_ == 0 || cols_ == 0) {
    throw ValidationError("annotation matrix must have at least one sentence and one code");
  }
}

std::uint8_t AnnotationMatrix::cell(std::size_t sentence, std::size_t code) const {
  if (sentence >= rows_ || code >= cols_) {
    throw ValidationError("matrix cell (" + std::to_string(sentence) + "," +
                          std::to_string(code) + ") out of range");
  }
  return cells_[sentence * cols_ + code];
}

void AnnotationMatrix::set_cell(std::size_t sentence, std::size_t code, std::uint8_t value) {
  if (sentence >= rows_ || code >= cols_) {
    throw ValidationError("matrix cell (" + std::to_string(sentence) + "," +
                          std::to_string(code) + ") out of range");
  }
  if (value > 1) {
    throw ValidationError("matrix cells are binary; got " + std::to_string(value));
  }
  cells_[sentence * cols_ + code] = value;
}

std::vector<std::uint8_t> AnnotationMatrix::column(std::size_t code) const {
  std::vector<std::uint8_t> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    out[r] = cell(r, code);
  }
  return out;
}

bool AnnotationMatrix::same_shape(const AnnotationMatrix &other) const {
  return rows_ == other.rows_ && cols_ == other.cols_;
}

bool AnnotationMatrix::cells_equal(const AnnotationMatrix &other) const {
  return same_shape(other) && cells_ == other.cells_;
}

std::vector<AlignmentViolation> validate_alignment(const AnnotationMatrix &m,
                                                   const NarrativeDocument &doc,
                                                   const Codebook &cb) {
  std::vector<AlignmentViolation> violations;
  if (m.rows() != doc.size()) {
    violations.push_back({AlignmentViolationKind::RowMismatch,
                          "matrix has " + std::to_string(m.rows()) + " rows but document \"" +
                              doc.id() + "\" has " + std::to_string(doc.size()) + " sentences",
                          std::nullopt, std::nullopt});
  }
  if (m.cols() != cb.size()) {
    violations.push_back({AlignmentViolationKind::ColMismatch,
                          "matrix has " + std::to_string(m.cols()) + " columns but codebook has " +
                              std::to_string(cb.size()) + " codes",
                          std::nullopt, std::nullopt});
  }
  if (!m.codebook_version().empty() && m.codebook_version() != cb.version()) {
    violations.push_back({AlignmentViolationKind::VersionMismatch,
                          "matrix codebook version \"" + m.codebook_version() +
                              "\" != \"" + cb.version() + "\"",
                          std::nullopt, std::nullopt});
  }
  // Cells are clamped to {0,1} at construction; nothing further to scan.
  return violations;
}

std::vector<AlignmentViolation> validate_alignment(const std::vector<std::vector<long long>> &cells,
                                                   const NarrativeDocument &doc,
                                                   const Codebook &cb) {
  std::vector<AlignmentViolation> violations;
  if (cells.size() != doc.size()) {
    violations.push_back({AlignmentViolationKind::RowMismatch,
                          "grid has " + std::to_string(cells.size()) + " rows but document \"" +
                              doc.id() + "\" has " + std::to_string(doc.size()) + " sentences",
                          std::nullopt, std::nullopt});
  }
  for (std::size_t r = 0; r < cells.size(); ++r) {
    if (cells[r].size() != cb.size()) {
      violations.push_back({AlignmentViolationKind::ColMismatch,
                            "row " + std::to_string(r) + " has " +
                                std::to_string(cells[r].size()) + " cells but codebook has " +
                                std::to_string(cb.size()) + " codes",
                            r, std::nullopt});
      continue;
    }
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      if (cells[r][c] != 0 && cells[r][c] != 1) {
        violations.push_back({AlignmentViolationKind::NonBinaryCell,
                              "cell (" + std::to_string(r) + "," + std::to_string(c) +
                                  ") holds " + std::to_string(cells[r][c]),
                              r, c});
      }
    }
  }
  return violations;
}

void RunSet::validate() const {
  if (runs.empty()) {
    throw ValidationError("run set is empty");
  }
  for (const AnnotationMatrix &run : runs) {
    if (!run.same_shape(runs.front())) {
      throw ValidationError("runs disagree on matrix shape");
    }
    if (run.codebook_version() != runs.front().codebook_version()) {
      throw ValidationError("runs disagree on codebook version");
    }
    if (run.narrative_id() != narrative_id) {
      throw ValidationError("run matrix narrative \"" + run.narrative_id() +
                            "\" does not match run set narrative \"" + narrative_id + "\"");
    }
  }
}

AnnotationMatrix majority_vote(const RunSet &runs, TieBreak tie_break) {
  runs.validate();
  const AnnotationMatrix &first = runs.runs.front();
  AnnotatorId voter;
  voter.kind = AnnotatorKind::ModelRun;
  voter.model_name = first.annotator().model_name;
  voter.prompt_variant = first.annotator().prompt_variant;
  voter.label = (voter.model_name.empty() ? std::string("model") : voter.model_name) + "/majority";

  AnnotationMatrix out(first.narrative_id(), first.codebook_version(), voter, first.rows(),
                       first.cols());
  const std::size_t n = runs.runs.size();
  for (std::size_t r = 0; r < first.rows(); ++r) {
    for (std::size_t c = 0; c < first.cols(); ++c) {
      std::size_t ones = 0;
      for (const AnnotationMatrix &run : runs.runs) {
        ones += run.cell(r, c);
      }
      std::uint8_t v;
      if (2 * ones > n) {
        v = 1;
      } else if (2 * ones < n) {
        v = 0;
      } else {
        v = tie_break == TieBreak::One ? 1 : 0;
      }
      out.set_cell(r, c, v);
    }
  }
  return out;
}

std::vector<double> code_frequencies(const AnnotationMatrix &m) {
  std::vector<double> out(m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    std::size_t ones = 0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      ones += m.cell(r, c);
    }
    out[c] = 100.0 * static_cast<double>(ones) / static_cast<double>(m.rows());
  }
  return out;
}

std::vector<double> mean_code_frequencies(const std::vector<AnnotationMatrix> &matrices) {
  if (matrices.empty()) {
    throw ValidationError("no matrices given");
  }
  std::size_t cols = matrices.front().cols();
  std::vector<double> sum(cols, 0.0);
  for (const AnnotationMatrix &m : matrices) {
    if (m.cols() != cols) {
      throw AlignmentError("matrices disagree on code count");
    }
    std::vector<double> f = code_frequencies(m);
    for (std::size_t c = 0; c < cols; ++c) {
      sum[c] += f[c];
    }
  }
  for (double &v : sum) {
    v /= static_cast<double>(matrices.size());
  }
  return sum;
}

namespace {

std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

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

AnnotationMatrix parse_matrix_csv(std::string_view content, const Codebook &cb,
                                  AnnotatorId annotator, std::string narrative_id) {
  std::istringstream lines{std::string(content)};
  std::string line;
  std::vector<std::string> header;
  std::vector<std::vector<std::uint8_t>> rows;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.rfind("# annotator:", 0) == 0) {
      annotator.label = text::trim(line.substr(sizeof("# annotator:") - 1));
      continue;
    }
    if (line.rfind("# narrative:", 0) == 0) {
      narrative_id = text::trim(line.substr(sizeof("# narrative:") - 1));
      continue;
    }
    if (line.rfind("# model:", 0) == 0) {
      annotator.model_name = text::trim(line.substr(sizeof("# model:") - 1));
      continue;
    }
    if (line.rfind("# prompt_variant:", 0) == 0) {
      annotator.prompt_variant = text::trim(line.substr(sizeof("# prompt_variant:") - 1));
      continue;
    }
    if (text::trim(line).empty()) {
      continue;
    }
    std::vector<std::string> fields = split_csv_line(line);
    if (header.empty()) {
      header = std::move(fields);
      if (header.empty() || header.front() != "sentence_index") {
        throw ParseError("annotation CSV must start with a \"sentence_index\" header column");
      }
      if (header.size() != cb.size() + 1) {
        throw ParseError("annotation CSV has " + std::to_string(header.size() - 1) +
                         " code columns; codebook expects " + std::to_string(cb.size()));
      }
      for (std::size_t c = 0; c < cb.size(); ++c) {
        if (header[c + 1] != cb.at(c).id) {
          throw ParseError("annotation CSV column " + std::to_string(c + 1) + " is \"" +
                           header[c + 1] + "\"; expected code \"" + cb.at(c).id + "\"");
        }
      }
      continue;
    }
    if (fields.size() != header.size()) {
      throw ParseError("line " + std::to_string(lineno) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    std::size_t expected_index = rows.size();
    if (fields[0] != std::to_string(expected_index)) {
      throw ParseError("line " + std::to_string(lineno) + ": sentence_index \"" + fields[0] +
                       "\" out of order (expected " + std::to_string(expected_index) + ")");
    }
    std::vector<std::uint8_t> row(cb.size());
    for (std::size_t c = 0; c < cb.size(); ++c) {
      const std::string &v = fields[c + 1];
      if (v == "0") {
        row[c] = 0;
      } else if (v == "1") {
        row[c] = 1;
      } else {
        throw ParseError("line " + std::to_string(lineno) + ": non-binary cell \"" + v +
                         "\" for code \"" + cb.at(c).id + "\"");
      }
    }
    rows.push_back(std::move(row));
  }
  if (header.empty()) {
    throw ParseError("annotation CSV is empty");
  }
  if (rows.empty()) {
    throw ParseError("annotation CSV has a header but no sentence rows");
  }
  AnnotationMatrix m(std::move(narrative_id), cb.version(), std::move(annotator), rows.size(),
                     cb.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cb.size(); ++c) {
      m.set_cell(r, c, rows[r][c]);
    }
  }
  return m;
}

std::string runset_to_json(const RunSet &rs, const Codebook &cb) {
  rs.validate();
  if (rs.runs.front().codebook_version() != cb.version()) {
    throw AlignmentError("run set uses codebook \"" + rs.runs.front().codebook_version() +
                         "\" but was asked to serialize against \"" + cb.version() + "\"");
  }
  nlohmann::ordered_json root;
  root["narrative_id"] = rs.narrative_id;
  root["codebook_version"] = rs.runs.front().codebook_version();
  nlohmann::ordered_json ids = nlohmann::ordered_json::array();
  for (const Code &code : cb.codes()) {
    ids.push_back(code.id);
  }
  root["code_ids"] = std::move(ids);
  root["model_name"] = rs.runs.front().annotator().model_name;
  root["prompt_variant"] = rs.runs.front().annotator().prompt_variant;
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const AnnotationMatrix &m : rs.runs) {
    nlohmann::ordered_json run;
    run["run_index"] = m.annotator().run_index ? *m.annotator().run_index : 0;
    nlohmann::ordered_json grid = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (std::size_t c = 0; c < m.cols(); ++c) {
        row.push_back(static_cast<int>(m.cell(r, c)));
      }
      grid.push_back(std::move(row));
    }
    run["rows"] = std::move(grid);
    runs.push_back(std::move(run));
  }
  root["runs"] = std::move(runs);
  root["transcripts"] = rs.raw_transcripts;
  return root.dump(2) + "\n";
}

RunSet parse_runset(std::string_view json_text, const Codebook &cb) {
  nlohmann::json root = nlohmann::json::parse(json_text, nullptr, false);
  if (root.is_discarded() || !root.is_object()) {
    throw ParseError("run set file is not a JSON object");
  }
  for (const char *key : {"narrative_id", "codebook_version", "code_ids", "runs"}) {
    if (!root.contains(key)) {
      throw ParseError(std::string("run set file lacks \"") + key + "\"");
    }
  }
  if (root["codebook_version"].get<std::string>() != cb.version()) {
    throw ValidationError("run set was made with codebook \"" +
                          root["codebook_version"].get<std::string>() +
                          "\", current codebook is \"" + cb.version() + "\"");
  }
  const nlohmann::json &ids = root["code_ids"];
  if (!ids.is_array() || ids.size() != cb.size()) {
    throw ValidationError("run set code ids do not match the codebook");
  }
  for (std::size_t c = 0; c < cb.size(); ++c) {
    if (!ids[c].is_string() || ids[c].get<std::string>() != cb.at(c).id) {
      throw ValidationError("run set code id " + std::to_string(c) +
                            " does not match the codebook");
    }
  }

  RunSet rs;
  rs.narrative_id = root["narrative_id"].get<std::string>();
  std::string model =
      root.contains("model_name") ? root["model_name"].get<std::string>() : std::string("model");
  std::string variant = root.contains("prompt_variant")
                            ? root["prompt_variant"].get<std::string>()
                            : std::string("cot-chain");
  const nlohmann::json &runs = root["runs"];
  if (!runs.is_array() || runs.empty()) {
    throw ValidationError("run set has no runs");
  }
  for (const nlohmann::json &run : runs) {
    if (!run.is_object() || !run.contains("rows") || !run["rows"].is_array()) {
      throw ParseError("run set run entry lacks a rows grid");
    }
    int run_index = run.contains("run_index") ? run["run_index"].get<int>() : 0;
    const nlohmann::json &grid = run["rows"];
    if (grid.empty()) {
      throw ValidationError("run set run " + std::to_string(run_index) + " has zero rows");
    }
    AnnotationMatrix m(rs.narrative_id, cb.version(),
                       AnnotatorId::model_run(model, run_index, variant), grid.size(),
                       cb.size());
    for (std::size_t r = 0; r < grid.size(); ++r) {
      const nlohmann::json &row = grid[r];
      if (!row.is_array() || row.size() != cb.size()) {
        throw ParseError("run set run " + std::to_string(run_index) + " row " +
                         std::to_string(r) + " is malformed");
      }
      for (std::size_t c = 0; c < cb.size(); ++c) {
        if (!row[c].is_number_integer()) {
          throw ParseError("run set cell is not an integer");
        }
        long long v = row[c].get<long long>();
        if (v != 0 && v != 1) {
          throw ValidationError("run set cell (" + std::to_string(r) + "," + std::to_string(c) +
                                ") is not 0/1");
        }
        m.set_cell(r, c, static_cast<std::uint8_t>(v));
      }
    }
    rs.runs.push_back(std::move(m));
  }
  if (root.contains("transcripts") && root["transcripts"].is_array()) {
    for (const nlohmann::json &t : root["transcripts"]) {
      rs.raw_transcripts.push_back(t.get<std::string>());
    }
  }
  rs.validate();
  return rs;
}

RunSet load_runset(const std::filesystem::path &path, const Codebook &cb) {
  return parse_runset(read_file(path), cb);
}

void save_runset(const RunSet &rs, const Codebook &cb, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write file: " + path.string());
  }
  out << runset_to_json(rs, cb);
  if (!out) {
    throw IoError("failed writing file: " + path.string());
  }
}

AnnotationMatrix import_human_csv(const std::filesystem::path &path, const NarrativeDocument &doc,
                                  const Codebook &cb) {
  AnnotationMatrix m = parse_matrix_csv(read_file(path), cb,
                                        AnnotatorId::human(path.stem().string()), doc.id());
  std::vector<AlignmentViolation> violations = validate_alignment(m, doc, cb);
  if (!violations.empty()) {
    throw AlignmentError("annotation CSV \"" + path.string() +
                         "\" does not align: " + violations.front().detail);
  }
  return m;
}

AnnotationMatrix load_matrix_csv(const std::filesystem::path &path, const Codebook &cb) {
  return parse_matrix_csv(read_file(path), cb, AnnotatorId::human(path.stem().string()),
                          path.stem().string());
}

std::string matrix_to_csv(const AnnotationMatrix &m, const Codebook &cb) {
  if (m.cols() != cb.size()) {
    throw AlignmentError("matrix has " + std::to_string(m.cols()) +
                         " columns but codebook has " + std::to_string(cb.size()));
  }
  std::string out;
  if (!m.annotator().label.empty()) {
    out += "# annotator: " + m.annotator().label + "\n";
  }
  if (!m.narrative_id().empty()) {
    out += "# narrative: " + m.narrative_id() + "\n";
  }
  if (!m.annotator().model_name.empty()) {
    out += "# model: " + m.annotator().model_name + "\n";
  }
  if (!m.annotator().prompt_variant.empty()) {
    out += "# prompt_variant: " + m.annotator().prompt_variant + "\n";
  }
  out += "sentence_index";
  for (const Code &code : cb.codes()) {
    out += "," + code.id;
  }
  out += "\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out += std::to_string(r);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out += m.cell(r, c) ? ",1" : ",0";
    }
    out += "\n";
  }
  return out;
}

void save_matrix_csv(const AnnotationMatrix &m, const Codebook &cb,
                     const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write file: " + path.string());
  }
  out << matrix_to_csv(m, cb);
  if (!out) {
    throw IoError("failed writing file: " + path.string());
  }
}

} // namespace pncoder
