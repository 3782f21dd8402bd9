#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pncoder/codebook.hpp"
#include "pncoder/corpus.hpp"

namespace pncoder {

enum class AnnotatorKind { Human, ModelRun };

struct AnnotatorId {
  AnnotatorKind kind = AnnotatorKind::Human;
  std::string label; // unique within any collection, e.g. "expert_1", "o3-mini/run2"
  std::string model_name;       // ModelRun only
  std::optional<int> run_index; // ModelRun only
  std::string prompt_variant;   // ModelRun only

  static AnnotatorId human(std::string label);
  static AnnotatorId model_run(std::string model_name, int run_index,
                               std::string prompt_variant = "cot-chain");

  bool operator==(const AnnotatorId &) const = default;
};

/// One annotator-or-run's binary labels over a narrative: a dense
/// (num_sentences x num_codes) grid of 0/1 cells with provenance.
class AnnotationMatrix {
public:
  AnnotationMatrix(std::string narrative_id, std::string codebook_version, AnnotatorId annotator,
                   std::size_t num_sentences, std::size_t num_codes);

  const std::string &narrative_id() const { return narrative_id_; }
  const std::string &codebook_version() const { return codebook_version_; }
  const AnnotatorId &annotator() const { return annotator_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::uint8_t cell(std::size_t sentence, std::size_t code) const;
  void set_cell(std::size_t sentence, std::size_t code, std::uint8_t value);

  /// One code's column as a 0/1 vector.
  std::vector<std::uint8_t> column(std::size_t code) const;

  bool same_shape(const AnnotationMatrix &other) const;
  bool cells_equal(const AnnotationMatrix &other) const;

private:
  std::string narrative_id_;
  std::string codebook_version_;
  AnnotatorId annotator_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> cells_; // row-major
};

enum class AlignmentViolationKind { RowMismatch, ColMismatch, NonBinaryCell, VersionMismatch };

struct AlignmentViolation {
  AlignmentViolationKind kind;
  std::string detail;
  std::optional<std::size_t> row;
  std::optional<std::size_t> col;
};

/// Checks that a matrix refers to exactly the given document and codebook.
/// Violations are returned, not thrown; an empty list means aligned.
std::vector<AlignmentViolation> validate_alignment(const AnnotationMatrix &m,
                                                   const NarrativeDocument &doc,
                                                   const Codebook &cb);

/// Same check over a raw cell grid before an AnnotationMatrix is built (the
/// strong type cannot hold non-binary cells, so importers validate here).
std::vector<AlignmentViolation> validate_alignment(const std::vector<std::vector<long long>> &cells,
                                                   const NarrativeDocument &doc,
                                                   const Codebook &cb);

enum class TieBreak { Zero, One };

/// A collection of model runs over the same narrative, with the raw provider
/// transcripts for audit.
struct RunSet {
  std::string narrative_id;
  std::vector<AnnotationMatrix> runs;
  std::vector<std::string> raw_transcripts; // one JSONL transcript per run

  void validate() const; // >=1 run, identical shapes and codebook versions
};

/// Cell-wise majority across runs: 1 iff strictly more than half the runs
/// have 1; exact ties (even run counts) resolve to `tie_break`.
AnnotationMatrix majority_vote(const RunSet &runs, TieBreak tie_break = TieBreak::Zero);

/// Run set JSON document: narrative id, codebook version and code ids, model
/// provenance, one row grid per run, and the raw per-run transcripts.
std::string runset_to_json(const RunSet &rs, const Codebook &cb);
RunSet parse_runset(std::string_view json_text, const Codebook &cb);
RunSet load_runset(const std::filesystem::path &path, const Codebook &cb);
void save_runset(const RunSet &rs, const Codebook &cb, const std::filesystem::path &path);

/// Per-code percentage of sentences carrying the code, in [0,100].
std::vector<double> code_frequencies(const AnnotationMatrix &m);

/// Corpus-level frequency: unweighted mean of per-narrative percentages.
std::vector<double> mean_code_frequencies(const std::vector<AnnotationMatrix> &matrices);

/// Annotation CSV: header "sentence_index" + code ids in codebook order, one
/// row per sentence, cells "0"/"1". Optional "# annotator:" and "# narrative:"
/// comment lines carry provenance; absent those, the annotator label and
/// narrative id default to the file stem.
AnnotationMatrix import_human_csv(const std::filesystem::path &path, const NarrativeDocument &doc,
                                  const Codebook &cb);

/// Parses the same CSV shape without document alignment (row count is taken
/// from the file). Used where no document is available.
AnnotationMatrix parse_matrix_csv(std::string_view content, const Codebook &cb,
                                  AnnotatorId annotator, std::string narrative_id);

std::string matrix_to_csv(const AnnotationMatrix &m, const Codebook &cb);
void save_matrix_csv(const AnnotationMatrix &m, const Codebook &cb,
                     const std::filesystem::path &path);

AnnotationMatrix load_matrix_csv(const std::filesystem::path &path, const Codebook &cb);

} // namespace pncoder
