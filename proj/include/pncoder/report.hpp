#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pncoder/metrics.hpp"

namespace pncoder {

/// Who produced the numbers. Always present in report.json; created_at is
/// left empty under --no-timestamps so reruns emit identical bytes.
struct Provenance {
  std::string codebook_version;
  std::string tool = "pncoder";
  std::string model_name;      // empty when no model was involved
  std::optional<int> runs;
  std::string prompt_variant;  // empty when no model was involved
  std::string created_at;      // ISO-8601 UTC, or empty
};

struct FrequencyTable {
  std::vector<double> percent; // one value per code, in [0,100]
  int narratives = 0;          // how many narratives the mean covers
};

/// Everything the report emitters need, also the schema of report.json.
/// `evaluate` and `analyze` each write one of these; `report` merges them.
struct ReportBundle {
  std::vector<std::string> code_ids;
  Provenance provenance;
  std::optional<EvaluationReport> evaluation;
  std::optional<FrequencyTable> frequencies;
  std::optional<CooccurrenceMatrix> pearson;
  std::optional<CooccurrenceMatrix> jaccard;

  void validate() const; // non-empty code ids; every section's dims match them
};

/// Merge by section: each of evaluation/frequencies/pearson/jaccard may come
/// from at most one input bundle; code ids and codebook versions must agree.
ReportBundle merge_bundles(const std::vector<ReportBundle> &bundles);

std::string bundle_to_json(const ReportBundle &bundle);
ReportBundle parse_bundle(std::string_view json_text);
ReportBundle load_bundle(const std::filesystem::path &path);
void save_bundle(const ReportBundle &bundle, const std::filesystem::path &path);

std::string_view gold_policy_name(GoldPolicy policy);     // "min-match" / "majority"
GoldPolicy gold_policy_from_name(std::string_view name);

struct ReportFormats {
  bool csv = true;
  bool json = true;
};

/// Emits metrics.csv / frequencies.csv / pearson.csv / jaccard.csv (for the
/// sections present) and report.json into out_dir. All numbers fixed to 4
/// decimals in CSV; undefined values are empty CSV cells and JSON nulls.
/// Returns the paths written. Byte-deterministic given the bundle.
std::vector<std::filesystem::path> write_report(const ReportBundle &bundle,
                                                const std::filesystem::path &out_dir,
                                                const ReportFormats &formats = {});

/// In-memory emitters, exposed for golden-file tests.
std::string metrics_csv(const ReportBundle &bundle);
std::string frequencies_csv(const ReportBundle &bundle);
std::string cooccurrence_csv(const CooccurrenceMatrix &matrix,
                             const std::vector<std::string> &code_ids);

/// One parsed metrics.csv row; empty cells come back as empty optionals.
struct MetricsCsvRow {
  std::string code;
  std::optional<double> avg_positive_count;
  std::optional<double> p_o;
  std::optional<double> pabak;
  std::optional<double> kappa;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1_positive;
  std::optional<double> f1_weighted;
};

std::vector<MetricsCsvRow> parse_metrics_csv(std::string_view text);

} // namespace pncoder
