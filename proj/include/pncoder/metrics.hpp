#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pncoder/annotation.hpp"
#include "pncoder/codebook.hpp"

namespace pncoder {

struct ConfusionCounts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  long long tn = 0;

  long long total() const { return tp + fp + fn + tn; }
};

ConfusionCounts confusion(const std::vector<std::uint8_t> &pred,
                          const std::vector<std::uint8_t> &gold);

/// Raw percent agreement, per code and over all flattened cells (micro).
struct AgreementStats {
  std::vector<double> per_code;
  double global = 0.0;
};

/// All undefined-able values are optionals; an empty optional is "undefined"
/// (degenerate marginals, zero denominators) and is never folded into a 0.
struct CodeMetrics {
  std::string code_id;
  double avg_positive_count = 0.0; // mean positive count over the two compared matrices
  double p_o = 0.0;
  std::optional<double> kappa;
  double pabak = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1_positive;
  std::optional<double> f1_weighted;
  long long support = 0; // gold positives
};

enum class GoldPolicy { MinimumMatch, Majority };

struct EvaluationReport {
  std::vector<CodeMetrics> per_code; // codebook column order
  std::optional<double> micro_f1;
  std::optional<double> macro_f1;   // unweighted mean of defined per-code f1_positive
  int macro_exclusions = 0;         // per-code f1_positive values left undefined
  std::optional<double> micro_p_o;
  std::optional<double> micro_kappa;
  std::optional<double> micro_pabak;
  GoldPolicy gold_policy = GoldPolicy::MinimumMatch;
  std::vector<std::string> annotator_labels;
  std::vector<std::string> narrative_ids;
};

// --- pairwise agreement -----------------------------------------------------

AgreementStats percent_agreement(const AnnotationMatrix &a, const AnnotationMatrix &b);

/// Cohen's kappa per code; undefined when expected agreement is exactly 1
/// (both annotators constant and equal-class).
std::vector<std::optional<double>> cohen_kappa(const AnnotationMatrix &a,
                                               const AnnotationMatrix &b);
std::optional<double> cohen_kappa_global(const AnnotationMatrix &a, const AnnotationMatrix &b);

/// Prevalence- and bias-adjusted kappa: exactly 2*p_o - 1.
AgreementStats pabak(const AnnotationMatrix &a, const AnnotationMatrix &b);

// --- gold construction ------------------------------------------------------

/// Minimum-match gold: where annotators disagree on a cell, the prediction
/// counts as correct (gold takes the predicted value); where they agree, gold
/// is their unanimous value.
AnnotationMatrix minimum_match_gold(const AnnotationMatrix &pred,
                                    const std::vector<AnnotationMatrix> &annotators);

/// Majority gold across >=2 annotators; exact ties resolve to `tie_break`.
/// With exactly two annotators a warning is appended to `warnings` (if given),
/// since every disagreement then falls to the tie rule.
AnnotationMatrix majority_gold(const std::vector<AnnotationMatrix> &annotators,
                               TieBreak tie_break = TieBreak::Zero,
                               std::vector<std::string> *warnings = nullptr);

// --- F1 family --------------------------------------------------------------

/// Precision/recall/F1 per code plus micro/macro aggregates, pred vs gold.
/// Also fills the pairwise agreement columns (p_o, kappa, PABAK) for the same
/// pair so a report row carries the full metric suite.
EvaluationReport f1_scores(const AnnotationMatrix &pred, const AnnotationMatrix &gold,
                           const Codebook &cb);

/// Fraction of cells where pred equals gold, over all flattened cells.
double micro_accuracy(const AnnotationMatrix &pred, const AnnotationMatrix &gold);

// --- co-occurrence analytics ------------------------------------------------

struct CooccurrenceCell {
  std::optional<double> value;
  int narratives = 0; // per-narrative contributions that were defined
};

/// Symmetric code-by-code grid; entry [i][j] aggregates per-narrative values.
using CooccurrenceMatrix = std::vector<std::vector<CooccurrenceCell>>;

/// Pearson correlation (phi coefficient) of two binary columns; undefined
/// when either column is constant.
std::optional<double> phi_coefficient(const std::vector<std::uint8_t> &x,
                                      const std::vector<std::uint8_t> &y);

/// Jaccard index of the sentence sets where each code is present; undefined
/// when both sets are empty.
std::optional<double> jaccard_index(const std::vector<std::uint8_t> &x,
                                    const std::vector<std::uint8_t> &y);

/// Mean of per-narrative phi values over the narratives where defined.
/// Diagonal cells are pinned to 1.
CooccurrenceMatrix pearson_matrix(const std::vector<AnnotationMatrix> &matrices);

/// Mean of per-narrative Jaccard values over the narratives where defined;
/// diagonal is 1 wherever the code appears at all.
CooccurrenceMatrix jaccard_matrix(const std::vector<AnnotationMatrix> &matrices);

/// Stacks matrices row-wise (same codebook) so multi-narrative evaluation can
/// run on the flattened cell set. Narrative ids join with '+'.
AnnotationMatrix stack_matrices(const std::vector<AnnotationMatrix> &matrices);

} // namespace pncoder
