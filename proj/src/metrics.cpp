#include "pncoder/metrics.hpp"

#include <cmath>

#include "pncoder/errors.hpp"

namespace pncoder {

namespace {

void require_aligned(const AnnotationMatrix &a, const AnnotationMatrix &b) {
  if (!a.same_shape(b)) {
    throw AlignmentError("matrices have different shapes (" + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ")");
  }
  if (a.narrative_id() != b.narrative_id()) {
    throw AlignmentError("matrices refer to different narratives (\"" + a.narrative_id() +
                         "\" vs \"" + b.narrative_id() + "\")");
  }
  if (a.codebook_version() != b.codebook_version()) {
    throw AlignmentError("matrices use different codebook versions (\"" + a.codebook_version() +
                         "\" vs \"" + b.codebook_version() + "\")");
  }
}

void require_aligned(const std::vector<AnnotationMatrix> &ms) {
  for (std::size_t i = 1; i < ms.size(); ++i) {
    require_aligned(ms.front(), ms[i]);
  }
}

struct PairCounts {
  long long n11 = 0;
  long long n10 = 0;
  long long n01 = 0;
  long long n00 = 0;

  long long n() const { return n11 + n10 + n01 + n00; }
  long long matches() const { return n11 + n00; }
};

PairCounts pair_counts(const AnnotationMatrix &a, const AnnotationMatrix &b, std::size_t code) {
  PairCounts c;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    bool x = a.cell(r, code) != 0;
    bool y = b.cell(r, code) != 0;
    if (x && y) {
      ++c.n11;
    } else if (x) {
      ++c.n10;
    } else if (y) {
      ++c.n01;
    } else {
      ++c.n00;
    }
  }
  return c;
}

PairCounts flatten_counts(const AnnotationMatrix &a, const AnnotationMatrix &b) {
  PairCounts total;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    PairCounts pc = pair_counts(a, b, c);
    total.n11 += pc.n11;
    total.n10 += pc.n10;
    total.n01 += pc.n01;
    total.n00 += pc.n00;
  }
  return total;
}

// kappa = (n*matches - pe_num) / (n^2 - pe_num), with pe_num the exact
// integer numerator of expected agreement; undefined when pe_num == n^2.
std::optional<double> kappa_from_counts(const PairCounts &c) {
  long long n = c.n();
  long long a1 = c.n11 + c.n10;
  long long b1 = c.n11 + c.n01;
  long long a0 = n - a1;
  long long b0 = n - b1;
  long long pe_num = a1 * b1 + a0 * b0;
  long long denom = n * n - pe_num;
  if (denom == 0) {
    return std::nullopt;
  }
  return static_cast<double>(n * c.matches() - pe_num) / static_cast<double>(denom);
}

} // namespace

ConfusionCounts confusion(const std::vector<std::uint8_t> &pred,
                          const std::vector<std::uint8_t> &gold) {
  if (pred.size() != gold.size()) {
    throw AlignmentError("confusion over columns of different length");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    bool p = pred[i] != 0;
    bool g = gold[i] != 0;
    if (p && g) {
      ++c.tp;
    } else if (p) {
      ++c.fp;
    } else if (g) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

AgreementStats percent_agreement(const AnnotationMatrix &a, const AnnotationMatrix &b) {
  require_aligned(a, b);
  AgreementStats stats;
  stats.per_code.reserve(a.cols());
  for (std::size_t c = 0; c < a.cols(); ++c) {
    PairCounts pc = pair_counts(a, b, c);
    stats.per_code.push_back(static_cast<double>(pc.matches()) / static_cast<double>(pc.n()));
  }
  PairCounts all = flatten_counts(a, b);
  stats.global = static_cast<double>(all.matches()) / static_cast<double>(all.n());
  return stats;
}

std::vector<std::optional<double>> cohen_kappa(const AnnotationMatrix &a,
                                               const AnnotationMatrix &b) {
  require_aligned(a, b);
  std::vector<std::optional<double>> out;
  out.reserve(a.cols());
  for (std::size_t c = 0; c < a.cols(); ++c) {
    out.push_back(kappa_from_counts(pair_counts(a, b, c)));
  }
  return out;
}

std::optional<double> cohen_kappa_global(const AnnotationMatrix &a, const AnnotationMatrix &b) {
  require_aligned(a, b);
  return kappa_from_counts(flatten_counts(a, b));
}

AgreementStats pabak(const AnnotationMatrix &a, const AnnotationMatrix &b) {
  AgreementStats stats = percent_agreement(a, b);
  for (double &v : stats.per_code) {
    v = 2.0 * v - 1.0;
  }
  stats.global = 2.0 * stats.global - 1.0;
  return stats;
}

AnnotationMatrix minimum_match_gold(const AnnotationMatrix &pred,
                                    const std::vector<AnnotationMatrix> &annotators) {
  if (annotators.empty()) {
    throw ValidationError("minimum-match gold needs at least one annotator");
  }
  require_aligned(pred, annotators.front());
  require_aligned(annotators);
  AnnotationMatrix gold(pred.narrative_id(), pred.codebook_version(),
                        AnnotatorId::human("gold/min-match"), pred.rows(), pred.cols());
  for (std::size_t r = 0; r < pred.rows(); ++r) {
    for (std::size_t c = 0; c < pred.cols(); ++c) {
      bool any_match = false;
      for (const AnnotationMatrix &ann : annotators) {
        if (ann.cell(r, c) == pred.cell(r, c)) {
          any_match = true;
          break;
        }
      }
      gold.set_cell(r, c, any_match ? pred.cell(r, c) : annotators.front().cell(r, c));
    }
  }
  return gold;
}

AnnotationMatrix majority_gold(const std::vector<AnnotationMatrix> &annotators,
                               TieBreak tie_break, std::vector<std::string> *warnings) {
  if (annotators.size() < 2) {
    throw ValidationError("majority gold needs at least two annotators");
  }
  require_aligned(annotators);
  if (annotators.size() == 2 && warnings != nullptr) {
    warnings->push_back("majority gold over exactly two annotators: every disagreement resolves "
                        "to the tie-break value (" +
                        std::string(tie_break == TieBreak::One ? "1" : "0") + ")");
  }
  const AnnotationMatrix &first = annotators.front();
  AnnotationMatrix gold(first.narrative_id(), first.codebook_version(),
                        AnnotatorId::human("gold/majority"), first.rows(), first.cols());
  const std::size_t n = annotators.size();
  for (std::size_t r = 0; r < first.rows(); ++r) {
    for (std::size_t c = 0; c < first.cols(); ++c) {
      std::size_t ones = 0;
      for (const AnnotationMatrix &ann : annotators) {
        ones += ann.cell(r, c);
      }
      std::uint8_t v;
      if (2 * ones > n) {
        v = 1;
      } else if (2 * ones < n) {
        v = 0;
      } else {
        v = tie_break == TieBreak::One ? 1 : 0;
      }
      gold.set_cell(r, c, v);
    }
  }
  return gold;
}

namespace {

std::optional<double> f1_from_confusion(long long tp, long long fp, long long fn) {
  // Harmonic mean of precision and recall. Any zero denominator along the way
  // (tp+fp, tp+fn, or P+R) leaves the value undefined, which reduces to:
  // defined iff tp > 0.
  if (tp == 0) {
    return std::nullopt;
  }
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

} // namespace

EvaluationReport f1_scores(const AnnotationMatrix &pred, const AnnotationMatrix &gold,
                           const Codebook &cb) {
  require_aligned(pred, gold);
  if (pred.cols() != cb.size()) {
    throw AlignmentError("matrix has " + std::to_string(pred.cols()) +
                         " columns but codebook has " + std::to_string(cb.size()));
  }
  EvaluationReport report;
  report.narrative_ids.push_back(pred.narrative_id());
  report.annotator_labels.push_back(pred.annotator().label);
  report.annotator_labels.push_back(gold.annotator().label);

  double macro_sum = 0.0;
  int macro_defined = 0;
  long long total_tp = 0;
  long long total_fp = 0;
  long long total_fn = 0;

  for (std::size_t c = 0; c < pred.cols(); ++c) {
    ConfusionCounts cc = confusion(pred.column(c), gold.column(c));
    PairCounts pc = pair_counts(pred, gold, c);

    CodeMetrics m;
    m.code_id = cb.at(c).id;
    m.support = cc.tp + cc.fn;
    m.avg_positive_count =
        static_cast<double>((cc.tp + cc.fp) + (cc.tp + cc.fn)) / 2.0; // mean over both matrices
    m.p_o = static_cast<double>(pc.matches()) / static_cast<double>(pc.n());
    m.pabak = 2.0 * m.p_o - 1.0;
    m.kappa = kappa_from_counts(pc);

    if (cc.tp + cc.fp > 0) {
      m.precision = static_cast<double>(cc.tp) / static_cast<double>(cc.tp + cc.fp);
    }
    if (cc.tp + cc.fn > 0) {
      m.recall = static_cast<double>(cc.tp) / static_cast<double>(cc.tp + cc.fn);
    }
    m.f1_positive = f1_from_confusion(cc.tp, cc.fp, cc.fn);

    // Class-support-weighted mean of positive-class and negative-class F1.
    // Zero-support classes drop out; a class with support but undefined F1
    // leaves the weighted value undefined.
    long long support_pos = cc.tp + cc.fn;
    long long support_neg = cc.tn + cc.fp;
    std::optional<double> f1_neg = f1_from_confusion(cc.tn, cc.fn, cc.fp);
    bool undef = (support_pos > 0 && !m.f1_positive) || (support_neg > 0 && !f1_neg);
    if (!undef) {
      double weighted = 0.0;
      if (support_pos > 0) {
        weighted += static_cast<double>(support_pos) * *m.f1_positive;
      }
      if (support_neg > 0) {
        weighted += static_cast<double>(support_neg) * *f1_neg;
      }
      m.f1_weighted = weighted / static_cast<double>(support_pos + support_neg);
    }

    if (m.f1_positive) {
      macro_sum += *m.f1_positive;
      ++macro_defined;
    } else {
      ++report.macro_exclusions;
    }
    total_tp += cc.tp;
    total_fp += cc.fp;
    total_fn += cc.fn;
    report.per_code.push_back(std::move(m));
  }

  report.micro_f1 = f1_from_confusion(total_tp, total_fp, total_fn);
  if (macro_defined > 0) {
    report.macro_f1 = macro_sum / macro_defined;
  }
  PairCounts all = flatten_counts(pred, gold);
  report.micro_p_o = static_cast<double>(all.matches()) / static_cast<double>(all.n());
  report.micro_pabak = 2.0 * *report.micro_p_o - 1.0;
  report.micro_kappa = kappa_from_counts(all);
  return report;
}

double micro_accuracy(const AnnotationMatrix &pred, const AnnotationMatrix &gold) {
  require_aligned(pred, gold);
  PairCounts all = flatten_counts(pred, gold);
  return static_cast<double>(all.matches()) / static_cast<double>(all.n());
}

std::optional<double> phi_coefficient(const std::vector<std::uint8_t> &x,
                                      const std::vector<std::uint8_t> &y) {
  if (x.size() != y.size() || x.empty()) {
    throw AlignmentError("phi over columns of different or zero length");
  }
  long long n = static_cast<long long>(x.size());
  long long sx = 0;
  long long sy = 0;
  long long sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i] != 0;
    sy += y[i] != 0;
    sxy += (x[i] != 0) && (y[i] != 0);
  }
  long long vx = n * sx - sx * sx; // n^2 * variance, exact
  long long vy = n * sy - sy * sy;
  if (vx == 0 || vy == 0) {
    return std::nullopt;
  }
  double num = static_cast<double>(n * sxy - sx * sy);
  return num / (std::sqrt(static_cast<double>(vx)) * std::sqrt(static_cast<double>(vy)));
}

std::optional<double> jaccard_index(const std::vector<std::uint8_t> &x,
                                    const std::vector<std::uint8_t> &y) {
  if (x.size() != y.size() || x.empty()) {
    throw AlignmentError("jaccard over columns of different or zero length");
  }
  long long inter = 0;
  long long uni = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    bool a = x[i] != 0;
    bool b = y[i] != 0;
    inter += a && b;
    uni += a || b;
  }
  if (uni == 0) {
    return std::nullopt;
  }
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

template <typename PairFn>
CooccurrenceMatrix aggregate_cooccurrence(const std::vector<AnnotationMatrix> &matrices,
                                          PairFn &&pair_fn) {
  if (matrices.empty()) {
    throw ValidationError("co-occurrence needs at least one matrix");
  }
  std::size_t cols = matrices.front().cols();
  for (const AnnotationMatrix &m : matrices) {
    if (m.cols() != cols) {
      throw AlignmentError("matrices disagree on code count");
    }
  }
  CooccurrenceMatrix out(cols, std::vector<CooccurrenceCell>(cols));
  for (std::size_t i = 0; i < cols; ++i) {
    for (std::size_t j = i; j < cols; ++j) {
      double sum = 0.0;
      int defined = 0;
      for (const AnnotationMatrix &m : matrices) {
        std::optional<double> v = pair_fn(m.column(i), m.column(j));
        if (v) {
          sum += *v;
          ++defined;
        }
      }
      CooccurrenceCell cell;
      cell.narratives = defined;
      if (defined > 0) {
        cell.value = sum / defined;
      }
      out[i][j] = cell;
      out[j][i] = cell;
    }
  }
  return out;
}

} // namespace

CooccurrenceMatrix pearson_matrix(const std::vector<AnnotationMatrix> &matrices) {
  CooccurrenceMatrix out = aggregate_cooccurrence(matrices, [](const auto &x, const auto &y) {
    return phi_coefficient(x, y);
  });
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i][i].value = 1.0;
    out[i][i].narratives = static_cast<int>(matrices.size());
  }
  return out;
}

CooccurrenceMatrix jaccard_matrix(const std::vector<AnnotationMatrix> &matrices) {
  return aggregate_cooccurrence(matrices, [](const auto &x, const auto &y) {
    return jaccard_index(x, y);
  });
}

AnnotationMatrix stack_matrices(const std::vector<AnnotationMatrix> &matrices) {
  if (matrices.empty()) {
    throw ValidationError("cannot stack zero matrices");
  }
  std::size_t cols = matrices.front().cols();
  std::size_t rows = 0;
  std::string joined_id;
  for (const AnnotationMatrix &m : matrices) {
    if (m.cols() != cols) {
      throw AlignmentError("matrices disagree on code count");
    }
    if (m.codebook_version() != matrices.front().codebook_version()) {
      throw AlignmentError("matrices disagree on codebook version");
    }
    rows += m.rows();
    if (!joined_id.empty()) {
      joined_id += "+";
    }
    joined_id += m.narrative_id();
  }
  AnnotationMatrix out(joined_id, matrices.front().codebook_version(),
                       matrices.front().annotator(), rows, cols);
  std::size_t offset = 0;
  for (const AnnotationMatrix &m : matrices) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        out.set_cell(offset + r, c, m.cell(r, c));
      }
    }
    offset += m.rows();
  }
  return out;
}

} // namespace pncoder
