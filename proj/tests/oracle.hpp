#pragma once

// Brute-force metric recomputation used to cross-check the library. Everything
// here is written against plain int grids and deliberately takes the slow,
// direct route (count loops, textbook formulas) rather than sharing any code
// with the implementation under test.

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace oracle {

using Grid = std::vector<std::vector<int>>; // [sentence][code]

inline std::vector<int> column(const Grid &g, std::size_t c) {
  std::vector<int> out;
  out.reserve(g.size());
  for (const auto &row : g) {
    out.push_back(row[c]);
  }
  return out;
}

inline double percent_agreement(const std::vector<int> &a, const std::vector<int> &b) {
  int match = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) {
      ++match;
    }
  }
  return static_cast<double>(match) / static_cast<double>(a.size());
}

inline std::optional<double> kappa(const std::vector<int> &a, const std::vector<int> &b) {
  const double n = static_cast<double>(a.size());
  int a1 = 0;
  int b1 = 0;
  for (int v : a) {
    a1 += v;
  }
  for (int v : b) {
    b1 += v;
  }
  // Expected agreement is exactly 1 only when both sides are constant with
  // the same class: both all-ones or both all-zeros.
  const auto sz = static_cast<int>(a.size());
  if ((a1 == sz && b1 == sz) || (a1 == 0 && b1 == 0)) {
    return std::nullopt;
  }
  const double po = percent_agreement(a, b);
  const double p1a = a1 / n;
  const double p1b = b1 / n;
  const double pe = p1a * p1b + (1.0 - p1a) * (1.0 - p1b);
  return (po - pe) / (1.0 - pe);
}

inline double pabak(const std::vector<int> &a, const std::vector<int> &b) {
  return 2.0 * percent_agreement(a, b) - 1.0;
}

struct Counts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  long long tn = 0;
};

inline Counts counts(const std::vector<int> &pred, const std::vector<int> &gold) {
  Counts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == 1 && gold[i] == 1) {
      ++c.tp;
    } else if (pred[i] == 1 && gold[i] == 0) {
      ++c.fp;
    } else if (pred[i] == 0 && gold[i] == 1) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

inline std::optional<double> precision(const Counts &c) {
  if (c.tp + c.fp == 0) {
    return std::nullopt;
  }
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

inline std::optional<double> recall(const Counts &c) {
  if (c.tp + c.fn == 0) {
    return std::nullopt;
  }
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

inline std::optional<double> f1(const Counts &c) {
  if (c.tp == 0) {
    return std::nullopt;
  }
  const double p = *precision(c);
  const double r = *recall(c);
  return 2.0 * p * r / (p + r);
}

inline std::optional<double> f1_weighted(const Counts &c) {
  const Counts neg{c.tn, c.fn, c.fp, c.tp};
  const long long sup_pos = c.tp + c.fn;
  const long long sup_neg = c.tn + c.fp;
  const auto f_pos = f1(c);
  const auto f_neg = f1(neg);
  if ((sup_pos > 0 && !f_pos) || (sup_neg > 0 && !f_neg)) {
    return std::nullopt;
  }
  double sum = 0.0;
  if (sup_pos > 0) {
    sum += static_cast<double>(sup_pos) * *f_pos;
  }
  if (sup_neg > 0) {
    sum += static_cast<double>(sup_neg) * *f_neg;
  }
  return sum / static_cast<double>(sup_pos + sup_neg);
}

inline Counts flatten_counts(const Grid &pred, const Grid &gold) {
  Counts total;
  for (std::size_t c = 0; c < pred[0].size(); ++c) {
    Counts cc = counts(column(pred, c), column(gold, c));
    total.tp += cc.tp;
    total.fp += cc.fp;
    total.fn += cc.fn;
    total.tn += cc.tn;
  }
  return total;
}

inline std::optional<double> macro_f1(const Grid &pred, const Grid &gold, int *excluded) {
  double sum = 0.0;
  int defined = 0;
  int skipped = 0;
  for (std::size_t c = 0; c < pred[0].size(); ++c) {
    auto f = f1(counts(column(pred, c), column(gold, c)));
    if (f) {
      sum += *f;
      ++defined;
    } else {
      ++skipped;
    }
  }
  if (excluded) {
    *excluded = skipped;
  }
  if (defined == 0) {
    return std::nullopt;
  }
  return sum / defined;
}

inline double micro_accuracy(const Grid &pred, const Grid &gold) {
  long long match = 0;
  long long total = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t c = 0; c < pred[i].size(); ++c) {
      ++total;
      if (pred[i][c] == gold[i][c]) {
        ++match;
      }
    }
  }
  return static_cast<double>(match) / static_cast<double>(total);
}

inline std::optional<double> phi(const std::vector<int> &x, const std::vector<int> &y) {
  const double n = static_cast<double>(x.size());
  long long sx = 0;
  long long sy = 0;
  long long sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxy += x[i] * y[i];
  }
  const long long nn = static_cast<long long>(x.size());
  const long long vx = nn * sx - sx * sx;
  const long long vy = nn * sy - sy * sy;
  if (vx == 0 || vy == 0) {
    return std::nullopt;
  }
  const double cov = n * static_cast<double>(sxy) - static_cast<double>(sx) * static_cast<double>(sy);
  return cov / std::sqrt(static_cast<double>(vx) * static_cast<double>(vy));
}

inline std::optional<double> jaccard(const std::vector<int> &x, const std::vector<int> &y) {
  int inter = 0;
  int uni = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 1 && y[i] == 1) {
      ++inter;
    }
    if (x[i] == 1 || y[i] == 1) {
      ++uni;
    }
  }
  if (uni == 0) {
    return std::nullopt;
  }
  return static_cast<double>(inter) / static_cast<double>(uni);
}

} // namespace oracle
