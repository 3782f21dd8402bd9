#include <doctest.h>

#include <random>
#include <vector>

#include "helpers.hpp"
#include "oracle.hpp"
#include "pncoder/codebook.hpp"
#include "pncoder/errors.hpp"
#include "pncoder/metrics.hpp"

using namespace pncoder;
using testutil::Grid;

namespace {

AnnotationMatrix from_col(const std::vector<int> &col, const Codebook &cb,
                          const std::string &label) {
  Grid g(col.size(), std::vector<int>(cb.size(), 0));
  for (std::size_t i = 0; i < col.size(); ++i) {
    g[i][0] = col[i];
  }
  return testutil::matrix_from_grid(g, cb, "n", AnnotatorId::human(label));
}

} // namespace

TEST_CASE("percent agreement on a worked example") {
  Codebook cb = default_codebook();
  auto a = from_col({1, 1, 1, 1, 0, 0, 0, 0, 0, 0}, cb, "a");
  auto b = from_col({1, 1, 0, 0, 1, 0, 0, 0, 0, 0}, cb, "b");
  AgreementStats stats = percent_agreement(a, b);
  CHECK(stats.per_code[0] == doctest::Approx(0.7).epsilon(1e-12));
  // all other 13 columns agree fully
  for (std::size_t c = 1; c < 14; ++c) {
    CHECK(stats.per_code[c] == 1.0);
  }
  CHECK(stats.global == doctest::Approx((7.0 + 13.0 * 10.0) / 140.0).epsilon(1e-12));
}

TEST_CASE("kappa on a worked example") {
  Codebook cb = default_codebook();
  auto a = from_col({1, 1, 1, 1, 0, 0, 0, 0, 0, 0}, cb, "a");
  auto b = from_col({1, 1, 0, 0, 1, 0, 0, 0, 0, 0}, cb, "b");
  auto kappas = cohen_kappa(a, b);
  REQUIRE(kappas.size() == 14);
  REQUIRE(kappas[0].has_value());
  // p_o = 0.7, p_e = (4*3 + 6*7) / 100 = 0.54
  CHECK(*kappas[0] == doctest::Approx((0.7 - 0.54) / 0.46).epsilon(1e-12));
  // the untouched columns are all-zero on both sides, so kappa is undefined
  for (std::size_t c = 1; c < 14; ++c) {
    CHECK_FALSE(kappas[c].has_value());
  }
}

TEST_CASE("kappa undefined only for matching constant marginals") {
  Codebook cb = default_codebook();
  CHECK_FALSE(cohen_kappa(from_col({0, 0, 0}, cb, "a"), from_col({0, 0, 0}, cb, "b"))[0]);
  CHECK_FALSE(cohen_kappa(from_col({1, 1, 1}, cb, "a"), from_col({1, 1, 1}, cb, "b"))[0]);
  // one side constant, other mixed: defined
  auto k = cohen_kappa(from_col({0, 0, 0}, cb, "a"), from_col({1, 0, 0}, cb, "b"))[0];
  REQUIRE(k.has_value());
  CHECK(*k == doctest::Approx(0.0).epsilon(1e-12));
  // opposite constants: defined, negative
  auto k2 = cohen_kappa(from_col({1, 1, 0}, cb, "a"), from_col({0, 0, 1}, cb, "b"))[0];
  REQUIRE(k2.has_value());
  CHECK(*k2 < 0.0);
}

TEST_CASE("pabak equals two p_o minus one, bit for bit") {
  Codebook cb = default_codebook();
  std::mt19937 rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t rows = 3 + rng() % 30;
    auto a = testutil::matrix_from_grid(testutil::random_grid(rng, rows, 14), cb, "n",
                                        AnnotatorId::human("a"));
    auto b = testutil::matrix_from_grid(testutil::random_grid(rng, rows, 14), cb, "n",
                                        AnnotatorId::human("b"));
    AgreementStats po = percent_agreement(a, b);
    AgreementStats pk = pabak(a, b);
    for (std::size_t c = 0; c < 14; ++c) {
      CHECK(pk.per_code[c] == 2.0 * po.per_code[c] - 1.0);
    }
    CHECK(pk.global == 2.0 * po.global - 1.0);
  }
}

TEST_CASE("metrics match the brute-force oracle on random pairs") {
  Codebook cb = default_codebook();
  std::mt19937 rng(202);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t rows = 10 + rng() % 41;
    Grid ga = testutil::random_grid(rng, rows, 14);
    Grid gb = testutil::random_grid(rng, rows, 14);
    auto a = testutil::matrix_from_grid(ga, cb, "n", AnnotatorId::human("a"));
    auto b = testutil::matrix_from_grid(gb, cb, "n", AnnotatorId::human("b"));

    AgreementStats po = percent_agreement(a, b);
    auto kappas = cohen_kappa(a, b);
    AgreementStats pk = pabak(a, b);
    EvaluationReport rep = f1_scores(a, b, cb);

    for (std::size_t c = 0; c < 14; ++c) {
      auto ca = oracle::column(ga, c);
      auto cbv = oracle::column(gb, c);
      CHECK(po.per_code[c] == doctest::Approx(oracle::percent_agreement(ca, cbv)).epsilon(1e-12));
      CHECK(pk.per_code[c] == doctest::Approx(oracle::pabak(ca, cbv)).epsilon(1e-12));
      auto ok = oracle::kappa(ca, cbv);
      REQUIRE(kappas[c].has_value() == ok.has_value());
      if (ok) {
        CHECK(*kappas[c] == doctest::Approx(*ok).epsilon(1e-12));
      }
      auto counts = oracle::counts(ca, cbv);
      auto of1 = oracle::f1(counts);
      REQUIRE(rep.per_code[c].f1_positive.has_value() == of1.has_value());
      if (of1) {
        CHECK(*rep.per_code[c].f1_positive == doctest::Approx(*of1).epsilon(1e-12));
      }
      auto ow = oracle::f1_weighted(counts);
      REQUIRE(rep.per_code[c].f1_weighted.has_value() == ow.has_value());
      if (ow) {
        CHECK(*rep.per_code[c].f1_weighted == doctest::Approx(*ow).epsilon(1e-12));
      }
    }

    auto micro = oracle::f1(oracle::flatten_counts(ga, gb));
    REQUIRE(rep.micro_f1.has_value() == micro.has_value());
    if (micro) {
      CHECK(*rep.micro_f1 == doctest::Approx(*micro).epsilon(1e-12));
    }
    int excluded = 0;
    auto macro = oracle::macro_f1(ga, gb, &excluded);
    REQUIRE(rep.macro_f1.has_value() == macro.has_value());
    if (macro) {
      CHECK(*rep.macro_f1 == doctest::Approx(*macro).epsilon(1e-12));
    }
    CHECK(rep.macro_exclusions == excluded);
  }
}

TEST_CASE("confusion-derived metrics handle empty denominators") {
  Codebook cb = default_codebook();
  // gold all zero, pred all zero for code 0: no positives anywhere
  auto pred = from_col({0, 0, 0, 0}, cb, "p");
  auto gold = from_col({0, 0, 0, 0}, cb, "g");
  EvaluationReport rep = f1_scores(pred, gold, cb);
  CHECK_FALSE(rep.per_code[0].precision.has_value());
  CHECK_FALSE(rep.per_code[0].recall.has_value());
  CHECK_FALSE(rep.per_code[0].f1_positive.has_value());
  // negative class carries all the support, its F1 is defined
  REQUIRE(rep.per_code[0].f1_weighted.has_value());
  CHECK(*rep.per_code[0].f1_weighted == doctest::Approx(1.0));
  CHECK(rep.per_code[0].support == 0);

  // pred positive, gold empty: precision defined (0), recall undefined
  auto pred2 = from_col({1, 1, 0, 0}, cb, "p");
  EvaluationReport rep2 = f1_scores(pred2, gold, cb);
  REQUIRE(rep2.per_code[0].precision.has_value());
  CHECK(*rep2.per_code[0].precision == 0.0);
  CHECK_FALSE(rep2.per_code[0].recall.has_value());
  CHECK_FALSE(rep2.per_code[0].f1_positive.has_value());

  // gold positive, pred empty: recall defined (0), precision undefined
  EvaluationReport rep3 = f1_scores(gold, pred2, cb);
  CHECK_FALSE(rep3.per_code[0].precision.has_value());
  REQUIRE(rep3.per_code[0].recall.has_value());
  CHECK(*rep3.per_code[0].recall == 0.0);
}

TEST_CASE("evaluation rows carry averages and support") {
  Codebook cb = default_codebook();
  auto pred = from_col({1, 1, 1, 0}, cb, "p"); // 3 positives
  auto gold = from_col({1, 0, 0, 1}, cb, "g"); // 2 positives
  EvaluationReport rep = f1_scores(pred, gold, cb);
  CHECK(rep.per_code[0].avg_positive_count == doctest::Approx(2.5));
  CHECK(rep.per_code[0].support == 2);
  CHECK(rep.per_code[0].code_id == "self");
  CHECK(rep.annotator_labels.size() == 2);
}

TEST_CASE("minimum-match gold covers every cell combination") {
  Codebook cb = default_codebook();
  // (a, b, pred) exhaustive: gold = a==b ? a : pred
  for (int a = 0; a <= 1; ++a) {
    for (int b = 0; b <= 1; ++b) {
      for (int p = 0; p <= 1; ++p) {
        auto pm = from_col({p}, cb, "pred");
        auto am = from_col({a}, cb, "a");
        auto bm = from_col({b}, cb, "b");
        AnnotationMatrix gold = minimum_match_gold(pm, {am, bm});
        int expected = (a == b) ? a : p;
        CHECK(gold.cell(0, 0) == expected);
      }
    }
  }
}

TEST_CASE("minimum-match never scores below any single annotator") {
  Codebook cb = default_codebook();
  std::mt19937 rng(303);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t rows = 5 + rng() % 20;
    auto pred = testutil::matrix_from_grid(testutil::random_grid(rng, rows, 14), cb, "n",
                                           AnnotatorId::human("p"));
    auto a = testutil::matrix_from_grid(testutil::random_grid(rng, rows, 14), cb, "n",
                                        AnnotatorId::human("a"));
    auto b = testutil::matrix_from_grid(testutil::random_grid(rng, rows, 14), cb, "n",
                                        AnnotatorId::human("b"));
    AnnotationMatrix gold = minimum_match_gold(pred, {a, b});
    double vs_gold = micro_accuracy(pred, gold);
    CHECK(vs_gold >= micro_accuracy(pred, a));
    CHECK(vs_gold >= micro_accuracy(pred, b));
  }
}

TEST_CASE("majority gold takes the strict majority and flags pairs") {
  Codebook cb = default_codebook();
  auto a = from_col({1, 1, 0}, cb, "a");
  auto b = from_col({1, 0, 0}, cb, "b");
  auto c = from_col({0, 1, 0}, cb, "c");
  AnnotationMatrix gold = majority_gold({a, b, c});
  CHECK(gold.cell(0, 0) == 1); // 2 of 3
  CHECK(gold.cell(1, 0) == 1);
  CHECK(gold.cell(2, 0) == 0);

  std::vector<std::string> warnings;
  AnnotationMatrix pair = majority_gold({a, b}, TieBreak::One, &warnings);
  CHECK(pair.cell(1, 0) == 1); // 1-1 tie -> One
  CHECK(warnings.size() == 1);

  CHECK_THROWS_AS(majority_gold({a}), ValidationError);
}

TEST_CASE("metric inputs must be aligned") {
  Codebook cb = default_codebook();
  auto a = from_col({1, 0}, cb, "a");
  Grid g3(3, std::vector<int>(14, 0));
  auto b = testutil::matrix_from_grid(g3, cb, "n", AnnotatorId::human("b"));
  CHECK_THROWS_AS(percent_agreement(a, b), AlignmentError);

  auto other_narrative = testutil::matrix_from_grid(testutil::grid_from_matrix(a), cb, "m",
                                                    AnnotatorId::human("b"));
  CHECK_THROWS_AS(cohen_kappa(a, other_narrative), AlignmentError);

  Codebook renamed("pn-x", cb.codes());
  auto other_version = testutil::matrix_from_grid(testutil::grid_from_matrix(a), renamed, "n",
                                                  AnnotatorId::human("b"));
  CHECK_THROWS_AS(f1_scores(a, other_version, cb), AlignmentError);
}

TEST_CASE("phi matches hand values and the oracle") {
  Codebook cb = default_codebook();
  Grid g(4, std::vector<int>(14, 0));
  // code 0: 1,1,0,0; code 1: 1,0,1,0 -> phi 0
  g[0][0] = g[1][0] = 1;
  g[0][1] = g[2][1] = 1;
  // code 2 == code 0 -> phi 1
  g[0][2] = g[1][2] = 1;
  auto m = testutil::matrix_from_grid(g, cb, "n", AnnotatorId::human("a"));
  CHECK(*phi_coefficient(m.column(0), m.column(1)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(*phi_coefficient(m.column(0), m.column(2)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(phi_coefficient(m.column(0), m.column(3)).has_value()); // constant column

  std::mt19937 rng(404);
  for (int trial = 0; trial < 30; ++trial) {
    Grid r = testutil::random_grid(rng, 12, 2);
    std::vector<std::uint8_t> cx, cy;
    std::vector<int> ox, oy;
    for (auto &row : r) {
      cx.push_back(static_cast<std::uint8_t>(row[0]));
      cy.push_back(static_cast<std::uint8_t>(row[1]));
      ox.push_back(row[0]);
      oy.push_back(row[1]);
    }
    auto got = phi_coefficient(cx, cy);
    auto want = oracle::phi(ox, oy);
    REQUIRE(got.has_value() == want.has_value());
    if (want) {
      CHECK(*got == doctest::Approx(*want).epsilon(1e-12));
    }
  }
}

TEST_CASE("jaccard matches hand values") {
  std::vector<std::uint8_t> x{1, 1, 0};
  std::vector<std::uint8_t> y{0, 1, 1};
  CHECK(*jaccard_index(x, y) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  std::vector<std::uint8_t> zero{0, 0, 0};
  CHECK_FALSE(jaccard_index(zero, zero).has_value());
  CHECK(*jaccard_index(x, x) == 1.0);
}

TEST_CASE("co-occurrence matrices aggregate over defined narratives only") {
  Codebook cb = default_codebook();
  // narrative 1: codes 0 and 1 both vary -> phi defined
  Grid g1(4, std::vector<int>(14, 0));
  g1[0][0] = g1[1][0] = 1;
  g1[0][1] = g1[1][1] = 1; // identical -> phi 1
  // narrative 2: code 1 constant -> phi undefined for (0,1)
  Grid g2(4, std::vector<int>(14, 0));
  g2[0][0] = 1;
  auto m1 = testutil::matrix_from_grid(g1, cb, "n1", AnnotatorId::human("a"));
  auto m2 = testutil::matrix_from_grid(g2, cb, "n2", AnnotatorId::human("a"));

  CooccurrenceMatrix p = pearson_matrix({m1, m2});
  REQUIRE(p[0][1].value.has_value());
  CHECK(*p[0][1].value == doctest::Approx(1.0).epsilon(1e-12)); // mean of the one defined value
  CHECK(p[0][1].narratives == 1);
  CHECK(p[1][0].value == p[0][1].value); // symmetric
  CHECK(*p[0][0].value == 1.0);          // diagonal pinned
  CHECK(p[0][0].narratives == 2);

  CooccurrenceMatrix j = jaccard_matrix({m1, m2});
  // J(0,1): narrative 1 gives 1.0, narrative 2 gives 0.0 (union nonempty)
  REQUIRE(j[0][1].value.has_value());
  CHECK(*j[0][1].value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(j[0][1].narratives == 2);
  // code 2 never appears: undefined everywhere including diagonal
  CHECK_FALSE(j[2][2].value.has_value());
}

TEST_CASE("stacking matrices concatenates rows") {
  Codebook cb = default_codebook();
  Grid g1(2, std::vector<int>(14, 0));
  Grid g2(3, std::vector<int>(14, 0));
  g1[0][0] = 1;
  g2[2][13] = 1;
  auto m1 = testutil::matrix_from_grid(g1, cb, "n1", AnnotatorId::human("a"));
  auto m2 = testutil::matrix_from_grid(g2, cb, "n2", AnnotatorId::human("a"));
  AnnotationMatrix stacked = stack_matrices({m1, m2});
  CHECK(stacked.rows() == 5);
  CHECK(stacked.narrative_id() == "n1+n2");
  CHECK(stacked.cell(0, 0) == 1);
  CHECK(stacked.cell(4, 13) == 1);
}
