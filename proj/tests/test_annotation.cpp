#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "pncoder/annotation.hpp"
#include "pncoder/codebook.hpp"
#include "pncoder/corpus.hpp"
#include "pncoder/errors.hpp"

using namespace pncoder;
using testutil::Grid;

namespace {

RunSet make_runset(const Codebook &cb, const std::vector<Grid> &grids,
                   const std::string &narrative_id = "n") {
  RunSet rs;
  rs.narrative_id = narrative_id;
  for (std::size_t i = 0; i < grids.size(); ++i) {
    rs.runs.push_back(testutil::matrix_from_grid(
        grids[i], cb, narrative_id, AnnotatorId::model_run("m", static_cast<int>(i))));
  }
  return rs;
}

} // namespace

TEST_CASE("annotator ids carry provenance") {
  AnnotatorId h = AnnotatorId::human("coder_a");
  CHECK(h.kind == AnnotatorKind::Human);
  CHECK(h.label == "coder_a");

  AnnotatorId m = AnnotatorId::model_run("gpt-x", 2);
  CHECK(m.kind == AnnotatorKind::ModelRun);
  CHECK(m.label == "gpt-x/run2");
  CHECK(m.model_name == "gpt-x");
  CHECK(m.run_index == 2);
  CHECK(m.prompt_variant == "cot-chain");
}

TEST_CASE("matrix cells default to zero and are bounds-checked") {
  Codebook cb = default_codebook();
  AnnotationMatrix m("n", cb.version(), AnnotatorId::human("a"), 4, cb.size());
  CHECK(m.rows() == 4);
  CHECK(m.cols() == 14);
  CHECK(m.cell(0, 0) == 0);
  m.set_cell(1, 2, 1);
  CHECK(m.cell(1, 2) == 1);
  CHECK(m.column(2) == std::vector<std::uint8_t>{0, 1, 0, 0});
  CHECK_THROWS_AS(m.cell(4, 0), ValidationError);
  CHECK_THROWS_AS(m.set_cell(0, 14, 1), ValidationError);
  CHECK_THROWS_AS(m.set_cell(0, 0, 2), ValidationError);
}

TEST_CASE("alignment validation flags off-shape and non-binary grids") {
  Codebook cb = default_codebook();
  NarrativeDocument doc = document_from_text("n", "One here. Two here. Three here.");
  AnnotationMatrix good("n", cb.version(), AnnotatorId::human("a"), 3, 14);
  CHECK(validate_alignment(good, doc, cb).empty());

  AnnotationMatrix short_rows("n", cb.version(), AnnotatorId::human("a"), 2, 14);
  CHECK_FALSE(validate_alignment(short_rows, doc, cb).empty());

  std::vector<std::vector<long long>> raw(3, std::vector<long long>(14, 0));
  raw[1][3] = 2;
  auto violations = validate_alignment(raw, doc, cb);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].kind == AlignmentViolationKind::NonBinaryCell);
  CHECK(violations[0].row == 1);
  CHECK(violations[0].col == 3);
}

TEST_CASE("majority vote applies a strict per-cell majority") {
  Codebook cb = default_codebook();
  Grid a(2, std::vector<int>(14, 0));
  Grid b(2, std::vector<int>(14, 0));
  Grid c(2, std::vector<int>(14, 0));
  a[0][0] = 1;
  b[0][0] = 1; // two of three agree -> 1
  c[1][1] = 1; // one of three -> 0
  RunSet rs = make_runset(cb, {a, b, c});
  AnnotationMatrix voted = majority_vote(rs);
  CHECK(voted.cell(0, 0) == 1);
  CHECK(voted.cell(1, 1) == 0);
  CHECK(voted.annotator().label == "m/majority");
  CHECK(voted.narrative_id() == "n");
}

TEST_CASE("majority vote resolves even ties via the tie rule") {
  Codebook cb = default_codebook();
  Grid a(1, std::vector<int>(14, 0));
  Grid b(1, std::vector<int>(14, 0));
  a[0][5] = 1; // 1-1 split
  RunSet rs = make_runset(cb, {a, b});
  CHECK(majority_vote(rs, TieBreak::Zero).cell(0, 5) == 0);
  CHECK(majority_vote(rs, TieBreak::One).cell(0, 5) == 1);
}

TEST_CASE("majority vote is invariant under run order") {
  Codebook cb = default_codebook();
  std::mt19937 rng(77);
  std::vector<Grid> grids;
  for (int i = 0; i < 5; ++i) {
    grids.push_back(testutil::random_grid(rng, 8, 14));
  }
  RunSet forward = make_runset(cb, grids);
  std::reverse(grids.begin(), grids.end());
  RunSet backward = make_runset(cb, grids);
  CHECK(majority_vote(forward).cells_equal(majority_vote(backward)));
}

TEST_CASE("voting an already unanimous run set is idempotent") {
  Codebook cb = default_codebook();
  std::mt19937 rng(78);
  Grid g = testutil::random_grid(rng, 10, 14);
  RunSet rs = make_runset(cb, {g, g, g});
  AnnotationMatrix voted = majority_vote(rs);
  CHECK(voted.cells_equal(rs.runs.front()));
}

TEST_CASE("run sets must be coherent") {
  Codebook cb = default_codebook();
  RunSet empty;
  empty.narrative_id = "n";
  CHECK_THROWS_AS(empty.validate(), ValidationError);

  Grid a(2, std::vector<int>(14, 0));
  Grid b(3, std::vector<int>(14, 0));
  RunSet mixed = make_runset(cb, {a});
  mixed.runs.push_back(testutil::matrix_from_grid(b, cb, "n", AnnotatorId::model_run("m", 1)));
  CHECK_THROWS_AS(mixed.validate(), ValidationError);
}

TEST_CASE("code frequencies are percentages per code") {
  Codebook cb = default_codebook();
  Grid g(4, std::vector<int>(14, 0));
  g[0][0] = g[1][0] = 1;       // self in 2 of 4 -> 50%
  g[2][13] = 1;                // nightmare in 1 of 4 -> 25%
  AnnotationMatrix m = testutil::matrix_from_grid(g, cb, "n", AnnotatorId::human("a"));
  auto freq = code_frequencies(m);
  REQUIRE(freq.size() == 14);
  CHECK(freq[0] == doctest::Approx(50.0));
  CHECK(freq[13] == doctest::Approx(25.0));
  CHECK(freq[1] == doctest::Approx(0.0));
}

TEST_CASE("mean frequencies average per-narrative percentages unweighted") {
  Codebook cb = default_codebook();
  Grid a(2, std::vector<int>(14, 0)); // self 50%
  a[0][0] = 1;
  Grid b(10, std::vector<int>(14, 0)); // self 100%
  for (auto &row : b) {
    row[0] = 1;
  }
  auto m1 = testutil::matrix_from_grid(a, cb, "n1", AnnotatorId::human("x"));
  auto m2 = testutil::matrix_from_grid(b, cb, "n2", AnnotatorId::human("x"));
  auto mean = mean_code_frequencies({m1, m2});
  CHECK(mean[0] == doctest::Approx(75.0)); // (50 + 100) / 2, not 11/12
}

TEST_CASE("matrix CSV round-trips with provenance comments") {
  Codebook cb = default_codebook();
  std::mt19937 rng(5);
  Grid g = testutil::random_grid(rng, 6, 14);
  AnnotationMatrix m = testutil::matrix_from_grid(g, cb, "story7", AnnotatorId::human("coder_b"));
  std::string csv = matrix_to_csv(m, cb);
  CHECK(csv.find("# annotator: coder_b\n") != std::string::npos);
  CHECK(csv.find("# narrative: story7\n") != std::string::npos);
  CHECK(csv.find("sentence_index,self,us,now,") != std::string::npos);

  AnnotationMatrix back = parse_matrix_csv(csv, cb, AnnotatorId::human("ignored"), "ignored");
  CHECK(back.cells_equal(m));
  CHECK(back.annotator().label == "coder_b");
  CHECK(back.narrative_id() == "story7");
}

TEST_CASE("matrix CSV parsing rejects malformed input") {
  Codebook cb = default_codebook();
  std::string header = "sentence_index";
  for (const Code &c : cb.codes()) {
    header += "," + c.id;
  }
  CHECK_THROWS_AS(parse_matrix_csv("bad,header\n0,1\n", cb, AnnotatorId::human("a"), "n"),
                  ParseError);
  CHECK_THROWS_AS(parse_matrix_csv(header + "\n0,1,0\n", cb, AnnotatorId::human("a"), "n"),
                  ParseError);
  std::string nonbinary = header + "\n0";
  for (int i = 0; i < 14; ++i) {
    nonbinary += ",0";
  }
  nonbinary[nonbinary.size() - 1] = '2';
  CHECK_THROWS_AS(parse_matrix_csv(nonbinary + "\n", cb, AnnotatorId::human("a"), "n"),
                  ParseError);
  CHECK_THROWS_AS(parse_matrix_csv(header + "\n", cb, AnnotatorId::human("a"), "n"),
                  ParseError); // no rows
}

TEST_CASE("human CSV import aligns against the document") {
  Codebook cb = default_codebook();
  NarrativeDocument doc = document_from_text("n", "One here. Two here.");
  testutil::TempDir tmp("import_csv");
  auto path = tmp.path() / "coder.csv";

  Grid g(2, std::vector<int>(14, 0));
  g[1][4] = 1;
  AnnotationMatrix m = testutil::matrix_from_grid(g, cb, "n", AnnotatorId::human("coder"));
  save_matrix_csv(m, cb, path);
  AnnotationMatrix imported = import_human_csv(path, doc, cb);
  CHECK(imported.cells_equal(m));

  NarrativeDocument longer = document_from_text("n", "One here. Two here. Three here.");
  CHECK_THROWS_AS(import_human_csv(path, longer, cb), AlignmentError);
}

TEST_CASE("run sets round-trip through JSON") {
  Codebook cb = default_codebook();
  std::mt19937 rng(11);
  std::vector<Grid> grids;
  for (int i = 0; i < 3; ++i) {
    grids.push_back(testutil::random_grid(rng, 5, 14));
  }
  RunSet rs = make_runset(cb, grids, "story3");
  rs.raw_transcripts = {"{\"stage\":1}\n", "{\"stage\":1}\n", "{\"stage\":1}\n"};

  std::string json = runset_to_json(rs, cb);
  RunSet back = parse_runset(json, cb);
  REQUIRE(back.runs.size() == 3);
  CHECK(back.narrative_id == "story3");
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.runs[i].cells_equal(rs.runs[i]));
    CHECK(back.runs[i].annotator().label == rs.runs[i].annotator().label);
  }
  CHECK(back.raw_transcripts == rs.raw_transcripts);
  CHECK(runset_to_json(back, cb) == json);
}

TEST_CASE("run set parsing validates codebook identity") {
  Codebook cb = default_codebook();
  std::mt19937 rng(12);
  RunSet rs = make_runset(cb, {testutil::random_grid(rng, 3, 14)});
  std::string json = runset_to_json(rs, cb);

  Codebook other("other-1", cb.codes());
  CHECK_THROWS_AS(parse_runset(json, other), ValidationError);
  CHECK_THROWS_AS(parse_runset("{}", cb), ParseError);
  CHECK_THROWS_AS(parse_runset("[]", cb), ParseError);
}
