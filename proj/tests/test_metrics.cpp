#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "citerec/error.hpp"
#include "citerec/metrics.hpp"

using namespace citerec;

// ---------------------------------------------------------------- prf

TEST_CASE("precision, recall and f1 from raw counts") {
  Prf p = prf({30, 10, 90, 0});
  CHECK(p.precision == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(p.recall == doctest::Approx(0.25).epsilon(1e-12));
  // harmonic mean: 2 * 0.75 * 0.25 / 1.0
  CHECK(p.f1 == doctest::Approx(0.375).epsilon(1e-12));
}

TEST_CASE("empty denominators score zero instead of dividing") {
  Prf none = prf({0, 0, 0, 10});
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);

  Prf no_preds = prf({0, 0, 5, 0});  // never predicted the class
  CHECK(no_preds.precision == 0.0);
  CHECK(no_preds.recall == 0.0);
  CHECK(no_preds.f1 == 0.0);

  Prf no_truth = prf({0, 4, 0, 0});  // class absent from the truth
  CHECK(no_truth.precision == 0.0);
  CHECK(no_truth.f1 == 0.0);
}

TEST_CASE("macro averaging is the unweighted mean, f1 included") {
  std::vector<Prf> per_class{{0.7313, 0.1391, 0.2338}, {0.8504, 0.9897, 0.9148}};
  Prf m = macro_average(per_class);

  // independent arithmetic at extended precision
  long double ep = (0.7313L + 0.8504L) / 2.0L;
  long double er = (0.1391L + 0.9897L) / 2.0L;
  long double ef = (0.2338L + 0.9148L) / 2.0L;
  CHECK(m.precision == doctest::Approx(static_cast<double>(ep)).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(static_cast<double>(er)).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(static_cast<double>(ef)).epsilon(1e-12));

  // the macro f1 is the mean of the class f1 values, which differs
  // from the harmonic mean of the macro precision and recall
  double harmonic = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  CHECK(std::abs(m.f1 - harmonic) > 0.05);

  CHECK_THROWS_AS(macro_average({}), Error);
}

// ---------------------------------------------------------------- confusion

TEST_CASE("confusion tallies cells and one-vs-rest counts") {
  std::vector<std::string> truth{"a", "a", "b", "b", "b", "c"};
  std::vector<std::string> pred{"a", "b", "b", "b", "c", "c"};
  Confusion c = confusion(truth, pred, {"a", "b", "c"});

  CHECK(c.table.at(0, 0) == 1);  // a -> a
  CHECK(c.table.at(0, 1) == 1);  // a -> b
  CHECK(c.table.at(1, 1) == 2);  // b -> b
  CHECK(c.table.at(1, 2) == 1);  // b -> c
  CHECK(c.table.at(2, 2) == 1);  // c -> c
  CHECK(c.table.total() == 6);
  CHECK(c.table.row_sum(1) == 3);
  CHECK(c.table.col_sum(2) == 2);

  // class b one-vs-rest: tp 2, fp 1 (the stray a), fn 1 (the b -> c), tn 2
  CHECK(c.per_class[1].tp == 2);
  CHECK(c.per_class[1].fp == 1);
  CHECK(c.per_class[1].fn == 1);
  CHECK(c.per_class[1].tn == 2);
  // the four counts always cover every item
  for (const ClassCounts& cc : c.per_class) CHECK(cc.tp + cc.fp + cc.fn + cc.tn == 6);
}

TEST_CASE("confusion rejects strays and ragged inputs") {
  CHECK_THROWS_AS(confusion({"a", "x"}, {"a", "a"}, {"a", "b"}), Error);
  CHECK_THROWS_AS(confusion({"a", "a"}, {"a", "x"}, {"a", "b"}), Error);
  try {
    confusion({"a", "a", "a"}, {"a", "a"}, {"a"});
    FAIL("expected a size mismatch error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::alignment);
  }
}

// ---------------------------------------------------------------- kappa

namespace {

LabelTable table_of(const std::vector<std::string>& classes, const std::vector<long>& cells) {
  LabelTable t;
  t.classes = classes;
  t.cells = cells;
  return t;
}

}  // namespace

TEST_CASE("kappa on a balanced two-annotator table") {
  // 80 agreements of 100 with uniform marginals: P_o = 0.8, P_e = 0.5,
  // kappa = 0.3 / 0.5
  LabelTable t = table_of({"yes", "no"}, {40, 10, 10, 40});
  CHECK(cohen_kappa(t) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("kappa is exactly one on a diagonal table") {
  LabelTable t = table_of({"x", "y"}, {7, 0, 0, 3});
  CHECK(cohen_kappa(t) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kappa on a four-way annotation table") {
  LabelTable t = table_of({"Method", "Conclusion", "Goal", "Object"},
                          {347, 35, 7, 23,   //
                           13, 285, 6, 52,   //
                           7, 11, 16, 1,     //
                           16, 40, 1, 140});
  // independent recomputation from the marginals
  long double n = 1000.0L;
  long double po = (347.0L + 285.0L + 16.0L + 140.0L) / n;
  long double rows[4] = {412.0L, 356.0L, 35.0L, 197.0L};
  long double cols[4] = {383.0L, 371.0L, 30.0L, 216.0L};
  long double pe = 0.0L;
  for (int i = 0; i < 4; ++i) pe += rows[i] * cols[i];
  pe /= n * n;
  long double want = (po - pe) / (1.0L - pe);

  double got = cohen_kappa(t);
  CHECK(got == doctest::Approx(static_cast<double>(want)).epsilon(1e-12));
  CHECK(std::abs(got - 0.6819) < 5e-5);
}

TEST_CASE("kappa refuses degenerate tables") {
  CHECK_THROWS_AS(cohen_kappa(table_of({"a", "b"}, {0, 0, 0, 0})), Error);
  // every vote in one cell makes expected agreement 1
  CHECK_THROWS_AS(cohen_kappa(table_of({"a", "b"}, {5, 0, 0, 0})), Error);
}

// ---------------------------------------------------------------- predictions

TEST_CASE("prediction records survive a save/load round trip") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / ("citerec_mx_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::string path = (dir / "preds.jsonl").string();

  std::vector<Prediction> preds(2);
  preds[0].query_id = "q1";
  preds[0].candidate_id = "p1";
  preds[0].p_cite = 0.75;
  preds[0].p_not_cite = 0.25;
  preds[0].recommended = true;
  preds[0].p_az = {0.5, 0.2, 0.1, 0.1, 0.1};
  preds[0].az_pred = AzLabel::method;
  preds[1].query_id = "q1";
  preds[1].candidate_id = "p2";
  preds[1].p_cite = 0.1;
  preds[1].p_not_cite = 0.9;
  preds[1].recommended = false;
  preds[1].az_pred = AzLabel::other;

  save_predictions(path, preds);
  auto back = load_predictions(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].query_id == "q1");
  CHECK(back[0].p_cite == 0.75);
  CHECK(back[0].recommended);
  CHECK(back[0].p_az == preds[0].p_az);
  CHECK(back[0].az_pred == AzLabel::method);
  CHECK_FALSE(back[1].recommended);

  CHECK_THROWS_AS(load_predictions((dir / "absent.jsonl").string()), Error);
  fs::remove_all(dir);
}

// ---------------------------------------------------------------- recall delta

namespace {

Prediction pred_of(const std::string& qid, const std::string& cid, bool recommended) {
  Prediction p;
  p.query_id = qid;
  p.candidate_id = cid;
  p.p_cite = recommended ? 0.9 : 0.1;
  p.p_not_cite = 1.0 - p.p_cite;
  p.recommended = recommended;
  return p;
}

Example truth_of(const std::string& qid, const std::string& cid, CiteLabel cite, AzLabel az) {
  return Example{qid, cid, cite, az};
}

}  // namespace

TEST_CASE("recall delta buckets recovered citations by zone category") {
  std::vector<Example> truth{
      truth_of("q1", "c1", CiteLabel::cite, AzLabel::method),
      truth_of("q1", "n1", CiteLabel::not_cite, AzLabel::method),
      truth_of("q2", "c2", CiteLabel::cite, AzLabel::goal),
      truth_of("q3", "c3", CiteLabel::cite, AzLabel::method),
  };
  // a misses q1:c1, b catches it; b misses q2:c2, a catches it; both
  // catch q3:c3. Negatives never enter the tally.
  std::vector<Prediction> a{pred_of("q1", "c1", false), pred_of("q1", "n1", true),
                            pred_of("q2", "c2", true), pred_of("q3", "c3", true)};
  std::vector<Prediction> b{pred_of("q1", "c1", true), pred_of("q1", "n1", false),
                            pred_of("q2", "c2", false), pred_of("q3", "c3", true)};
  RecallDelta d = recall_delta(a, b, truth);
  REQUIRE(d.gained_lost.count(AzLabel::method) == 1);
  REQUIRE(d.gained_lost.count(AzLabel::goal) == 1);
  CHECK(d.gained_lost.at(AzLabel::method).first == 1);   // b only
  CHECK(d.gained_lost.at(AzLabel::method).second == 0);  // a only
  CHECK(d.gained_lost.at(AzLabel::goal).first == 0);
  CHECK(d.gained_lost.at(AzLabel::goal).second == 1);
  CHECK(d.gained_lost.count(AzLabel::conclusion) == 0);  // no positives of that zone
}

TEST_CASE("recall delta demands the same pair coverage on both sides") {
  std::vector<Example> truth{truth_of("q1", "c1", CiteLabel::cite, AzLabel::method)};
  std::vector<Prediction> a{pred_of("q1", "c1", true)};
  std::vector<Prediction> b{pred_of("q1", "cX", true)};
  try {
    recall_delta(a, b, truth);
    FAIL("expected an alignment error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::alignment);
  }
}

// ---------------------------------------------------------------- table rendering

TEST_CASE("the macro table renders fixed columns in both formats") {
  std::vector<std::pair<std::string, Prf>> rows{{"m1", {0.75, 0.25, 0.375}}};
  CHECK(render_macro_table(rows, false) ==
        "Model\tMacro_P\tMacro_R\tMacro_F1\n"
        "m1\t0.7500\t0.2500\t0.3750\n");
  CHECK(render_macro_table(rows, true) ==
        "| Model | Macro_P | Macro_R | Macro_F1 |\n"
        "| --- | --- | --- | --- |\n"
        "| m1 | 0.7500 | 0.2500 | 0.3750 |\n");
}

TEST_CASE("the per-class table nests class rows under each model") {
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, Prf>>>> rows{
      {"m1", {{"cite", {1.0, 0.5, 2.0 / 3.0}}, {"not_cite", {0.8, 1.0, 8.0 / 9.0}}}}};
  std::string tsv = render_per_class_table(rows, false);
  CHECK(tsv ==
        "Model\tClass\tP\tR\tF1\n"
        "m1\tcite\t1.0000\t0.5000\t0.6667\n"
        "m1\tnot_cite\t0.8000\t1.0000\t0.8889\n");
}

TEST_CASE("the delta table names the models in its header") {
  RecallDelta d;
  d.gained_lost[AzLabel::method] = {3, 1};
  d.gained_lost[AzLabel::object] = {0, 2};
  std::string tsv = render_delta_table(d, "ave", "bee", false);
  CHECK(tsv ==
        "Category\tRecovered only by bee\tRecovered only by ave\n"
        "Method\t3\t1\n"
        "Object\t0\t2\n");
  std::string md = render_delta_table(d, "ave", "bee", true);
  CHECK(md.find("| Method | 3 | 1 |") != std::string::npos);
}
