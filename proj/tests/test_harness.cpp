#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "citerec/dataset.hpp"
#include "citerec/error.hpp"
#include "citerec/harness.hpp"
#include "citerec/ingest.hpp"
#include "citerec/metrics.hpp"
#include "citerec/synth.hpp"

using namespace citerec;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("citerec_harness_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  REQUIRE(bool(f));
  f << content;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(bool(f));
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(bool(f));
  std::string line;
  std::size_t n = 0;
  while (std::getline(f, line))
    if (!line.empty()) ++n;
  return n;
}

Example mk_ex(std::string qid, std::string cid, CiteLabel cite, AzLabel az) {
  Example e;
  e.query_id = std::move(qid);
  e.candidate_id = std::move(cid);
  e.cite = cite;
  e.az = az;
  return e;
}

Prediction mk_pred(std::string qid, std::string cid, bool recommended, AzLabel az_pred) {
  Prediction p;
  p.query_id = std::move(qid);
  p.candidate_id = std::move(cid);
  p.p_cite = recommended ? 0.8 : 0.2;
  p.p_not_cite = 1.0 - p.p_cite;
  p.recommended = recommended;
  p.p_az.assign(kAzCount, 1.0 / kAzCount);
  p.az_pred = az_pred;
  return p;
}

// Configuration small enough that a full sweep finishes in a couple of
// seconds while still exercising every artifact the driver produces.
ExperimentConfig tiny_experiment(const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.synthetic = true;
  cfg.synth.topics = 3;
  cfg.synth.queries_per_paper = 2;
  cfg.synth.seed = 5;
  cfg.negatives.ratio = 2;
  cfg.test_size = 6;
  cfg.test_mode = TestSizeMode::queries;
  cfg.alpha_sweep = {0.1};
  cfg.include_baseline = true;
  cfg.out_dir = out_dir;
  cfg.train.seed = 21;
  cfg.train.epochs = 2;
  cfg.train.batch_size = 16;
  cfg.train.block_size = 4;
  cfg.train.learning_rate = 0.05;
  cfg.train.patience = 0;
  cfg.train.vocab_min_frequency = 1;
  cfg.train.dims.embed = 8;
  cfg.train.dims.hidden = 5;
  cfg.train.dims.attention = 5;
  cfg.train.dims.sentence = 5;
  cfg.train.dims.fuse1 = 10;
  cfg.train.dims.fuse2 = 10;
  cfg.train.dims.zone_hidden = 5;
  cfg.train.dims.max_query_tokens = 12;
  cfg.train.dims.max_title_tokens = 8;
  cfg.train.dims.max_abstract_tokens = 16;
  return cfg;
}

int run_cli(std::vector<std::string> args, std::string* captured = nullptr) {
  args.insert(args.begin(), "citerec");
  std::vector<char*> argv;
  argv.reserve(args.size());
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream sink;
  std::streambuf* old = std::cout.rdbuf(sink.rdbuf());
  int rc = -1;
  try {
    rc = cli(static_cast<int>(argv.size()), argv.data());
  } catch (...) {
    std::cout.rdbuf(old);
    throw;
  }
  std::cout.rdbuf(old);
  if (captured) *captured = sink.str();
  return rc;
}

// Pulls one row out of a rendered TSV table by its first column.
std::vector<double> tsv_row_values(const std::string& path, const std::string& row_label) {
  std::ifstream f(path);
  REQUIRE(bool(f));
  std::string line;
  while (std::getline(f, line)) {
    std::istringstream ls(line);
    std::string col;
    std::getline(ls, col, '\t');
    if (col != row_label) continue;
    std::vector<double> vals;
    while (std::getline(ls, col, '\t')) {
      try {
        vals.push_back(std::stod(col));
      } catch (const std::exception&) {
        vals.push_back(std::nan(""));
      }
    }
    return vals;
  }
  FAIL("row '" << row_label << "' not found in " << path);
  return {};
}

std::string hex16(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

TEST_CASE("config files tolerate comments and loose spacing") {
  TempDir tmp;
  std::string path = tmp.file("exp.cfg");
  write_text(path,
             "# sweep setup\n"
             "\n"
             "synthetic = true\n"
             "synth_topics=4   # inline note\n"
             "  alpha_sweep = 0.1, 0.2 , 0.3\n"
             "include_baseline = no\n"
             "test_mode = examples\n"
             "test_size = 40\n"
             "strata = 4, 1, 2\n"
             "ratio = 3\n"
             "learning_rate = 0.025\n"
             "seed = 99\n"
             "patience = 2\n"
             "holdout_fraction = 0.25\n"
             "embed = 16\n"
             "max_abstract_tokens = 48\n"
             "out = /tmp/somewhere\n");
  ExperimentConfig cfg = load_config(path);
  CHECK(cfg.synthetic);
  CHECK(cfg.synth.topics == 4);
  REQUIRE(cfg.alpha_sweep.size() == 3);
  CHECK(cfg.alpha_sweep[0] == doctest::Approx(0.1));
  CHECK(cfg.alpha_sweep[2] == doctest::Approx(0.3));
  CHECK_FALSE(cfg.include_baseline);
  CHECK(cfg.test_mode == TestSizeMode::examples);
  CHECK(cfg.test_size == 40);
  CHECK(cfg.negatives.strata_weights[0] == 4);
  CHECK(cfg.negatives.strata_weights[1] == 1);
  CHECK(cfg.negatives.strata_weights[2] == 2);
  CHECK(cfg.negatives.ratio == 3);
  CHECK(cfg.train.learning_rate == doctest::Approx(0.025));
  CHECK(cfg.train.seed == 99);
  CHECK(cfg.train.patience == 2);
  CHECK(cfg.train.holdout_fraction == doctest::Approx(0.25));
  CHECK(cfg.train.dims.embed == 16);
  CHECK(cfg.train.dims.max_abstract_tokens == 48);
  CHECK(cfg.out_dir == "/tmp/somewhere");

  // Defaults survive for everything the file does not mention.
  CHECK(cfg.train.epochs == ExperimentConfig{}.train.epochs);
  CHECK(cfg.synth.queries_per_paper == SynthConfig{}.queries_per_paper);
}

TEST_CASE("config errors name the offending line") {
  TempDir tmp;
  std::string path = tmp.file("bad.cfg");

  SUBCASE("unknown key") {
    write_text(path, "synthetic = true\nratio = 5\nnonsense_knob = 3\n");
    try {
      load_config(path);
      FAIL("expected a config error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::config);
      CHECK(std::string(e.what()).find(":3:") != std::string::npos);
      CHECK(std::string(e.what()).find("nonsense_knob") != std::string::npos);
    }
  }
  SUBCASE("missing equals sign") {
    write_text(path, "synthetic true\n");
    try {
      load_config(path);
      FAIL("expected a config error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::config);
      CHECK(std::string(e.what()).find(":1:") != std::string::npos);
    }
  }
  SUBCASE("bad boolean") {
    write_text(path, "synthetic = maybe\n");
    CHECK_THROWS_AS(load_config(path), Error);
  }
  SUBCASE("bad number") {
    write_text(path, "learning_rate = fast\n");
    CHECK_THROWS_AS(load_config(path), Error);
  }
  SUBCASE("trailing characters on a number") {
    write_text(path, "epochs = 12x\n");
    CHECK_THROWS_AS(load_config(path), Error);
  }
  SUBCASE("negative size") {
    write_text(path, "test_size = -4\n");
    CHECK_THROWS_AS(load_config(path), Error);
  }
  SUBCASE("strata arity") {
    write_text(path, "strata = 5,2\n");
    CHECK_THROWS_AS(load_config(path), Error);
  }
  SUBCASE("bad test mode") {
    write_text(path, "test_mode = sideways\n");
    CHECK_THROWS_AS(load_config(path), Error);
  }
  SUBCASE("missing file is an io error") {
    try {
      load_config(tmp.file("does_not_exist.cfg"));
      FAIL("expected an io error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::io);
    }
  }
}

TEST_CASE("overrides reach the matching knobs") {
  ExperimentConfig cfg;
  apply_override(cfg, "papers", "a.jsonl");
  apply_override(cfg, "queries", "b.jsonl");
  apply_override(cfg, "az_labels", "c.tsv");
  apply_override(cfg, "single_task", "on");
  apply_override(cfg, "alpha", "0.2");
  apply_override(cfg, "epochs", "7");
  apply_override(cfg, "batch_size", "12");
  apply_override(cfg, "block_size", "3");
  apply_override(cfg, "min_frequency", "4");
  apply_override(cfg, "synth_seed", "17");
  apply_override(cfg, "hidden", "33");
  apply_override(cfg, "zone_hidden", "11");
  apply_override(cfg, "max_query_tokens", "9");
  CHECK(cfg.papers_path == "a.jsonl");
  CHECK(cfg.queries_path == "b.jsonl");
  CHECK(cfg.az_labels_path == "c.tsv");
  CHECK(cfg.train.single_task);
  CHECK(cfg.train.alpha == doctest::Approx(0.2));
  CHECK(cfg.train.epochs == 7);
  CHECK(cfg.train.batch_size == 12);
  CHECK(cfg.train.block_size == 3);
  CHECK(cfg.train.vocab_min_frequency == 4);
  CHECK(cfg.synth.seed == 17);
  CHECK(cfg.train.dims.hidden == 33);
  CHECK(cfg.train.dims.zone_hidden == 11);
  CHECK(cfg.train.dims.max_query_tokens == 9);

  apply_override(cfg, "alpha_sweep", "0.05,0.5");
  REQUIRE(cfg.alpha_sweep.size() == 2);
  CHECK(cfg.alpha_sweep[1] == doctest::Approx(0.5));
  apply_override(cfg, "alpha_sweep", "");
  CHECK(cfg.alpha_sweep.empty());

  CHECK_THROWS_AS(apply_override(cfg, "mystery", "1"), Error);
  CHECK_THROWS_AS(apply_override(cfg, "ratio", "-1"), Error);
  CHECK_THROWS_AS(apply_override(cfg, "alpha", "0.1.2"), Error);
}

TEST_CASE("config fingerprint ignores the output directory") {
  ExperimentConfig a = tiny_experiment("/tmp/run_a");
  ExperimentConfig b = tiny_experiment("/tmp/run_b");
  CHECK(config_fingerprint(a) == config_fingerprint(b));

  ExperimentConfig c = a;
  c.train.seed = 22;
  CHECK(config_fingerprint(c) != config_fingerprint(a));

  ExperimentConfig d = a;
  d.alpha_sweep = {0.1, 0.2};
  CHECK(config_fingerprint(d) != config_fingerprint(a));

  ExperimentConfig e = a;
  e.synth.seed += 1;
  CHECK(config_fingerprint(e) != config_fingerprint(a));

  ExperimentConfig f = a;
  f.negatives.strata_weights[2] += 1;
  CHECK(config_fingerprint(f) != config_fingerprint(a));
}

TEST_CASE("recommendation metrics agree with a hand-worked confusion") {
  std::vector<Example> truth{
      mk_ex("q1", "pa", CiteLabel::cite, AzLabel::method),
      mk_ex("q1", "pb", CiteLabel::not_cite, AzLabel::method),
      mk_ex("q1", "pc", CiteLabel::not_cite, AzLabel::method),
      mk_ex("q2", "pa", CiteLabel::cite, AzLabel::goal),
      mk_ex("q2", "pd", CiteLabel::not_cite, AzLabel::goal),
      mk_ex("q2", "pe", CiteLabel::not_cite, AzLabel::goal),
  };
  std::vector<Prediction> preds{
      mk_pred("q1", "pa", true, AzLabel::method),   // cite hit
      mk_pred("q1", "pb", true, AzLabel::method),   // false alarm
      mk_pred("q1", "pc", false, AzLabel::method),
      mk_pred("q2", "pa", false, AzLabel::goal),    // missed positive
      mk_pred("q2", "pd", false, AzLabel::goal),
      mk_pred("q2", "pe", false, AzLabel::goal),
  };

  RecommendationMetrics m = recommendation_metrics(preds, truth);
  // cite: tp 1, fp 1, fn 1; not_cite: tp 3, fp 1, fn 1.
  REQUIRE(m.per_class.size() == 2);
  CHECK(m.per_class[0].first == "cite");
  CHECK(m.per_class[0].second.precision == doctest::Approx(0.5));
  CHECK(m.per_class[0].second.recall == doctest::Approx(0.5));
  CHECK(m.per_class[0].second.f1 == doctest::Approx(0.5));
  CHECK(m.per_class[1].first == "not_cite");
  CHECK(m.per_class[1].second.precision == doctest::Approx(0.75));
  CHECK(m.per_class[1].second.recall == doctest::Approx(0.75));
  CHECK(m.macro.precision == doctest::Approx(0.625));
  CHECK(m.macro.recall == doctest::Approx(0.625));
  CHECK(m.macro.f1 == doctest::Approx(0.625));
  CHECK(m.accuracy == doctest::Approx(4.0 / 6.0));

  SUBCASE("pair mismatch is rejected") {
    std::vector<Prediction> swapped = preds;
    std::swap(swapped[0].candidate_id, swapped[1].candidate_id);
    try {
      recommendation_metrics(swapped, truth);
      FAIL("expected an alignment error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::alignment);
    }
  }
  SUBCASE("size mismatch is rejected") {
    std::vector<Prediction> shorter(preds.begin(), preds.end() - 1);
    CHECK_THROWS_AS(recommendation_metrics(shorter, truth), Error);
  }
}

TEST_CASE("zoning metrics take one vote per query") {
  std::vector<Example> truth{
      mk_ex("q1", "pa", CiteLabel::cite, AzLabel::method),
      mk_ex("q1", "pb", CiteLabel::not_cite, AzLabel::method),
      mk_ex("q1", "pc", CiteLabel::not_cite, AzLabel::method),
      mk_ex("q2", "pa", CiteLabel::cite, AzLabel::goal),
      mk_ex("q2", "pd", CiteLabel::not_cite, AzLabel::goal),
      mk_ex("q3", "pe", CiteLabel::cite, AzLabel::conclusion),
  };
  std::vector<Prediction> preds{
      mk_pred("q1", "pa", true, AzLabel::method),
      // Later rows of the same query carry a different zone on purpose;
      // only the first row should count.
      mk_pred("q1", "pb", false, AzLabel::goal),
      mk_pred("q1", "pc", false, AzLabel::goal),
      mk_pred("q2", "pa", true, AzLabel::object),
      mk_pred("q2", "pd", false, AzLabel::object),
      mk_pred("q3", "pe", true, AzLabel::conclusion),
  };

  ZoningMetrics m = zoning_metrics(preds, truth);
  CHECK(m.accuracy == doctest::Approx(2.0 / 3.0));
  REQUIRE(m.per_class.size() == kAzSpecificCount);
  CHECK(m.per_class[0].first == "Method");
  CHECK(m.per_class[0].second.f1 == doctest::Approx(1.0));
  CHECK(m.per_class[1].first == "Conclusion");
  CHECK(m.per_class[1].second.f1 == doctest::Approx(1.0));
  CHECK(m.per_class[2].first == "Goal");
  CHECK(m.per_class[2].second.recall == doctest::Approx(0.0));
  CHECK(m.per_class[3].first == "Object");
  CHECK(m.per_class[3].second.precision == doctest::Approx(0.0));
  CHECK(m.macro.precision == doctest::Approx(0.5));
  CHECK(m.macro.recall == doctest::Approx(0.5));
  CHECK(m.macro.f1 == doctest::Approx(0.5));

  SUBCASE("a test query without a specific zone is rejected") {
    std::vector<Example> bad = truth;
    bad.push_back(mk_ex("q4", "pf", CiteLabel::cite, AzLabel::other));
    std::vector<Prediction> padded = preds;
    padded.push_back(mk_pred("q4", "pf", true, AzLabel::method));
    try {
      zoning_metrics(padded, bad);
      FAIL("expected a label error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::label);
      CHECK(std::string(e.what()).find("q4") != std::string::npos);
    }
  }
}

TEST_CASE("experiment driver writes the full artifact tree") {
  TempDir tmp;
  ExperimentConfig cfg = tiny_experiment(tmp.file("run"));
  ExperimentReport rep = run_experiment(cfg);

  // 3 topics x 5 zones x 2 queries each, 1 positive + 2 negatives per query.
  CHECK(rep.train_examples + rep.test_examples == 90);
  CHECK(rep.test_queries == 6);
  CHECK(rep.test_examples == 18);

  REQUIRE(rep.models.size() == 2);
  CHECK(rep.models[0].name == "baseline");
  CHECK(rep.models[0].single_task);
  CHECK(rep.models[0].alpha == doctest::Approx(0.0));
  CHECK_FALSE(rep.models[0].has_zoning);
  CHECK(rep.models[0].epochs_run == 2);
  CHECK(rep.models[1].name == "alpha_0.1");
  CHECK_FALSE(rep.models[1].single_task);
  CHECK(rep.models[1].alpha == doctest::Approx(0.1));
  CHECK(rep.models[1].has_zoning);
  CHECK(rep.models[1].zoning.accuracy >= 0.0);

  const std::string out = cfg.out_dir;
  for (const char* rel : {
           "dataset/train.jsonl",
           "dataset/test.jsonl",
           "models/baseline.json",
           "models/alpha_0.1.json",
           "predictions/baseline.jsonl",
           "predictions/alpha_0.1.jsonl",
           "reports/history_baseline.tsv",
           "reports/history_alpha_0.1.tsv",
           "reports/recommendation_macro.tsv",
           "reports/recommendation_macro.md",
           "reports/recommendation_per_class.tsv",
           "reports/zoning_macro.tsv",
           "reports/zoning_per_class.tsv",
           "reports/recall_delta_alpha_0.1.tsv",
           "reports/recall_delta_alpha_0.1.md",
           "run_report.json",
           "stage_state.json",
       }) {
    INFO("missing artifact: " << rel);
    CHECK(fs::exists(out + "/" + rel));
  }

  CHECK(line_count(out + "/dataset/test.jsonl") == 18);
  CHECK(line_count(out + "/predictions/baseline.jsonl") == 18);
  // Two epochs plus the header.
  CHECK(line_count(out + "/reports/history_alpha_0.1.tsv") == 3);

  nlohmann::json jrep = nlohmann::json::parse(read_text(out + "/run_report.json"));
  CHECK(jrep["fingerprint"].get<std::string>() == hex16(rep.fingerprint));
  CHECK(jrep["fingerprint"].get<std::string>() == hex16(config_fingerprint(cfg)));
  CHECK(jrep["dataset"]["train_examples"].get<std::size_t>() == rep.train_examples);
  CHECK(jrep["models"].size() == 2);
  CHECK(jrep["models"][1]["name"].get<std::string>() == "alpha_0.1");
  CHECK(jrep["models"][1].contains("zoning"));
  CHECK_FALSE(jrep["models"][0].contains("zoning"));
  CHECK(jrep["config"]["seed"].get<std::string>() == "21");

  SUBCASE("rendered tables trace back to the archived predictions") {
    std::vector<Example> test = load_examples(out + "/dataset/test.jsonl");
    for (const ModelReport& mr : rep.models) {
      std::vector<Prediction> preds = load_predictions(mr.predictions_path);
      RecommendationMetrics rec = recommendation_metrics(preds, test);
      std::vector<double> row =
          tsv_row_values(out + "/reports/recommendation_macro.tsv", mr.name);
      REQUIRE(row.size() == 3);
      CHECK(std::abs(row[0] - rec.macro.precision) <= 5e-5);
      CHECK(std::abs(row[1] - rec.macro.recall) <= 5e-5);
      CHECK(std::abs(row[2] - rec.macro.f1) <= 5e-5);
      if (!mr.single_task) {
        ZoningMetrics zone = zoning_metrics(preds, test);
        std::vector<double> zrow = tsv_row_values(out + "/reports/zoning_macro.tsv", mr.name);
        REQUIRE(zrow.size() == 3);
        CHECK(std::abs(zrow[0] - zone.macro.precision) <= 5e-5);
        CHECK(std::abs(zrow[1] - zone.macro.recall) <= 5e-5);
        CHECK(std::abs(zrow[2] - zone.macro.f1) <= 5e-5);
      }
    }
  }

  SUBCASE("a rerun under the same fingerprint reuses finished artifacts") {
    const std::string ck = out + "/models/alpha_0.1.json";
    const std::string pr = out + "/predictions/baseline.jsonl";
    auto ck_before = fs::last_write_time(ck);
    auto pr_before = fs::last_write_time(pr);
    ExperimentReport again = run_experiment(cfg);
    CHECK(fs::last_write_time(ck) == ck_before);
    CHECK(fs::last_write_time(pr) == pr_before);
    CHECK(again.train_examples == rep.train_examples);
    REQUIRE(again.models.size() == 2);
    CHECK(again.models[1].epochs_run == 2);
    CHECK(again.models[1].recommendation.macro.f1 ==
          doctest::Approx(rep.models[1].recommendation.macro.f1));

    // Any config change invalidates the cache and rebuilds in place.
    ExperimentConfig changed = cfg;
    changed.train.seed = 22;
    run_experiment(changed);
    CHECK(fs::last_write_time(ck) != ck_before);
  }

  SUBCASE("the same config in another directory gives identical artifacts") {
    ExperimentConfig other = cfg;
    other.out_dir = tmp.file("run2");
    run_experiment(other);
    for (const char* rel : {
             "dataset/train.jsonl",
             "dataset/test.jsonl",
             "models/baseline.json",
             "models/alpha_0.1.json",
             "predictions/baseline.jsonl",
             "predictions/alpha_0.1.jsonl",
             "reports/recommendation_macro.tsv",
             "reports/zoning_macro.tsv",
         }) {
      INFO("artifact differs: " << rel);
      CHECK(read_text(out + "/" + rel) == read_text(other.out_dir + "/" + rel));
    }
  }
}

TEST_CASE("experiment driver rejects an empty plan and names failing stages") {
  TempDir tmp;

  SUBCASE("no baseline and no sweep") {
    ExperimentConfig cfg = tiny_experiment(tmp.file("run"));
    cfg.include_baseline = false;
    cfg.alpha_sweep.clear();
    try {
      run_experiment(cfg);
      FAIL("expected a config error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::config);
    }
  }
  SUBCASE("corpus stage failure carries the stage name") {
    ExperimentConfig cfg = tiny_experiment(tmp.file("run"));
    cfg.synthetic = false;  // no paths given either
    try {
      run_experiment(cfg);
      FAIL("expected a stage error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::stage);
      CHECK(std::string(e.what()).find("prepare-corpus") != std::string::npos);
    }
  }
}

TEST_CASE("cli kappa subcommand reads a label pair file") {
  TempDir tmp;
  std::string path = tmp.file("labels.tsv");
  std::ostringstream body;
  body << "query_id\tfirst\tsecond\n";  // header plus a query id column
  for (int i = 0; i < 40; ++i) body << "q" << i << "\tMethod\tMethod\n";
  for (int i = 40; i < 50; ++i) body << "q" << i << "\tMethod\tGoal\n";
  for (int i = 50; i < 60; ++i) body << "q" << i << "\tGoal\tMethod\n";
  for (int i = 60; i < 100; ++i) body << "q" << i << "\tGoal\tGoal\n";
  write_text(path, body.str());

  std::string out;
  int rc = run_cli({"kappa", path}, &out);
  CHECK(rc == 0);
  CHECK(out.find("pairs: 100") != std::string::npos);
  CHECK(out.find("kappa: 0.6000") != std::string::npos);

  SUBCASE("two column files work without the id") {
    std::string two = tmp.file("two.tsv");
    write_text(two, "Method\tMethod\nGoal\tGoal\nMethod\tGoal\nGoal\tMethod\n");
    std::string out2;
    CHECK(run_cli({"kappa", two}, &out2) == 0);
    CHECK(out2.find("pairs: 4") != std::string::npos);
    CHECK(out2.find("kappa: 0.0000") != std::string::npos);
  }
}

TEST_CASE("cli synth and build-dataset round trip") {
  TempDir tmp;
  std::string papers = tmp.file("papers.jsonl");
  std::string queries = tmp.file("queries.jsonl");
  std::string out;
  int rc = run_cli({"synth", "--out-papers", papers, "--out-queries", queries, "--topics", "3",
                    "--queries-per-paper", "1", "--seed", "9"},
                   &out);
  CHECK(rc == 0);
  CHECK(out.find("15 papers, 15 queries") != std::string::npos);

  std::string examples = tmp.file("examples.jsonl");
  rc = run_cli({"build-dataset", "--papers", papers, "--queries", queries, "--out", examples,
                "--ratio", "1"},
               &out);
  CHECK(rc == 0);
  // One negative per positive, so two rows per query.
  CHECK(out.find("30 examples (15 positive, 15 negative, 0 queries skipped)") !=
        std::string::npos);
  CHECK(line_count(examples) == 30);

  SUBCASE("an inline split writes both halves") {
    std::string train = tmp.file("train.jsonl");
    std::string test = tmp.file("test.jsonl");
    rc = run_cli({"build-dataset", "--papers", papers, "--queries", queries, "--out", examples,
                  "--ratio", "1", "--test", "3", "--out-train", train, "--out-test", test,
                  "--seed", "2"},
                 &out);
    CHECK(rc == 0);
    CHECK(out.find("split: 24 train / 6 test examples (3 test queries)") != std::string::npos);
    CHECK(line_count(train) == 24);
    CHECK(line_count(test) == 6);
  }
}

TEST_CASE("cli experiment obeys the seed environment variable") {
  TempDir tmp;
  std::string cfg_path = tmp.file("exp.cfg");
  write_text(cfg_path,
             "synthetic = true\n"
             "synth_topics = 3\n"
             "synth_queries_per_paper = 1\n"
             "ratio = 1\n"
             "test_size = 3\n"
             "alpha_sweep =\n"
             "include_baseline = true\n"
             "epochs = 1\n"
             "batch_size = 16\n"
             "block_size = 4\n"
             "min_frequency = 1\n"
             "embed = 6\n"
             "hidden = 4\n"
             "attention = 4\n"
             "sentence = 4\n"
             "fuse1 = 8\n"
             "fuse2 = 8\n"
             "zone_hidden = 4\n"
             "max_query_tokens = 10\n"
             "max_title_tokens = 8\n"
             "max_abstract_tokens = 12\n");
  std::string out_dir = tmp.file("run");
  REQUIRE(::setenv("CITEREC_SEED", "4242", 1) == 0);
  std::string out;
  int rc = -1;
  try {
    rc = run_cli({"experiment", "--config", cfg_path, "--out", out_dir}, &out);
  } catch (...) {
    ::unsetenv("CITEREC_SEED");
    throw;
  }
  ::unsetenv("CITEREC_SEED");
  CHECK(rc == 0);
  CHECK(out.find("baseline") != std::string::npos);
  nlohmann::json jrep = nlohmann::json::parse(read_text(out_dir + "/run_report.json"));
  CHECK(jrep["config"]["seed"].get<std::string>() == "4242");
  CHECK(jrep["models"].size() == 1);
}
