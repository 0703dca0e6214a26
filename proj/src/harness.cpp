#include "citerec/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "citerec/error.hpp"

namespace citerec {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- small utilities --------------------------------------------------------

namespace {

std::string fmt_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  std::string v = value;
  for (char& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorKind::config, key + ": expected a boolean, got '" + value + "'");
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::config, key + ": expected a number, got '" + value + "'");
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::config, key + ": expected an integer, got '" + value + "'");
  }
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  long long v = parse_int(key, value);
  if (v < 0) throw Error(ErrorKind::config, key + ": must not be negative");
  return static_cast<std::size_t>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::config, key + ": expected an unsigned integer, got '" + value + "'");
  }
}

void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw Error(ErrorKind::io, "cannot write '" + tmp + "'");
    f << content;
    if (!f) throw Error(ErrorKind::io, "short write to '" + tmp + "'");
  }
  fs::rename(tmp, path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

// ---- configuration -----------------------------------------------------------

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "papers") cfg.papers_path = value;
  else if (key == "queries") cfg.queries_path = value;
  else if (key == "az_labels") cfg.az_labels_path = value;
  else if (key == "out") cfg.out_dir = value;
  else if (key == "synthetic") cfg.synthetic = parse_bool(key, value);
  else if (key == "synth_topics") cfg.synth.topics = parse_size(key, value);
  else if (key == "synth_queries_per_paper") cfg.synth.queries_per_paper = parse_size(key, value);
  else if (key == "synth_filler_pool") cfg.synth.filler_pool = parse_size(key, value);
  else if (key == "synth_fillers_per_text") cfg.synth.fillers_per_text = parse_size(key, value);
  else if (key == "synth_seed") cfg.synth.seed = parse_u64(key, value);
  else if (key == "ratio") cfg.negatives.ratio = parse_size(key, value);
  else if (key == "strata") {
    std::vector<std::string> parts = split_csv(value);
    if (parts.size() != 3)
      throw Error(ErrorKind::config, "strata: expected three comma-separated weights");
    for (int i = 0; i < 3; ++i)
      cfg.negatives.strata_weights[i] = static_cast<int>(parse_int(key, parts[i]));
  } else if (key == "test_size") cfg.test_size = parse_size(key, value);
  else if (key == "test_mode") {
    if (value == "queries") cfg.test_mode = TestSizeMode::queries;
    else if (value == "examples") cfg.test_mode = TestSizeMode::examples;
    else throw Error(ErrorKind::config, "test_mode: expected 'queries' or 'examples'");
  } else if (key == "alpha_sweep") {
    cfg.alpha_sweep.clear();
    for (const std::string& part : split_csv(value))
      if (!part.empty()) cfg.alpha_sweep.push_back(parse_double(key, part));
  } else if (key == "include_baseline") cfg.include_baseline = parse_bool(key, value);
  else if (key == "seed") cfg.train.seed = parse_u64(key, value);
  else if (key == "alpha") cfg.train.alpha = parse_double(key, value);
  else if (key == "single_task") cfg.train.single_task = parse_bool(key, value);
  else if (key == "epochs") cfg.train.epochs = parse_size(key, value);
  else if (key == "batch_size") cfg.train.batch_size = parse_size(key, value);
  else if (key == "block_size") cfg.train.block_size = parse_size(key, value);
  else if (key == "learning_rate") cfg.train.learning_rate = parse_double(key, value);
  else if (key == "patience") cfg.train.patience = static_cast<int>(parse_int(key, value));
  else if (key == "holdout_fraction") cfg.train.holdout_fraction = parse_double(key, value);
  else if (key == "min_frequency")
    cfg.train.vocab_min_frequency = static_cast<int>(parse_int(key, value));
  else if (key == "embed") cfg.train.dims.embed = parse_size(key, value);
  else if (key == "hidden") cfg.train.dims.hidden = parse_size(key, value);
  else if (key == "attention") cfg.train.dims.attention = parse_size(key, value);
  else if (key == "sentence") cfg.train.dims.sentence = parse_size(key, value);
  else if (key == "fuse1") cfg.train.dims.fuse1 = parse_size(key, value);
  else if (key == "fuse2") cfg.train.dims.fuse2 = parse_size(key, value);
  else if (key == "zone_hidden") cfg.train.dims.zone_hidden = parse_size(key, value);
  else if (key == "max_query_tokens") cfg.train.dims.max_query_tokens = parse_size(key, value);
  else if (key == "max_title_tokens") cfg.train.dims.max_title_tokens = parse_size(key, value);
  else if (key == "max_abstract_tokens")
    cfg.train.dims.max_abstract_tokens = parse_size(key, value);
  else throw Error(ErrorKind::config, "unknown configuration key '" + key + "'");
}

ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig cfg;
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::io, "cannot read '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::config,
                  path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      apply_override(cfg, key, value);
    } catch (const Error& e) {
      throw Error(ErrorKind::config, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

namespace {

std::vector<std::pair<std::string, std::string>> config_items(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> items;
  auto add = [&items](const char* k, const std::string& v) { items.emplace_back(k, v); };
  add("papers", cfg.papers_path);
  add("queries", cfg.queries_path);
  add("az_labels", cfg.az_labels_path);
  add("synthetic", cfg.synthetic ? "true" : "false");
  add("synth_topics", std::to_string(cfg.synth.topics));
  add("synth_queries_per_paper", std::to_string(cfg.synth.queries_per_paper));
  add("synth_filler_pool", std::to_string(cfg.synth.filler_pool));
  add("synth_fillers_per_text", std::to_string(cfg.synth.fillers_per_text));
  add("synth_seed", std::to_string(cfg.synth.seed));
  add("ratio", std::to_string(cfg.negatives.ratio));
  add("strata", std::to_string(cfg.negatives.strata_weights[0]) + "," +
                    std::to_string(cfg.negatives.strata_weights[1]) + "," +
                    std::to_string(cfg.negatives.strata_weights[2]));
  add("test_size", std::to_string(cfg.test_size));
  add("test_mode", cfg.test_mode == TestSizeMode::queries ? "queries" : "examples");
  std::string sweep;
  for (double a : cfg.alpha_sweep) {
    if (!sweep.empty()) sweep += ',';
    sweep += fmt_g(a);
  }
  add("alpha_sweep", sweep);
  add("include_baseline", cfg.include_baseline ? "true" : "false");
  add("seed", std::to_string(cfg.train.seed));
  add("epochs", std::to_string(cfg.train.epochs));
  add("batch_size", std::to_string(cfg.train.batch_size));
  add("block_size", std::to_string(cfg.train.block_size));
  add("learning_rate", fmt_g(cfg.train.learning_rate));
  add("patience", std::to_string(cfg.train.patience));
  add("holdout_fraction", fmt_g(cfg.train.holdout_fraction));
  add("min_frequency", std::to_string(cfg.train.vocab_min_frequency));
  const DimensionConfig& d = cfg.train.dims;
  add("embed", std::to_string(d.embed));
  add("hidden", std::to_string(d.hidden));
  add("attention", std::to_string(d.attention));
  add("sentence", std::to_string(d.sentence));
  add("fuse1", std::to_string(d.fuse1));
  add("fuse2", std::to_string(d.fuse2));
  add("zone_hidden", std::to_string(d.zone_hidden));
  add("max_query_tokens", std::to_string(d.max_query_tokens));
  add("max_title_tokens", std::to_string(d.max_title_tokens));
  add("max_abstract_tokens", std::to_string(d.max_abstract_tokens));
  return items;
}

}  // namespace

std::uint64_t config_fingerprint(const ExperimentConfig& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  for (const auto& [k, v] : config_items(cfg)) {
    mix(k);
    mix(v);
  }
  return h;
}

// ---- evaluation ----------------------------------------------------------------

std::vector<Prediction> score_examples(const ModelParams& params, const Vocabulary& vocab,
                                       const CorpusIndex& corpus,
                                       const std::vector<Example>& test) {
  std::vector<Prediction> out(test.size());
  std::vector<std::string> errors(test.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::size_t i = 0; i < test.size(); ++i) {
    try {
      EncodedInputs in = encode_inputs(test[i], corpus, vocab, params.dims);
      ForwardScores s = forward_multitask(params, in);
      Prediction& p = out[i];
      p.query_id = test[i].query_id;
      p.candidate_id = test[i].candidate_id;
      p.p_cite = s.p_cite[0];
      p.p_not_cite = s.p_cite[1];
      p.recommended = s.p_cite[0] > s.p_cite[1];
      p.p_az = s.p_az;
      std::size_t best = 0;
      for (std::size_t c = 1; c < s.p_az.size(); ++c)
        if (s.p_az[c] > s.p_az[best]) best = c;
      p.az_pred = kAzOrder[best];
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const std::string& err : errors)
    if (!err.empty()) throw Error(ErrorKind::lookup, err);
  return out;
}

namespace {

void require_aligned(const std::vector<Prediction>& preds, const std::vector<Example>& truth) {
  if (preds.size() != truth.size())
    throw Error(ErrorKind::alignment,
                "predictions cover " + std::to_string(preds.size()) + " pairs, truth " +
                    std::to_string(truth.size()));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].query_id != truth[i].query_id ||
        preds[i].candidate_id != truth[i].candidate_id)
      throw Error(ErrorKind::alignment,
                  "row " + std::to_string(i) + ": predictions and truth list different pairs");
  }
}

}  // namespace

RecommendationMetrics recommendation_metrics(const std::vector<Prediction>& preds,
                                             const std::vector<Example>& truth) {
  require_aligned(preds, truth);
  std::vector<std::string> t(truth.size()), p(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    t[i] = cite_to_string(truth[i].cite);
    p[i] = preds[i].recommended ? cite_to_string(CiteLabel::cite)
                                : cite_to_string(CiteLabel::not_cite);
  }
  std::vector<std::string> classes{cite_to_string(CiteLabel::cite),
                                   cite_to_string(CiteLabel::not_cite)};
  Confusion c = confusion(t, p, classes);
  RecommendationMetrics m;
  std::vector<Prf> per;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    per.push_back(prf(c.per_class[i]));
    m.per_class.emplace_back(classes[i], per.back());
  }
  m.macro = macro_average(per);
  long correct = 0;
  for (std::size_t i = 0; i < classes.size(); ++i) correct += c.table.at(i, i);
  m.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  return m;
}

ZoningMetrics zoning_metrics(const std::vector<Prediction>& preds,
                             const std::vector<Example>& truth) {
  require_aligned(preds, truth);
  std::vector<std::string> t, p;
  std::set<std::string> seen;
  long correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!seen.insert(truth[i].query_id).second) continue;
    if (truth[i].az == AzLabel::other)
      throw Error(ErrorKind::label,
                  "test query '" + truth[i].query_id + "' carries no specific zone");
    t.push_back(az_to_string(truth[i].az));
    p.push_back(az_to_string(preds[i].az_pred));
    if (truth[i].az == preds[i].az_pred) ++correct;
  }
  std::vector<std::string> classes;
  for (AzLabel az : kAzOrder) classes.push_back(az_to_string(az));
  Confusion c = confusion(t, p, classes);
  ZoningMetrics m;
  std::vector<Prf> per;
  for (std::size_t i = 0; i < kAzSpecificCount; ++i) {
    per.push_back(prf(c.per_class[i]));
    m.per_class.emplace_back(classes[i], per.back());
  }
  m.macro = macro_average(per);
  m.accuracy = t.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(t.size());
  return m;
}

// ---- experiment driver -----------------------------------------------------------

namespace {

template <class F>
auto run_stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw Error(ErrorKind::stage, "stage " + name + ": " + e.what());
  }
}

std::string fingerprint_hex(std::uint64_t fp) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
  return buf;
}

Vocabulary build_experiment_vocab(const CorpusIndex& corpus, const std::vector<Example>& train,
                                  int min_frequency) {
  // Candidate text plus the training queries' text; test query text
  // stays out of the table.
  std::vector<std::string> texts;
  for (const Paper& p : corpus.papers) {
    std::string doc = p.title;
    try {
      std::string abs = resolve_abstract(p);
      if (!doc.empty()) doc += ' ';
      doc += abs;
    } catch (const Error&) {
    }
    if (!doc.empty()) texts.push_back(std::move(doc));
  }
  std::set<std::string> seen;
  for (const Example& e : train) {
    if (!seen.insert(e.query_id).second) continue;
    const Query* q = corpus.query(e.query_id);
    if (q) texts.push_back(q->text);
  }
  return Vocabulary::build(texts, min_frequency);
}

std::string render_history_tsv(const std::vector<EpochStats>& history) {
  std::string out = "epoch\tjoint\tcite\tzone\tweighted_zone\tholdout\n";
  char buf[160];
  for (const EpochStats& s : history) {
    std::string hold = std::isnan(s.holdout_joint) ? "-" : fmt_g(s.holdout_joint);
    std::snprintf(buf, sizeof buf, "%zu\t%.6f\t%.6f\t%.6f\t%.6f\t%s\n", s.epoch, s.mean_joint,
                  s.mean_cite, s.mean_zone, s.weighted_zone, hold.c_str());
    out += buf;
  }
  return out;
}

std::size_t history_rows(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::io, "cannot read '" + path + "'");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(f, line))
    if (!trim(line).empty()) ++rows;
  return rows > 0 ? rows - 1 : 0;  // minus the header
}

json prf_to_json(const Prf& p) {
  return json{{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.fingerprint = config_fingerprint(cfg);

  if (!cfg.include_baseline && cfg.alpha_sweep.empty())
    throw Error(ErrorKind::config, "nothing to run: no baseline and an empty alpha sweep");

  const std::string out = cfg.out_dir;
  fs::create_directories(out + "/dataset");
  fs::create_directories(out + "/models");
  fs::create_directories(out + "/predictions");
  fs::create_directories(out + "/reports");

  // Artifacts are only reused when they were produced under this exact
  // configuration; otherwise everything is rebuilt in place.
  const std::string state_path = out + "/stage_state.json";
  bool reuse = false;
  if (fs::exists(state_path)) {
    try {
      json j = json::parse(read_file(state_path));
      reuse = j.value("fingerprint", std::string{}) == fingerprint_hex(rep.fingerprint);
    } catch (const std::exception&) {
      reuse = false;
    }
  }
  if (!reuse)
    write_file_atomic(state_path,
                      json{{"fingerprint", fingerprint_hex(rep.fingerprint)}}.dump(2) + "\n");

  CorpusIndex corpus = run_stage("prepare-corpus", [&] {
    std::vector<Paper> papers;
    std::vector<Query> queries;
    if (cfg.synthetic) {
      SynthCorpus s = make_synth_corpus(cfg.synth);
      papers = std::move(s.papers);
      queries = std::move(s.queries);
    } else {
      if (cfg.papers_path.empty() || cfg.queries_path.empty())
        throw Error(ErrorKind::config,
                    "papers and queries paths are required unless synthetic = true");
      papers = load_papers(cfg.papers_path);
      queries = load_queries(cfg.queries_path);
      if (!cfg.az_labels_path.empty()) merge_az_labels(queries, cfg.az_labels_path);
    }
    return CorpusIndex::build(std::move(papers), std::move(queries));
  });

  const std::string train_path = out + "/dataset/train.jsonl";
  const std::string test_path = out + "/dataset/test.jsonl";
  std::vector<Example> train_ex, test_ex;
  run_stage("dataset", [&] {
    if (reuse && fs::exists(train_path) && fs::exists(test_path)) {
      train_ex = load_examples(train_path);
      test_ex = load_examples(test_path);
      return;
    }
    std::vector<Example> examples = assemble_dataset(corpus, cfg.negatives);
    DatasetSplit split = split_train_test(examples, cfg.test_size, cfg.train.seed, cfg.test_mode);
    train_ex = std::move(split.train);
    test_ex = std::move(split.test);
    save_examples(train_path + ".tmp", train_ex);
    fs::rename(train_path + ".tmp", train_path);
    save_examples(test_path + ".tmp", test_ex);
    fs::rename(test_path + ".tmp", test_path);
  });
  rep.train_examples = train_ex.size();
  rep.test_examples = test_ex.size();
  {
    std::set<std::string> qids;
    for (const Example& e : test_ex) qids.insert(e.query_id);
    rep.test_queries = qids.size();
  }

  Vocabulary vocab = run_stage("vocabulary", [&] {
    return build_experiment_vocab(corpus, train_ex, cfg.train.vocab_min_frequency);
  });

  struct Planned {
    std::string name;
    double alpha;
    bool single_task;
  };
  std::vector<Planned> plan;
  if (cfg.include_baseline) plan.push_back({"baseline", 0.0, true});
  for (double a : cfg.alpha_sweep) plan.push_back({"alpha_" + fmt_g(a), a, false});

  for (const Planned& pl : plan) {
    ModelReport mr;
    mr.name = pl.name;
    mr.alpha = pl.alpha;
    mr.single_task = pl.single_task;
    mr.checkpoint_path = out + "/models/" + pl.name + ".json";
    mr.predictions_path = out + "/predictions/" + pl.name + ".jsonl";
    const std::string history_path = out + "/reports/history_" + pl.name + ".tsv";

    run_stage("train-" + pl.name, [&] {
      if (reuse && fs::exists(mr.checkpoint_path) && fs::exists(history_path)) {
        mr.epochs_run = history_rows(history_path);
        mr.early_stopped = cfg.train.patience > 0 && mr.epochs_run < cfg.train.epochs;
        return;
      }
      TrainConfig tc = cfg.train;
      tc.alpha = pl.alpha;
      tc.single_task = pl.single_task;
      TrainResult tr = train(train_ex, corpus, vocab, tc);
      save_checkpoint(mr.checkpoint_path + ".tmp", tr.params, vocab);
      fs::rename(mr.checkpoint_path + ".tmp", mr.checkpoint_path);
      write_file_atomic(history_path, render_history_tsv(tr.history));
      mr.epochs_run = tr.epochs_run;
      mr.early_stopped = tr.early_stopped;
    });

    run_stage("predict-" + pl.name, [&] {
      if (reuse && fs::exists(mr.predictions_path)) return;
      Checkpoint ck = load_checkpoint(mr.checkpoint_path);
      std::vector<Prediction> preds = score_examples(ck.params, ck.vocab, corpus, test_ex);
      save_predictions(mr.predictions_path + ".tmp", preds);
      fs::rename(mr.predictions_path + ".tmp", mr.predictions_path);
    });

    rep.models.push_back(std::move(mr));
  }

  run_stage("report", [&] {
    // Every table is recomputed from the archived prediction files, so
    // a rendered number can always be traced back to them.
    std::vector<std::pair<std::string, Prf>> rec_macro_rows;
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, Prf>>>> rec_class_rows;
    std::vector<std::pair<std::string, Prf>> zone_macro_rows;
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, Prf>>>> zone_class_rows;
    std::vector<Prediction> baseline_preds;

    for (ModelReport& mr : rep.models) {
      std::vector<Prediction> preds = load_predictions(mr.predictions_path);
      mr.recommendation = recommendation_metrics(preds, test_ex);
      rec_macro_rows.emplace_back(mr.name, mr.recommendation.macro);
      rec_class_rows.emplace_back(mr.name, mr.recommendation.per_class);
      if (!mr.single_task) {
        mr.has_zoning = true;
        mr.zoning = zoning_metrics(preds, test_ex);
        zone_macro_rows.emplace_back(mr.name, mr.zoning.macro);
        zone_class_rows.emplace_back(mr.name, mr.zoning.per_class);
      }
      if (mr.name == "baseline") baseline_preds = std::move(preds);
    }

    auto emit = [&](const std::string& base, const std::string& tsv, const std::string& md) {
      write_file_atomic(out + "/reports/" + base + ".tsv", tsv);
      write_file_atomic(out + "/reports/" + base + ".md", md);
      rep.report_files.push_back(out + "/reports/" + base + ".tsv");
      rep.report_files.push_back(out + "/reports/" + base + ".md");
    };

    emit("recommendation_macro", render_macro_table(rec_macro_rows, false),
         render_macro_table(rec_macro_rows, true));
    emit("recommendation_per_class", render_per_class_table(rec_class_rows, false),
         render_per_class_table(rec_class_rows, true));
    if (!zone_macro_rows.empty()) {
      emit("zoning_macro", render_macro_table(zone_macro_rows, false),
           render_macro_table(zone_macro_rows, true));
      emit("zoning_per_class", render_per_class_table(zone_class_rows, false),
           render_per_class_table(zone_class_rows, true));
    }

    if (!baseline_preds.empty()) {
      for (const ModelReport& mr : rep.models) {
        if (mr.single_task) continue;
        std::vector<Prediction> preds = load_predictions(mr.predictions_path);
        RecallDelta delta = recall_delta(baseline_preds, preds, test_ex);
        emit("recall_delta_" + mr.name, render_delta_table(delta, "baseline", mr.name, false),
             render_delta_table(delta, "baseline", mr.name, true));
      }
    }

    json jmodels = json::array();
    for (const ModelReport& mr : rep.models) {
      json jm{{"name", mr.name},
              {"alpha", mr.alpha},
              {"single_task", mr.single_task},
              {"epochs_run", mr.epochs_run},
              {"early_stopped", mr.early_stopped},
              {"checkpoint", mr.checkpoint_path},
              {"predictions", mr.predictions_path}};
      json jrec{{"macro", prf_to_json(mr.recommendation.macro)},
                {"accuracy", mr.recommendation.accuracy}};
      for (const auto& [cls, p] : mr.recommendation.per_class) jrec[cls] = prf_to_json(p);
      jm["recommendation"] = jrec;
      if (mr.has_zoning) {
        json jz{{"macro", prf_to_json(mr.zoning.macro)}, {"accuracy", mr.zoning.accuracy}};
        for (const auto& [cls, p] : mr.zoning.per_class) jz[cls] = prf_to_json(p);
        jm["zoning"] = jz;
      }
      jmodels.push_back(std::move(jm));
    }
    json jcfg;
    for (const auto& [k, v] : config_items(cfg)) jcfg[k] = v;
    json jrep{{"fingerprint", fingerprint_hex(rep.fingerprint)},
              {"config", jcfg},
              {"dataset",
               json{{"train_examples", rep.train_examples},
                    {"test_examples", rep.test_examples},
                    {"test_queries", rep.test_queries}}},
              {"models", jmodels},
              {"reports", rep.report_files}};
    write_file_atomic(out + "/run_report.json", jrep.dump(2) + "\n");
    rep.report_files.push_back(out + "/run_report.json");
  });

  return rep;
}

// ---- command line -------------------------------------------------------------------

namespace {

std::vector<std::string> gather_input_files(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const std::string& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> here;
      for (const fs::directory_entry& e : fs::directory_iterator(in)) {
        if (!e.is_regular_file()) continue;
        std::string ext = e.path().extension().string();
        if (ext == ".xml" || ext == ".nxml") here.push_back(e.path().string());
      }
      std::sort(here.begin(), here.end());
      files.insert(files.end(), here.begin(), here.end());
    } else {
      files.push_back(in);
    }
  }
  if (files.empty()) throw Error(ErrorKind::invalid_input, "no input XML files");
  return files;
}

int cmd_ingest(const std::vector<std::string>& inputs, const std::string& out_papers,
               const std::string& out_queries, const std::string& labels,
               bool filter_sources) {
  std::vector<std::string> files = gather_input_files(inputs);
  std::vector<Paper> papers;
  std::vector<Query> queries;
  std::size_t warnings = 0;
  for (const std::string& file : files) {
    std::string xml_text = read_file(file);
    ParseResult pr;
    try {
      pr = parse_jats(xml_text, fs::path(file).stem().string());
    } catch (const Error& e) {
      throw Error(e.kind(), file + ": " + e.what());
    }
    warnings += pr.warnings;
    // Referenced works become stub records so the time-slice filter
    // can see their years; stubs carry no text and never become
    // candidates.
    for (const auto& [rid, year] : pr.reference_years) {
      Paper stub;
      stub.paper_id = rid;
      stub.pub_year = year;
      papers.push_back(std::move(stub));
    }
    papers.push_back(std::move(pr.paper));
    queries.insert(queries.end(), pr.queries.begin(), pr.queries.end());
  }
  papers = merge_papers(std::move(papers));

  if (!labels.empty()) {
    std::size_t unmatched = 0;
    std::size_t applied = merge_az_labels(queries, labels, &unmatched);
    std::cout << "labels applied: " << applied << " (unmatched: " << unmatched << ")\n";
  }

  std::size_t kept = queries.size();
  if (filter_sources) {
    std::vector<Paper> sources = filter_source_papers(papers, TimeSlicer::standard());
    std::set<std::string> source_ids;
    for (const Paper& p : sources) source_ids.insert(p.paper_id);
    std::vector<Query> filtered;
    for (Query& q : queries)
      if (source_ids.count(q.source_id)) filtered.push_back(std::move(q));
    queries = std::move(filtered);
    kept = queries.size();
    std::cout << "source filter kept " << sources.size() << " papers\n";
  }

  save_papers(out_papers, papers);
  save_queries(out_queries, queries);
  std::cout << "parsed " << files.size() << " files: " << papers.size() << " paper records, "
            << kept << " queries, " << warnings << " warnings\n";
  return 0;
}

int cmd_kappa(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::io, "cannot read '" + path + "'");
  std::vector<std::string> first, second;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (lineno == 1 && !cols.empty() && cols[0] == "query_id") continue;
    if (cols.size() == 2) {
      first.push_back(trim(cols[0]));
      second.push_back(trim(cols[1]));
    } else if (cols.size() >= 3) {
      first.push_back(trim(cols[1]));
      second.push_back(trim(cols[2]));
    } else {
      throw Error(ErrorKind::invalid_input,
                  path + ":" + std::to_string(lineno) + ": expected two label columns");
    }
  }
  if (first.empty()) throw Error(ErrorKind::invalid_input, path + ": no label pairs");

  std::set<std::string> label_set(first.begin(), first.end());
  label_set.insert(second.begin(), second.end());
  std::vector<std::string> classes(label_set.begin(), label_set.end());
  // Rows are the second annotator, columns the first.
  Confusion c = confusion(second, first, classes);

  std::size_t width = 8;
  for (const std::string& cls : classes) width = std::max(width, cls.size() + 2);
  auto pad = [width](const std::string& s) {
    return s + std::string(width > s.size() ? width - s.size() : 1, ' ');
  };
  std::cout << pad("");
  for (const std::string& cls : classes) std::cout << pad(cls);
  std::cout << '\n';
  for (std::size_t r = 0; r < classes.size(); ++r) {
    std::cout << pad(classes[r]);
    for (std::size_t col = 0; col < classes.size(); ++col)
      std::cout << pad(std::to_string(c.table.at(r, col)));
    std::cout << '\n';
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", cohen_kappa(c.table));
  std::cout << "pairs: " << first.size() << "\nkappa: " << buf << "\n";
  return 0;
}

CorpusIndex load_corpus(const std::string& papers, const std::string& queries,
                        const std::string& labels) {
  std::vector<Paper> ps = load_papers(papers);
  std::vector<Query> qs = load_queries(queries);
  if (!labels.empty()) merge_az_labels(qs, labels);
  return CorpusIndex::build(std::move(ps), std::move(qs));
}

}  // namespace

int cli(int argc, char** argv) {
  CLI::App app{"citation recommendation and query zoning toolkit"};
  app.require_subcommand(1);

  // ---- ingest ----
  auto* ingest = app.add_subcommand("ingest", "parse article XML into corpus files");
  struct IngestArgs {
    std::vector<std::string> inputs;
    std::string out_papers, out_queries, labels;
    bool filter_sources = false;
  };
  auto ing = std::make_shared<IngestArgs>();
  ingest->add_option("inputs", ing->inputs, "XML files or directories")->required();
  ingest->add_option("--out-papers", ing->out_papers, "papers JSONL output")->required();
  ingest->add_option("--out-queries", ing->out_queries, "queries JSONL output")->required();
  ingest->add_option("--labels", ing->labels, "zone annotation TSV to merge");
  ingest->add_flag("--filter-sources", ing->filter_sources,
                   "keep only queries from papers citing broadly across time");
  ingest->callback([ing] {
    cmd_ingest(ing->inputs, ing->out_papers, ing->out_queries, ing->labels,
               ing->filter_sources);
  });

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  struct SynthArgs {
    std::string out_papers, out_queries;
    SynthConfig cfg;
  };
  auto syn = std::make_shared<SynthArgs>();
  synth->add_option("--out-papers", syn->out_papers, "papers JSONL output")->required();
  synth->add_option("--out-queries", syn->out_queries, "queries JSONL output")->required();
  synth->add_option("--topics", syn->cfg.topics, "topic count");
  synth->add_option("--queries-per-paper", syn->cfg.queries_per_paper, "queries per paper");
  synth->add_option("--seed", syn->cfg.seed, "generator seed");
  synth->callback([syn] {
    SynthCorpus c = make_synth_corpus(syn->cfg);
    save_papers(syn->out_papers, c.papers);
    save_queries(syn->out_queries, c.queries);
    std::cout << c.papers.size() << " papers, " << c.queries.size() << " queries\n";
  });

  // ---- build-dataset ----
  auto* build = app.add_subcommand("build-dataset", "sample negatives and build example files");
  struct BuildArgs {
    std::string papers, queries, labels, out, out_train, out_test;
    std::size_t ratio = 5;
    std::string strata = "5,2,3";
    std::size_t test_size = 0;
    std::string test_mode = "queries";
    std::uint64_t seed = 1;
  };
  auto bld = std::make_shared<BuildArgs>();
  build->add_option("--papers", bld->papers)->required();
  build->add_option("--queries", bld->queries)->required();
  build->add_option("--labels", bld->labels, "zone annotation TSV to merge");
  build->add_option("--out", bld->out, "examples JSONL output")->required();
  build->add_option("--ratio", bld->ratio, "negatives per positive");
  build->add_option("--strata", bld->strata, "high,low,median weights");
  build->add_option("--test", bld->test_size, "carve a test split of this size");
  build->add_option("--test-mode", bld->test_mode, "'queries' or 'examples'");
  build->add_option("--out-train", bld->out_train, "train JSONL when --test is given");
  build->add_option("--out-test", bld->out_test, "test JSONL when --test is given");
  build->add_option("--seed", bld->seed, "split seed");
  build->callback([bld] {
    CorpusIndex corpus = load_corpus(bld->papers, bld->queries, bld->labels);
    NegativeSpec spec;
    spec.ratio = bld->ratio;
    std::vector<std::string> parts = split_csv(bld->strata);
    if (parts.size() != 3)
      throw Error(ErrorKind::config, "--strata: expected three comma-separated weights");
    for (int i = 0; i < 3; ++i)
      spec.strata_weights[i] = static_cast<int>(parse_int("--strata", parts[i]));
    AssembleStats stats;
    std::vector<Example> examples = assemble_dataset(corpus, spec, &stats);
    save_examples(bld->out, examples);
    std::cout << examples.size() << " examples (" << stats.positives << " positive, "
              << stats.negatives << " negative, " << stats.skipped_unresolvable
              << " queries skipped)\n";
    if (bld->test_size > 0) {
      if (bld->out_train.empty() || bld->out_test.empty())
        throw Error(ErrorKind::config, "--test needs --out-train and --out-test");
      TestSizeMode mode;
      if (bld->test_mode == "queries") mode = TestSizeMode::queries;
      else if (bld->test_mode == "examples") mode = TestSizeMode::examples;
      else throw Error(ErrorKind::config, "--test-mode: expected 'queries' or 'examples'");
      DatasetSplit split = split_train_test(examples, bld->test_size, bld->seed, mode);
      save_examples(bld->out_train, split.train);
      save_examples(bld->out_test, split.test);
      std::cout << "split: " << split.train.size() << " train / " << split.test.size()
                << " test examples (" << split.test_query_ids.size() << " test queries)\n";
    }
  });

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "fit one model on an example file");
  struct TrainArgs {
    std::string papers, queries, labels, examples, out, history;
    ExperimentConfig cfg;  // reuses the config plumbing for the knobs
  };
  auto trn = std::make_shared<TrainArgs>();
  train_cmd->add_option("--papers", trn->papers)->required();
  train_cmd->add_option("--queries", trn->queries)->required();
  train_cmd->add_option("--labels", trn->labels, "zone annotation TSV to merge");
  train_cmd->add_option("--examples", trn->examples, "training examples JSONL")->required();
  train_cmd->add_option("--out", trn->out, "checkpoint output path")->required();
  train_cmd->add_option("--history", trn->history, "per-epoch loss TSV output");
  train_cmd->add_option("--alpha", trn->cfg.train.alpha, "zoning loss weight");
  train_cmd->add_flag("--single-task", trn->cfg.train.single_task,
                      "train the citation head only");
  train_cmd->add_option("--epochs", trn->cfg.train.epochs);
  train_cmd->add_option("--batch-size", trn->cfg.train.batch_size);
  train_cmd->add_option("--block-size", trn->cfg.train.block_size);
  train_cmd->add_option("--lr", trn->cfg.train.learning_rate);
  train_cmd->add_option("--seed", trn->cfg.train.seed);
  train_cmd->add_option("--patience", trn->cfg.train.patience);
  train_cmd->add_option("--holdout", trn->cfg.train.holdout_fraction);
  train_cmd->add_option("--min-frequency", trn->cfg.train.vocab_min_frequency);
  train_cmd->add_option("--embed", trn->cfg.train.dims.embed);
  train_cmd->add_option("--hidden", trn->cfg.train.dims.hidden);
  train_cmd->add_option("--attention", trn->cfg.train.dims.attention);
  train_cmd->add_option("--sentence", trn->cfg.train.dims.sentence);
  train_cmd->add_option("--fuse1", trn->cfg.train.dims.fuse1);
  train_cmd->add_option("--fuse2", trn->cfg.train.dims.fuse2);
  train_cmd->add_option("--zone-hidden", trn->cfg.train.dims.zone_hidden);
  train_cmd->add_option("--max-query-tokens", trn->cfg.train.dims.max_query_tokens);
  train_cmd->add_option("--max-title-tokens", trn->cfg.train.dims.max_title_tokens);
  train_cmd->add_option("--max-abstract-tokens", trn->cfg.train.dims.max_abstract_tokens);
  train_cmd->callback([trn] {
    CorpusIndex corpus = load_corpus(trn->papers, trn->queries, trn->labels);
    std::vector<Example> examples = load_examples(trn->examples);
    Vocabulary vocab =
        build_experiment_vocab(corpus, examples, trn->cfg.train.vocab_min_frequency);
    TrainResult tr = train(examples, corpus, vocab, trn->cfg.train);
    save_checkpoint(trn->out, tr.params, vocab);
    if (!trn->history.empty()) write_file_atomic(trn->history, render_history_tsv(tr.history));
    std::cout << "trained " << tr.epochs_run << " epochs"
              << (tr.early_stopped ? " (stopped early)" : "");
    if (!tr.history.empty()) std::cout << ", final joint loss " << fmt_g(tr.history.back().mean_joint);
    std::cout << "\n";
  });

  // ---- evaluate ----
  auto* eval = app.add_subcommand("evaluate", "score a checkpoint against a test split");
  struct EvalArgs {
    std::string checkpoint, papers, queries, labels, examples, out, report_prefix;
  };
  auto ev = std::make_shared<EvalArgs>();
  eval->add_option("--checkpoint", ev->checkpoint)->required();
  eval->add_option("--papers", ev->papers)->required();
  eval->add_option("--queries", ev->queries)->required();
  eval->add_option("--labels", ev->labels, "zone annotation TSV to merge");
  eval->add_option("--examples", ev->examples, "test examples JSONL")->required();
  eval->add_option("--out", ev->out, "predictions JSONL output")->required();
  eval->add_option("--report-prefix", ev->report_prefix, "also write metric tables here");
  eval->callback([ev] {
    CorpusIndex corpus = load_corpus(ev->papers, ev->queries, ev->labels);
    std::vector<Example> test = load_examples(ev->examples);
    Checkpoint ck = load_checkpoint(ev->checkpoint);
    std::vector<Prediction> preds = score_examples(ck.params, ck.vocab, corpus, test);
    save_predictions(ev->out, preds);
    // Metrics come from the archived file, not the in-memory rows, so
    // what is printed is exactly what the file supports.
    std::vector<Prediction> archived = load_predictions(ev->out);
    RecommendationMetrics rec = recommendation_metrics(archived, test);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "recommendation: macro_p %.4f macro_r %.4f macro_f1 %.4f accuracy %.4f\n",
                  rec.macro.precision, rec.macro.recall, rec.macro.f1, rec.accuracy);
    std::cout << buf;
    bool zoned = !ck.params.single_task;
    ZoningMetrics zone;
    if (zoned) {
      zone = zoning_metrics(archived, test);
      std::snprintf(buf, sizeof buf,
                    "zoning: macro_p %.4f macro_r %.4f macro_f1 %.4f accuracy %.4f\n",
                    zone.macro.precision, zone.macro.recall, zone.macro.f1, zone.accuracy);
      std::cout << buf;
    }
    if (!ev->report_prefix.empty()) {
      std::vector<std::pair<std::string, Prf>> macro_rows{{"model", rec.macro}};
      std::vector<std::pair<std::string, std::vector<std::pair<std::string, Prf>>>> class_rows{
          {"model", rec.per_class}};
      write_file_atomic(ev->report_prefix + "recommendation_macro.tsv",
                        render_macro_table(macro_rows, false));
      write_file_atomic(ev->report_prefix + "recommendation_per_class.tsv",
                        render_per_class_table(class_rows, false));
      if (zoned) {
        std::vector<std::pair<std::string, Prf>> zm{{"model", zone.macro}};
        std::vector<std::pair<std::string, std::vector<std::pair<std::string, Prf>>>> zc{
            {"model", zone.per_class}};
        write_file_atomic(ev->report_prefix + "zoning_macro.tsv", render_macro_table(zm, false));
        write_file_atomic(ev->report_prefix + "zoning_per_class.tsv",
                          render_per_class_table(zc, false));
      }
    }
  });

  // ---- kappa ----
  auto* kap = app.add_subcommand("kappa", "agreement between two annotators");
  auto kp = std::make_shared<std::string>();
  kap->add_option("file", *kp, "TSV of label pairs (optionally query_id first)")->required();
  kap->callback([kp] { cmd_kappa(*kp); });

  // ---- compare ----
  auto* cmp = app.add_subcommand("compare", "recall movement between two prediction files");
  struct CompareArgs {
    std::string a, b, truth, name_a = "A", name_b = "B", out_prefix;
  };
  auto cp = std::make_shared<CompareArgs>();
  cmp->add_option("--a", cp->a, "first predictions JSONL")->required();
  cmp->add_option("--b", cp->b, "second predictions JSONL")->required();
  cmp->add_option("--truth", cp->truth, "test examples JSONL")->required();
  cmp->add_option("--name-a", cp->name_a);
  cmp->add_option("--name-b", cp->name_b);
  cmp->add_option("--out-prefix", cp->out_prefix, "also write the table here");
  cmp->callback([cp] {
    std::vector<Prediction> a = load_predictions(cp->a);
    std::vector<Prediction> b = load_predictions(cp->b);
    std::vector<Example> truth = load_examples(cp->truth);
    RecallDelta delta = recall_delta(a, b, truth);
    std::cout << render_delta_table(delta, cp->name_a, cp->name_b, true);
    if (!cp->out_prefix.empty()) {
      write_file_atomic(cp->out_prefix + "recall_delta.tsv",
                        render_delta_table(delta, cp->name_a, cp->name_b, false));
      write_file_atomic(cp->out_prefix + "recall_delta.md",
                        render_delta_table(delta, cp->name_a, cp->name_b, true));
    }
  });

  // ---- report ----
  auto* rpt = app.add_subcommand("report", "render metric tables from archived predictions");
  struct ReportArgs {
    std::string truth, out_dir;
    std::vector<std::string> preds;  // name=path
    bool zoning = false;
  };
  auto rp = std::make_shared<ReportArgs>();
  rpt->add_option("--truth", rp->truth, "test examples JSONL")->required();
  rpt->add_option("--pred", rp->preds, "name=predictions.jsonl (repeatable)")->required();
  rpt->add_flag("--zoning", rp->zoning, "include zoning tables");
  rpt->add_option("--out-dir", rp->out_dir, "write files instead of stdout");
  rpt->callback([rp] {
    std::vector<Example> truth = load_examples(rp->truth);
    std::vector<std::pair<std::string, Prf>> macro_rows, zone_macro_rows;
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, Prf>>>> class_rows,
        zone_class_rows;
    for (const std::string& spec : rp->preds) {
      std::size_t eq = spec.find('=');
      if (eq == std::string::npos)
        throw Error(ErrorKind::config, "--pred: expected name=path, got '" + spec + "'");
      std::string name = spec.substr(0, eq);
      std::vector<Prediction> preds = load_predictions(spec.substr(eq + 1));
      RecommendationMetrics rec = recommendation_metrics(preds, truth);
      macro_rows.emplace_back(name, rec.macro);
      class_rows.emplace_back(name, rec.per_class);
      if (rp->zoning) {
        ZoningMetrics zone = zoning_metrics(preds, truth);
        zone_macro_rows.emplace_back(name, zone.macro);
        zone_class_rows.emplace_back(name, zone.per_class);
      }
    }
    if (rp->out_dir.empty()) {
      std::cout << render_macro_table(macro_rows, true) << "\n"
                << render_per_class_table(class_rows, true);
      if (rp->zoning)
        std::cout << "\n"
                  << render_macro_table(zone_macro_rows, true) << "\n"
                  << render_per_class_table(zone_class_rows, true);
    } else {
      fs::create_directories(rp->out_dir);
      write_file_atomic(rp->out_dir + "/recommendation_macro.tsv",
                        render_macro_table(macro_rows, false));
      write_file_atomic(rp->out_dir + "/recommendation_macro.md",
                        render_macro_table(macro_rows, true));
      write_file_atomic(rp->out_dir + "/recommendation_per_class.tsv",
                        render_per_class_table(class_rows, false));
      write_file_atomic(rp->out_dir + "/recommendation_per_class.md",
                        render_per_class_table(class_rows, true));
      if (rp->zoning) {
        write_file_atomic(rp->out_dir + "/zoning_macro.tsv",
                          render_macro_table(zone_macro_rows, false));
        write_file_atomic(rp->out_dir + "/zoning_macro.md",
                          render_macro_table(zone_macro_rows, true));
        write_file_atomic(rp->out_dir + "/zoning_per_class.tsv",
                          render_per_class_table(zone_class_rows, false));
        write_file_atomic(rp->out_dir + "/zoning_per_class.md",
                          render_per_class_table(zone_class_rows, true));
      }
    }
  });

  // ---- experiment ----
  auto* expcmd = app.add_subcommand("experiment", "run the full sweep against the baseline");
  struct ExperimentArgs {
    std::string config_path, out_dir;
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    double alpha = 0.0;
    bool single_task = false;
  };
  auto ex = std::make_shared<ExperimentArgs>();
  expcmd->add_option("--config", ex->config_path, "flat key=value configuration file");
  auto* seed_opt = expcmd->add_option("--seed", ex->seed, "override the training seed");
  auto* alpha_opt =
      expcmd->add_option("--alpha", ex->alpha, "restrict the sweep to this single value");
  expcmd->add_flag("--single-task", ex->single_task, "run only the baseline");
  expcmd->add_option("--out", ex->out_dir, "override the output directory");
  expcmd->add_option("--set", ex->sets, "key=value override (repeatable)");
  expcmd->callback([ex, seed_opt, alpha_opt] {
    ExperimentConfig cfg;
    if (!ex->config_path.empty()) cfg = load_config(ex->config_path);
    if (const char* env = std::getenv("CITEREC_SEED"))
      cfg.train.seed = parse_u64("CITEREC_SEED", env);
    for (const std::string& kv : ex->sets) {
      std::size_t eq = kv.find('=');
      if (eq == std::string::npos)
        throw Error(ErrorKind::config, "--set: expected key=value, got '" + kv + "'");
      apply_override(cfg, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    if (seed_opt->count() > 0) cfg.train.seed = ex->seed;
    if (alpha_opt->count() > 0) cfg.alpha_sweep = {ex->alpha};
    if (ex->single_task) {
      cfg.include_baseline = true;
      cfg.alpha_sweep.clear();
    }
    if (!ex->out_dir.empty()) cfg.out_dir = ex->out_dir;
    ExperimentReport rep = run_experiment(cfg);
    std::cout << "dataset: " << rep.train_examples << " train / " << rep.test_examples
              << " test examples (" << rep.test_queries << " test queries)\n";
    for (const ModelReport& mr : rep.models) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "%-12s macro_f1 %.4f accuracy %.4f", mr.name.c_str(),
                    mr.recommendation.macro.f1, mr.recommendation.accuracy);
      std::cout << buf;
      if (mr.has_zoning) {
        std::snprintf(buf, sizeof buf, "  zoning_f1 %.4f zoning_acc %.4f", mr.zoning.macro.f1,
                      mr.zoning.accuracy);
        std::cout << buf;
      }
      std::cout << "\n";
    }
    std::cout << "reports under " << cfg.out_dir << "/reports\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return 0;
}

}  // namespace citerec
