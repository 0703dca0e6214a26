#ifndef CITEREC_HARNESS_HPP
#define CITEREC_HARNESS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "citerec/dataset.hpp"
#include "citerec/metrics.hpp"
#include "citerec/model.hpp"
#include "citerec/synth.hpp"

namespace citerec {

// ---- experiment configuration ------------------------------------------------

// Flat key=value configuration; every key can also arrive as a CLI
// flag override, and the training seed additionally through the
// CITEREC_SEED environment variable.
struct ExperimentConfig {
  std::string papers_path;
  std::string queries_path;
  std::string az_labels_path;  // optional annotation merge
  std::string out_dir = "runs/exp";

  bool synthetic = false;  // generate the corpus instead of loading it
  SynthConfig synth;

  NegativeSpec negatives;
  std::size_t test_size = 100;
  TestSizeMode test_mode = TestSizeMode::queries;

  TrainConfig train;
  std::vector<double> alpha_sweep{0.1, 0.2, 0.3};
  bool include_baseline = true;
};

// Parses `key = value` lines; '#' starts a comment. Unknown keys
// throw ErrorKind::config.
ExperimentConfig load_config(const std::string& path);

// One key's worth of the same parsing, shared by the file reader and
// the CLI's --set overrides.
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Stable hash of every setting that shapes the artifacts; stage
// resumption only trusts files stamped with the current value.
std::uint64_t config_fingerprint(const ExperimentConfig& cfg);

// ---- evaluation ----------------------------------------------------------------

// Scores every test example with the checkpointed model, in example
// order. The zone fields always carry the query branch's output, even
// for single-task models whose zoning head never trained.
std::vector<Prediction> score_examples(const ModelParams& params, const Vocabulary& vocab,
                                       const CorpusIndex& corpus,
                                       const std::vector<Example>& test);

struct RecommendationMetrics {
  Prf macro;
  std::vector<std::pair<std::string, Prf>> per_class;  // cite, not_cite
  double accuracy = 0.0;
};

// Two-class metrics of the recommended flag against the true labels.
// Predictions must align one-to-one with the test examples.
RecommendationMetrics recommendation_metrics(const std::vector<Prediction>& preds,
                                             const std::vector<Example>& truth);

struct ZoningMetrics {
  Prf macro;  // over the four specific categories
  std::vector<std::pair<std::string, Prf>> per_class;
  double accuracy = 0.0;  // share of test queries zoned correctly
};

// One vote per distinct test query (the zone output is a function of
// the query alone, so every row of a query agrees). Truth categories
// come from the examples; macro averages cover the specific categories
// only, though a stray "Other" prediction still costs its true class.
ZoningMetrics zoning_metrics(const std::vector<Prediction>& preds,
                             const std::vector<Example>& truth);

// ---- experiment driver -----------------------------------------------------------

struct ModelReport {
  std::string name;  // "baseline" or "alpha_<value>"
  double alpha = 0.0;
  bool single_task = false;
  std::string checkpoint_path;
  std::string predictions_path;
  std::size_t epochs_run = 0;
  bool early_stopped = false;
  RecommendationMetrics recommendation;
  bool has_zoning = false;  // baseline rows never report zoning
  ZoningMetrics zoning;
};

struct ExperimentReport {
  std::uint64_t fingerprint = 0;
  std::vector<ModelReport> models;
  std::vector<std::string> report_files;
  std::size_t train_examples = 0;
  std::size_t test_examples = 0;
  std::size_t test_queries = 0;
};

// Builds the dataset once, trains the baseline plus one model per
// alpha on that identical split and seed, archives predictions, and
// renders every table from the archived files. Completed stages are
// skipped on rerun when their artifacts carry the current config
// fingerprint; any failure surfaces as ErrorKind::stage naming the
// stage. Deterministic: config and seed fix every artifact byte.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// ---- command line ------------------------------------------------------------------

// Entry point behind main(). Subcommands: ingest, build-dataset,
// train, evaluate, kappa, compare, report, synth, experiment.
int cli(int argc, char** argv);

}  // namespace citerec

#endif
