#ifndef CITEREC_MODEL_HPP
#define CITEREC_MODEL_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "citerec/adam.hpp"
#include "citerec/dataset.hpp"
#include "citerec/layers.hpp"
#include "citerec/text.hpp"

namespace citerec {

// Widths of the joint network. Defaults are the full-size
// configuration; tests and the synthetic experiments shrink them.
struct DimensionConfig {
  std::size_t embed = 200;
  std::size_t hidden = 128;     // per-direction recurrent width
  std::size_t attention = 128;
  std::size_t sentence = 128;   // projected sentence vector width
  std::size_t fuse1 = 256;      // title+abstract fusion layer
  std::size_t fuse2 = 256;      // query+paper fusion layer
  std::size_t zone_hidden = 20;
  std::size_t max_query_tokens = 64;
  std::size_t max_title_tokens = 32;
  std::size_t max_abstract_tokens = 300;
};

// Shared embedding feeding three separately parameterized sentence
// encoders (query, title, abstract), fused through two relu layers
// into the citation softmax; the zoning head branches off the query
// sentence vector alone. alpha scales the zoning loss inside the
// joint objective; single_task drops the zoning head from training
// entirely.
struct SentenceEncoder {
  nd::BiLstm rnn;
  nd::AttentionPool pool;
};

struct ModelParams {
  DimensionConfig dims;
  std::size_t vocab_size = 0;
  double alpha = 0.1;
  bool single_task = false;
  std::uint64_t init_seed = 0;

  nd::Tensor embedding;  // vocab_size x embed
  SentenceEncoder query_enc, title_enc, abstract_enc;
  nd::Affine paper_fuse;  // fuse1 x (2*sentence)
  nd::Affine match_fuse;  // fuse2 x (sentence + fuse1)
  nd::Affine cite_head;   // 2 x fuse2, row 0 = cite
  nd::Affine zone_fc;     // zone_hidden x sentence
  nd::Affine zone_head;   // kAzCount x zone_hidden

  static ModelParams init(const DimensionConfig& dims, std::size_t vocab_size,
                          std::uint64_t seed, double alpha, bool single_task);

  // Fixed-order parameter list; optimizer state and flat gradient
  // buffers are laid out in this order.
  std::vector<nd::ParamRef> refs();
  std::size_t param_count();
  void zero_grad();
  void copy_values_from(const ModelParams& other);
};

// ---- input encoding ---------------------------------------------------------

struct EncodedInputs {
  Encoded query;
  Encoded title;
  Encoded abstract;
};

EncodedInputs encode_inputs(const Query& query, const Paper& candidate, const Vocabulary& vocab,
                            const DimensionConfig& dims);
// Resolves the example's ids through the corpus first; unknown ids
// throw ErrorKind::lookup.
EncodedInputs encode_inputs(const Example& example, const CorpusIndex& corpus,
                            const Vocabulary& vocab, const DimensionConfig& dims);

// ---- forward / backward -----------------------------------------------------

struct EncoderTrace {
  std::vector<double> embedded;  // padded_len x embed
  nd::BiLstmTrace rnn;
  nd::AttentionTrace pool;
  std::vector<double> out;  // sentence vector
};

struct ForwardTrace {
  EncoderTrace query, title, abstract;
  std::vector<double> paper_cat, paper_pre, paper_act;
  std::vector<double> match_cat, match_pre, match_act;
  std::array<double, 2> cite_logits{}, p_cite{};  // index 0 = cite
  std::vector<double> zone_pre, zone_act, zone_logits, p_az;
};

void forward_pass(const ModelParams& params, const EncodedInputs& in, ForwardTrace& trace);

struct ForwardScores {
  std::array<double, 2> p_cite{};  // [cite, not_cite]
  std::vector<double> p_az;        // kAzCount wide, kAzOrder indexing
};

ForwardScores forward_multitask(const ModelParams& params, const EncodedInputs& in);
// The citation pair only; the zoning head is not evaluated.
std::array<double, 2> forward_single(const ModelParams& params, const EncodedInputs& in);

// dp_cite / dp_az are gradients with respect to the softmax outputs;
// pass an empty dp_az to skip the zoning branch. Accumulates into the
// .g buffers of params.
void backward_pass(ModelParams& params, const EncodedInputs& in, const ForwardTrace& trace,
                   const std::array<double, 2>& dp_cite, const std::vector<double>& dp_az);

struct LossParts {
  double joint = 0.0;
  double cite = 0.0;
  double zone = 0.0;
};

// Cross-entropy of the citation pair plus alpha times the zoning
// cross-entropy; single_task ignores the zoning branch.
LossParts joint_loss(const ForwardTrace& trace, CiteLabel cite, AzLabel az, double alpha,
                     bool single_task);

// Forward, loss, and gradient accumulation for one example. The loss
// gradient is scaled by `scale` (1/batch size for mean-gradient
// training).
LossParts train_example_backprop(ModelParams& params, const EncodedInputs& in, CiteLabel cite,
                                 AzLabel az, double scale);

// ---- training -----------------------------------------------------------------

struct TrainConfig {
  DimensionConfig dims;
  double alpha = 0.1;
  bool single_task = false;
  double learning_rate = 0.001;
  std::size_t batch_size = 64;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;
  // Examples per accumulation block. Blocks are a fixed partition of
  // each batch, processed in parallel but reduced in order, so results
  // do not depend on the thread count.
  std::size_t block_size = 8;
  // Early stopping: a fraction of training queries is held out and the
  // run stops after `patience` epochs without improvement there,
  // returning the best parameters seen. patience 0 trains for the
  // full epoch budget on all examples.
  int patience = 0;
  double holdout_fraction = 0.1;
  int vocab_min_frequency = 2;
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_joint = 0.0;
  double mean_cite = 0.0;
  double mean_zone = 0.0;
  double weighted_zone = 0.0;  // alpha * mean_zone, the share inside the objective
  double holdout_joint = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> history;
  std::size_t epochs_run = 0;
  bool early_stopped = false;
};

// Mini-batch Adam over the examples; per-batch gradients are the mean
// over the batch. Same seed, same inputs, same thread count or not:
// same parameters out. Throws ErrorKind::numeric if the loss stops
// being finite.
TrainResult train(const std::vector<Example>& examples, const CorpusIndex& corpus,
                  const Vocabulary& vocab, const TrainConfig& cfg);

// ---- inference -----------------------------------------------------------------

struct Recommendation {
  std::string paper_id;
  double p_cite = 0.0;
  double p_not_cite = 0.0;
  bool recommended = false;  // p_cite strictly greater
};

// Scores every candidate against the query and ranks by p_cite
// descending, paper id ascending on exact ties.
std::vector<Recommendation> recommend(const Query& query,
                                      const std::vector<const Paper*>& candidates,
                                      const Vocabulary& vocab, const ModelParams& params);

// Zone of the query sentence: argmax over the zoning softmax, earliest
// category in kAzOrder on ties.
AzLabel classify_az(const Query& query, const Vocabulary& vocab, const ModelParams& params);

// ---- checkpoints ------------------------------------------------------------------

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const Vocabulary& vocab);

struct Checkpoint {
  ModelParams params;
  Vocabulary vocab;
};

// Validates tensor shapes and the stored vocabulary fingerprint.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace citerec

#endif
