#include "citerec/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "citerec/error.hpp"
#include "citerec/kernels.hpp"

namespace citerec {

using nlohmann::json;

// ---- parameters ----------------------------------------------------------------

ModelParams ModelParams::init(const DimensionConfig& dims, std::size_t vocab_size,
                              std::uint64_t seed, double alpha, bool single_task) {
  ModelParams p;
  p.dims = dims;
  p.vocab_size = vocab_size;
  p.alpha = alpha;
  p.single_task = single_task;
  p.init_seed = seed;
  Rng rng(seed);
  p.embedding = nd::Tensor::zeros({vocab_size, dims.embed});
  double re = 1.0 / std::sqrt(static_cast<double>(dims.embed));
  p.embedding.fill_uniform(rng, -re, re);
  p.embedding.alloc_grad();
  for (SentenceEncoder* enc : {&p.query_enc, &p.title_enc, &p.abstract_enc}) {
    enc->rnn.init(dims.embed, dims.hidden, rng);
    enc->pool.init(enc->rnn.state_dim(), dims.attention, dims.sentence, rng);
  }
  p.paper_fuse.init(dims.fuse1, 2 * dims.sentence, rng);
  p.match_fuse.init(dims.fuse2, dims.sentence + dims.fuse1, rng);
  p.cite_head.init(2, dims.fuse2, rng);
  p.zone_fc.init(dims.zone_hidden, dims.sentence, rng);
  p.zone_head.init(kAzCount, dims.zone_hidden, rng);
  return p;
}

namespace {

void collect_refs(ModelParams& p, std::vector<nd::ParamRef>& out) {
  auto add = [&out](const std::string& name, nd::Tensor& t) { out.push_back({name, &t}); };
  add("embedding", p.embedding);
  const char* enc_names[] = {"query_enc", "title_enc", "abstract_enc"};
  SentenceEncoder* encs[] = {&p.query_enc, &p.title_enc, &p.abstract_enc};
  for (int i = 0; i < 3; ++i) {
    std::string base = enc_names[i];
    add(base + ".fwd.Wx", encs[i]->rnn.fwd.Wx);
    add(base + ".fwd.Wh", encs[i]->rnn.fwd.Wh);
    add(base + ".fwd.b", encs[i]->rnn.fwd.b);
    add(base + ".bwd.Wx", encs[i]->rnn.bwd.Wx);
    add(base + ".bwd.Wh", encs[i]->rnn.bwd.Wh);
    add(base + ".bwd.b", encs[i]->rnn.bwd.b);
    add(base + ".pool.Wa", encs[i]->pool.Wa);
    add(base + ".pool.ba", encs[i]->pool.ba);
    add(base + ".pool.u", encs[i]->pool.u);
    add(base + ".pool.Wp", encs[i]->pool.Wp);
    add(base + ".pool.bp", encs[i]->pool.bp);
  }
  add("paper_fuse.W", p.paper_fuse.W);
  add("paper_fuse.b", p.paper_fuse.b);
  add("match_fuse.W", p.match_fuse.W);
  add("match_fuse.b", p.match_fuse.b);
  add("cite_head.W", p.cite_head.W);
  add("cite_head.b", p.cite_head.b);
  add("zone_fc.W", p.zone_fc.W);
  add("zone_fc.b", p.zone_fc.b);
  add("zone_head.W", p.zone_head.W);
  add("zone_head.b", p.zone_head.b);
}

}  // namespace

std::vector<nd::ParamRef> ModelParams::refs() {
  std::vector<nd::ParamRef> out;
  out.reserve(40);
  collect_refs(*this, out);
  return out;
}

std::size_t ModelParams::param_count() { return nd::total_size(refs()); }

void ModelParams::zero_grad() {
  for (nd::ParamRef& r : refs()) r.tensor->zero_grad();
}

void ModelParams::copy_values_from(const ModelParams& other) {
  std::vector<nd::ParamRef> dst = refs();
  std::vector<nd::ParamRef> src = const_cast<ModelParams&>(other).refs();
  if (dst.size() != src.size())
    throw Error(ErrorKind::shape_mismatch, "parameter lists differ in length");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i].tensor->size() != src[i].tensor->size())
      throw Error(ErrorKind::shape_mismatch, "parameter '" + dst[i].name + "' differs in size");
    dst[i].tensor->v = src[i].tensor->v;
  }
}

// ---- input encoding --------------------------------------------------------------

EncodedInputs encode_inputs(const Query& query, const Paper& candidate, const Vocabulary& vocab,
                            const DimensionConfig& dims) {
  EncodedInputs in;
  in.query = tokenize_encode(query.text, vocab, dims.max_query_tokens);
  in.title = tokenize_encode(candidate.title, vocab, dims.max_title_tokens);
  in.abstract = tokenize_encode(resolve_abstract(candidate), vocab, dims.max_abstract_tokens);
  return in;
}

EncodedInputs encode_inputs(const Example& example, const CorpusIndex& corpus,
                            const Vocabulary& vocab, const DimensionConfig& dims) {
  const Query* q = corpus.query(example.query_id);
  if (!q) throw Error(ErrorKind::lookup, "unknown query '" + example.query_id + "'");
  const Paper* p = corpus.paper(example.candidate_id);
  if (!p) throw Error(ErrorKind::lookup, "unknown paper '" + example.candidate_id + "'");
  return encode_inputs(*q, *p, vocab, dims);
}

// ---- forward / backward -------------------------------------------------------------

namespace {

void encode_sentence(const nd::Tensor& embedding, const SentenceEncoder& enc, const Encoded& in,
                     std::size_t sentence_dim, EncoderTrace& tr) {
  const std::size_t E = embedding.cols();
  const std::size_t T = in.ids.size();
  tr.embedded.assign(T * E, 0.0);
  for (std::size_t t = 0; t < in.true_len; ++t) {
    int id = in.ids[t];
    if (id < 0 || static_cast<std::size_t>(id) >= embedding.rows())
      throw Error(ErrorKind::lookup, "token id " + std::to_string(id) +
                                         " outside the embedding table of " +
                                         std::to_string(embedding.rows()) + " rows");
    std::copy(embedding.v.begin() + id * E, embedding.v.begin() + (id + 1) * E,
              tr.embedded.begin() + t * E);
  }
  nd::bilstm_encode(enc.rnn, tr.embedded.data(), T, in.true_len, tr.rnn);
  tr.out.assign(sentence_dim, 0.0);
  nd::attention_forward(enc.pool, tr.rnn.states.data(), in.true_len, tr.pool, tr.out);
}

void encode_sentence_backward(nd::Tensor& embedding, SentenceEncoder& enc, const Encoded& in,
                              const EncoderTrace& tr, std::span<const double> dout) {
  if (in.true_len == 0) return;  // the zero sentence vector is constant
  const std::size_t E = embedding.cols();
  const std::size_t S = enc.rnn.state_dim();
  std::vector<double> dstates(tr.rnn.padded_len * S, 0.0);
  nd::attention_backward(enc.pool, tr.rnn.states.data(), tr.pool, dout, dstates.data());
  std::vector<double> dembedded(tr.embedded.size(), 0.0);
  nd::bilstm_backward(enc.rnn, tr.embedded.data(), tr.rnn, dstates.data(), dembedded.data());
  for (std::size_t t = 0; t < in.true_len; ++t) {
    int id = in.ids[t];
    nd::vec_acc(embedding.g.data() + id * E, dembedded.data() + t * E, E);
  }
}

}  // namespace

void forward_pass(const ModelParams& params, const EncodedInputs& in, ForwardTrace& trace) {
  const DimensionConfig& d = params.dims;
  encode_sentence(params.embedding, params.query_enc, in.query, d.sentence, trace.query);
  encode_sentence(params.embedding, params.title_enc, in.title, d.sentence, trace.title);
  encode_sentence(params.embedding, params.abstract_enc, in.abstract, d.sentence,
                  trace.abstract);

  trace.paper_cat.assign(2 * d.sentence, 0.0);
  std::copy(trace.title.out.begin(), trace.title.out.end(), trace.paper_cat.begin());
  std::copy(trace.abstract.out.begin(), trace.abstract.out.end(),
            trace.paper_cat.begin() + d.sentence);
  trace.paper_pre.assign(d.fuse1, 0.0);
  nd::affine_forward(params.paper_fuse, trace.paper_cat, trace.paper_pre);
  trace.paper_act.assign(d.fuse1, 0.0);
  nd::relu(trace.paper_pre, trace.paper_act);

  trace.match_cat.assign(d.sentence + d.fuse1, 0.0);
  std::copy(trace.query.out.begin(), trace.query.out.end(), trace.match_cat.begin());
  std::copy(trace.paper_act.begin(), trace.paper_act.end(),
            trace.match_cat.begin() + d.sentence);
  trace.match_pre.assign(d.fuse2, 0.0);
  nd::affine_forward(params.match_fuse, trace.match_cat, trace.match_pre);
  trace.match_act.assign(d.fuse2, 0.0);
  nd::relu(trace.match_pre, trace.match_act);

  nd::affine_forward(params.cite_head, trace.match_act, trace.cite_logits);
  nd::softmax(trace.cite_logits, trace.p_cite);

  trace.zone_pre.assign(d.zone_hidden, 0.0);
  nd::affine_forward(params.zone_fc, trace.query.out, trace.zone_pre);
  trace.zone_act.assign(d.zone_hidden, 0.0);
  nd::relu(trace.zone_pre, trace.zone_act);
  trace.zone_logits.assign(kAzCount, 0.0);
  nd::affine_forward(params.zone_head, trace.zone_act, trace.zone_logits);
  trace.p_az.assign(kAzCount, 0.0);
  nd::softmax(trace.zone_logits, trace.p_az);
}

ForwardScores forward_multitask(const ModelParams& params, const EncodedInputs& in) {
  ForwardTrace trace;
  forward_pass(params, in, trace);
  ForwardScores s;
  s.p_cite = trace.p_cite;
  s.p_az = trace.p_az;
  return s;
}

std::array<double, 2> forward_single(const ModelParams& params, const EncodedInputs& in) {
  // Same trunk as the joint forward; only the zoning branch is left
  // out, so a single-task model is the alpha-free special case rather
  // than different code.
  const DimensionConfig& d = params.dims;
  ForwardTrace trace;
  encode_sentence(params.embedding, params.query_enc, in.query, d.sentence, trace.query);
  encode_sentence(params.embedding, params.title_enc, in.title, d.sentence, trace.title);
  encode_sentence(params.embedding, params.abstract_enc, in.abstract, d.sentence,
                  trace.abstract);
  trace.paper_cat.assign(2 * d.sentence, 0.0);
  std::copy(trace.title.out.begin(), trace.title.out.end(), trace.paper_cat.begin());
  std::copy(trace.abstract.out.begin(), trace.abstract.out.end(),
            trace.paper_cat.begin() + d.sentence);
  trace.paper_pre.assign(d.fuse1, 0.0);
  nd::affine_forward(params.paper_fuse, trace.paper_cat, trace.paper_pre);
  trace.paper_act.assign(d.fuse1, 0.0);
  nd::relu(trace.paper_pre, trace.paper_act);
  trace.match_cat.assign(d.sentence + d.fuse1, 0.0);
  std::copy(trace.query.out.begin(), trace.query.out.end(), trace.match_cat.begin());
  std::copy(trace.paper_act.begin(), trace.paper_act.end(),
            trace.match_cat.begin() + d.sentence);
  trace.match_pre.assign(d.fuse2, 0.0);
  nd::affine_forward(params.match_fuse, trace.match_cat, trace.match_pre);
  trace.match_act.assign(d.fuse2, 0.0);
  nd::relu(trace.match_pre, trace.match_act);
  std::array<double, 2> logits{}, probs{};
  nd::affine_forward(params.cite_head, trace.match_act, logits);
  nd::softmax(logits, probs);
  return probs;
}

void backward_pass(ModelParams& params, const EncodedInputs& in, const ForwardTrace& trace,
                   const std::array<double, 2>& dp_cite, const std::vector<double>& dp_az) {
  const DimensionConfig& d = params.dims;
  std::vector<double> dquery(d.sentence, 0.0);

  if (!dp_az.empty()) {
    std::vector<double> dzone_logits(kAzCount, 0.0);
    nd::softmax_backward(trace.p_az, dp_az, dzone_logits);
    std::vector<double> dzone_act(d.zone_hidden, 0.0);
    nd::affine_backward(params.zone_head, trace.zone_act, dzone_logits, dzone_act);
    std::vector<double> dzone_pre(d.zone_hidden, 0.0);
    nd::relu_backward(trace.zone_pre, dzone_act, dzone_pre);
    nd::affine_backward(params.zone_fc, trace.query.out, dzone_pre, dquery);
  }

  std::array<double, 2> dcite_logits{};
  nd::softmax_backward(trace.p_cite, dp_cite, dcite_logits);
  std::vector<double> dmatch_act(d.fuse2, 0.0);
  nd::affine_backward(params.cite_head, trace.match_act, dcite_logits, dmatch_act);
  std::vector<double> dmatch_pre(d.fuse2, 0.0);
  nd::relu_backward(trace.match_pre, dmatch_act, dmatch_pre);
  std::vector<double> dmatch_cat(d.sentence + d.fuse1, 0.0);
  nd::affine_backward(params.match_fuse, trace.match_cat, dmatch_pre, dmatch_cat);
  nd::vec_acc(dquery.data(), dmatch_cat.data(), d.sentence);

  std::vector<double> dpaper_pre(d.fuse1, 0.0);
  nd::relu_backward(trace.paper_pre,
                    std::span<const double>(dmatch_cat).subspan(d.sentence, d.fuse1), dpaper_pre);
  std::vector<double> dpaper_cat(2 * d.sentence, 0.0);
  nd::affine_backward(params.paper_fuse, trace.paper_cat, dpaper_pre, dpaper_cat);

  encode_sentence_backward(params.embedding, params.query_enc, in.query, trace.query, dquery);
  encode_sentence_backward(params.embedding, params.title_enc, in.title, trace.title,
                           std::span<const double>(dpaper_cat).first(d.sentence));
  encode_sentence_backward(params.embedding, params.abstract_enc, in.abstract, trace.abstract,
                           std::span<const double>(dpaper_cat).subspan(d.sentence, d.sentence));
}

LossParts joint_loss(const ForwardTrace& trace, CiteLabel cite, AzLabel az, double alpha,
                     bool single_task) {
  LossParts parts;
  std::array<double, 2> cite_onehot{cite == CiteLabel::cite ? 1.0 : 0.0,
                                    cite == CiteLabel::cite ? 0.0 : 1.0};
  parts.cite = nd::cross_entropy(cite_onehot, trace.p_cite);
  if (!single_task) {
    std::vector<double> az_onehot(kAzCount, 0.0);
    az_onehot[static_cast<std::size_t>(az)] = 1.0;
    parts.zone = nd::cross_entropy(az_onehot, trace.p_az);
  }
  parts.joint = parts.cite + (single_task ? 0.0 : alpha * parts.zone);
  return parts;
}

LossParts train_example_backprop(ModelParams& params, const EncodedInputs& in, CiteLabel cite,
                                 AzLabel az, double scale) {
  ForwardTrace trace;
  forward_pass(params, in, trace);
  LossParts parts = joint_loss(trace, cite, az, params.alpha, params.single_task);

  std::array<double, 2> cite_onehot{cite == CiteLabel::cite ? 1.0 : 0.0,
                                    cite == CiteLabel::cite ? 0.0 : 1.0};
  std::array<double, 2> dp_cite{};
  nd::cross_entropy_backward(cite_onehot, trace.p_cite, scale, dp_cite);

  std::vector<double> dp_az;
  // alpha 0 takes the same path as single-task training: the zoning
  // branch contributes nothing, so it is not walked at all and the
  // update streams match bit for bit.
  if (!params.single_task && params.alpha != 0.0) {
    std::vector<double> az_onehot(kAzCount, 0.0);
    az_onehot[static_cast<std::size_t>(az)] = 1.0;
    dp_az.assign(kAzCount, 0.0);
    nd::cross_entropy_backward(az_onehot, trace.p_az, scale * params.alpha, dp_az);
  }
  backward_pass(params, in, trace, dp_cite, dp_az);
  return parts;
}

// ---- training ----------------------------------------------------------------------

namespace {

LossParts eval_example_loss(const ModelParams& params, const EncodedInputs& in, CiteLabel cite,
                            AzLabel az) {
  ForwardTrace trace;
  forward_pass(params, in, trace);
  return joint_loss(trace, cite, az, params.alpha, params.single_task);
}

}  // namespace

TrainResult train(const std::vector<Example>& examples, const CorpusIndex& corpus,
                  const Vocabulary& vocab, const TrainConfig& cfg) {
  if (examples.empty()) throw Error(ErrorKind::invalid_input, "no training examples");
  if (cfg.batch_size == 0 || cfg.block_size == 0)
    throw Error(ErrorKind::config, "batch_size and block_size must be positive");

  const std::size_t n = examples.size();
  std::vector<EncodedInputs> enc(n);
  std::vector<std::string> enc_errors(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::size_t i = 0; i < n; ++i) {
    try {
      enc[i] = encode_inputs(examples[i], corpus, vocab, cfg.dims);
    } catch (const std::exception& e) {
      enc_errors[i] = e.what();
    }
  }
  for (const std::string& err : enc_errors)
    if (!err.empty()) throw Error(ErrorKind::lookup, err);

  // Hold out whole queries for early stopping when requested.
  std::vector<std::size_t> train_idx, hold_idx;
  {
    std::set<std::string> hold_queries;
    if (cfg.patience > 0 && cfg.holdout_fraction > 0.0) {
      std::set<std::string> qids;
      for (const Example& e : examples) qids.insert(e.query_id);
      std::vector<std::string> ids(qids.begin(), qids.end());
      Rng rng(cfg.seed ^ 0x9d2c5680aull);
      rng.shuffle(ids);
      std::size_t take = static_cast<std::size_t>(cfg.holdout_fraction * static_cast<double>(ids.size()));
      for (std::size_t i = 0; i < take && i < ids.size(); ++i) hold_queries.insert(ids[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (hold_queries.count(examples[i].query_id)) hold_idx.push_back(i);
      else train_idx.push_back(i);
    }
    if (train_idx.empty())
      throw Error(ErrorKind::insufficient, "holdout fraction left no training examples");
  }
  const bool use_holdout = cfg.patience > 0 && !hold_idx.empty();

  TrainResult result;
  result.params = ModelParams::init(cfg.dims, vocab.size(), cfg.seed, cfg.alpha, cfg.single_task);
  ModelParams& params = result.params;
  std::vector<nd::ParamRef> refs = params.refs();
  const std::size_t total = nd::total_size(refs);

  nd::AdamState adam;
  adam.lr = cfg.learning_rate;
  adam.init(total);

  std::vector<double> grads(total, 0.0);
  const std::size_t max_blocks = (cfg.batch_size + cfg.block_size - 1) / cfg.block_size;
  std::vector<ModelParams> clones;
  std::vector<LossParts> slot(n);

  ModelParams best_params;
  double best_holdout = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order = train_idx;
    Rng epoch_rng(cfg.seed + 0x9e3779b97f4a7c15ULL * (epoch + 1));
    epoch_rng.shuffle(order);

    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t be = std::min(b + cfg.batch_size, order.size());
      const double scale = 1.0 / static_cast<double>(be - b);
      const std::size_t nblocks = (be - b + cfg.block_size - 1) / cfg.block_size;
      if (clones.size() < nblocks) clones.resize(nblocks);

      // Blocks are a fixed partition of the batch: parallel execution
      // changes nothing about which example lands in which block, and
      // the reduction below walks blocks in order, so the accumulated
      // gradient is identical for any thread count.
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
      for (std::size_t blk = 0; blk < nblocks; ++blk) {
        ModelParams& cl = clones[blk];
        if (cl.vocab_size == 0) cl = params;
        else cl.copy_values_from(params);
        cl.zero_grad();
        const std::size_t lo = b + blk * cfg.block_size;
        const std::size_t hi = std::min(lo + cfg.block_size, be);
        for (std::size_t i = lo; i < hi; ++i) {
          std::size_t ex = order[i];
          slot[ex] = train_example_backprop(cl, enc[ex], examples[ex].cite, examples[ex].az,
                                            scale);
        }
      }

      std::fill(grads.begin(), grads.end(), 0.0);
      for (std::size_t blk = 0; blk < nblocks; ++blk) {
        std::vector<nd::ParamRef> crefs = clones[blk].refs();
        std::size_t off = 0;
        for (nd::ParamRef& r : crefs) {
          nd::serial::vec_acc(grads.data() + off, r.tensor->g.data(), r.tensor->size());
          off += r.tensor->size();
        }
      }
      nd::adam_step(refs, grads, adam);
    }

    EpochStats stats;
    stats.epoch = epoch;
    for (std::size_t i : train_idx) {
      stats.mean_joint += slot[i].joint;
      stats.mean_cite += slot[i].cite;
      stats.mean_zone += slot[i].zone;
    }
    double dn = static_cast<double>(train_idx.size());
    stats.mean_joint /= dn;
    stats.mean_cite /= dn;
    stats.mean_zone /= dn;
    stats.weighted_zone = params.single_task ? 0.0 : params.alpha * stats.mean_zone;
    if (!std::isfinite(stats.mean_joint))
      throw Error(ErrorKind::numeric,
                  "training loss is not finite at epoch " + std::to_string(epoch));

    if (use_holdout) {
      std::vector<double> hold_losses(hold_idx.size(), 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
      for (std::size_t hi = 0; hi < hold_idx.size(); ++hi) {
        std::size_t ex = hold_idx[hi];
        hold_losses[hi] =
            eval_example_loss(params, enc[ex], examples[ex].cite, examples[ex].az).joint;
      }
      double sum = 0.0;
      for (double l : hold_losses) sum += l;
      stats.holdout_joint = sum / static_cast<double>(hold_idx.size());
    }

    result.history.push_back(stats);
    result.epochs_run = epoch + 1;

    if (use_holdout) {
      if (stats.holdout_joint < best_holdout) {
        best_holdout = stats.holdout_joint;
        best_params = params;
        bad_epochs = 0;
      } else {
        ++bad_epochs;
        if (bad_epochs >= cfg.patience) {
          result.early_stopped = true;
          break;
        }
      }
    }
  }

  if (use_holdout && best_params.vocab_size != 0) {
    // Hand back the parameters from the best held-out epoch, not the
    // last one trained.
    params.copy_values_from(best_params);
  }
  return result;
}

// ---- inference -------------------------------------------------------------------------

std::vector<Recommendation> recommend(const Query& query,
                                      const std::vector<const Paper*>& candidates,
                                      const Vocabulary& vocab, const ModelParams& params) {
  std::vector<Recommendation> out(candidates.size());
  std::vector<std::string> errors(candidates.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    try {
      EncodedInputs in = encode_inputs(query, *candidates[i], vocab, params.dims);
      std::array<double, 2> p = forward_multitask(params, in).p_cite;
      out[i] = {candidates[i]->paper_id, p[0], p[1], p[0] > p[1]};
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const std::string& err : errors)
    if (!err.empty()) throw Error(ErrorKind::invalid_input, err);
  std::sort(out.begin(), out.end(), [](const Recommendation& a, const Recommendation& b) {
    if (a.p_cite != b.p_cite) return a.p_cite > b.p_cite;
    return a.paper_id < b.paper_id;
  });
  return out;
}

AzLabel classify_az(const Query& query, const Vocabulary& vocab, const ModelParams& params) {
  // The zoning head reads only the query encoding; feed empty title
  // and abstract.
  EncodedInputs in;
  in.query = tokenize_encode(query.text, vocab, params.dims.max_query_tokens);
  in.title.ids.assign(params.dims.max_title_tokens, Vocabulary::pad_index);
  in.title.true_len = 0;
  in.abstract.ids.assign(params.dims.max_abstract_tokens, Vocabulary::pad_index);
  in.abstract.true_len = 0;
  ForwardTrace trace;
  forward_pass(params, in, trace);
  std::size_t best = 0;
  for (std::size_t i = 1; i < trace.p_az.size(); ++i)
    if (trace.p_az[i] > trace.p_az[best]) best = i;
  return kAzOrder[best];
}

// ---- checkpoints ------------------------------------------------------------------------

namespace {

json dims_to_json(const DimensionConfig& d) {
  return json{{"embed", d.embed},
              {"hidden", d.hidden},
              {"attention", d.attention},
              {"sentence", d.sentence},
              {"fuse1", d.fuse1},
              {"fuse2", d.fuse2},
              {"zone_hidden", d.zone_hidden},
              {"max_query_tokens", d.max_query_tokens},
              {"max_title_tokens", d.max_title_tokens},
              {"max_abstract_tokens", d.max_abstract_tokens}};
}

DimensionConfig dims_from_json(const json& j) {
  DimensionConfig d;
  d.embed = j.at("embed").get<std::size_t>();
  d.hidden = j.at("hidden").get<std::size_t>();
  d.attention = j.at("attention").get<std::size_t>();
  d.sentence = j.at("sentence").get<std::size_t>();
  d.fuse1 = j.at("fuse1").get<std::size_t>();
  d.fuse2 = j.at("fuse2").get<std::size_t>();
  d.zone_hidden = j.at("zone_hidden").get<std::size_t>();
  d.max_query_tokens = j.at("max_query_tokens").get<std::size_t>();
  d.max_title_tokens = j.at("max_title_tokens").get<std::size_t>();
  d.max_abstract_tokens = j.at("max_abstract_tokens").get<std::size_t>();
  return d;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const Vocabulary& vocab) {
  json j;
  j["format_version"] = 1;
  j["dims"] = dims_to_json(params.dims);
  j["vocab_size"] = params.vocab_size;
  j["alpha"] = params.alpha;
  j["single_task"] = params.single_task;
  j["init_seed"] = params.init_seed;
  j["vocab"] = json{{"min_frequency", vocab.min_frequency()}, {"tokens", vocab.tokens()}};
  j["vocab_fingerprint"] = vocab.fingerprint();
  json tensors = json::array();
  for (nd::ParamRef& r : const_cast<ModelParams&>(params).refs()) {
    tensors.push_back(
        json{{"name", r.name}, {"shape", r.tensor->shape}, {"values", r.tensor->v}});
  }
  j["params"] = std::move(tensors);
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  f << j.dump() << '\n';
  if (!f) throw Error(ErrorKind::io, "short write to '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::io, "cannot read '" + path + "'");
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_input, path + ": " + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != 1)
      throw Error(ErrorKind::invalid_input, path + ": unsupported checkpoint format");
    Checkpoint ck;
    ck.vocab = Vocabulary::from_index(j.at("vocab").at("tokens").get<std::vector<std::string>>(),
                                      j.at("vocab").at("min_frequency").get<int>());
    std::uint64_t fp = j.at("vocab_fingerprint").get<std::uint64_t>();
    if (fp != ck.vocab.fingerprint())
      throw Error(ErrorKind::invalid_input, path + ": vocabulary fingerprint mismatch");
    DimensionConfig dims = dims_from_json(j.at("dims"));
    ck.params = ModelParams::init(dims, j.at("vocab_size").get<std::size_t>(),
                                  j.at("init_seed").get<std::uint64_t>(),
                                  j.at("alpha").get<double>(), j.at("single_task").get<bool>());
    if (ck.params.vocab_size != ck.vocab.size())
      throw Error(ErrorKind::shape_mismatch,
                  path + ": vocab_size disagrees with the stored token list");
    std::unordered_map<std::string, const json*> by_name;
    for (const json& t : j.at("params")) by_name.emplace(t.at("name").get<std::string>(), &t);
    for (nd::ParamRef& r : ck.params.refs()) {
      auto it = by_name.find(r.name);
      if (it == by_name.end())
        throw Error(ErrorKind::invalid_input, path + ": missing tensor '" + r.name + "'");
      const json& t = *it->second;
      auto shape = t.at("shape").get<std::vector<std::size_t>>();
      if (shape != r.tensor->shape)
        throw Error(ErrorKind::shape_mismatch,
                    path + ": tensor '" + r.name + "' has the wrong shape");
      auto values = t.at("values").get<std::vector<double>>();
      if (values.size() != r.tensor->size())
        throw Error(ErrorKind::shape_mismatch,
                    path + ": tensor '" + r.name + "' has the wrong element count");
      r.tensor->v = std::move(values);
      by_name.erase(it);
    }
    if (!by_name.empty())
      throw Error(ErrorKind::invalid_input,
                  path + ": unknown tensor '" + by_name.begin()->first + "'");
    return ck;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_input, path + ": " + e.what());
  }
}

}  // namespace citerec
