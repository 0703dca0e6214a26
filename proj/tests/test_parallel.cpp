#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cstring>
#include <vector>

#include "citerec/kernels.hpp"
#include "citerec/model.hpp"
#include "citerec/rng.hpp"
#include "citerec/synth.hpp"

using namespace citerec;

// The training loop advertises results that do not depend on the
// thread count: batches are cut into fixed blocks, each block works on
// a private parameter clone, and the block gradients are reduced in
// block order. These tests rerun identical work under different
// requested thread counts and demand bitwise equality. On a single
// hardware thread they still exercise the decomposition, since the
// block partition and the OpenMP scheduling machinery stay active.

namespace {

struct ThreadGuard {
#ifdef _OPENMP
  int saved;
  explicit ThreadGuard(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~ThreadGuard() { omp_set_num_threads(saved); }
#else
  explicit ThreadGuard(int) {}
#endif
};

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

struct TrainSetup {
  CorpusIndex corpus;
  Vocabulary vocab;
  std::vector<Example> examples;
  TrainConfig cfg;
};

TrainSetup make_setup() {
  SynthConfig sc;
  sc.topics = 3;
  sc.queries_per_paper = 2;
  sc.seed = 11;
  SynthCorpus synth = make_synth_corpus(sc);
  CorpusIndex corpus = CorpusIndex::build(synth.papers, synth.queries);

  std::vector<std::string> texts;
  for (const Paper& p : corpus.papers) texts.push_back(p.title + " " + p.abstract);
  for (const Query& q : corpus.queries) texts.push_back(q.text);
  Vocabulary vocab = Vocabulary::build(texts, 1);

  std::vector<Example> examples = assemble_dataset(corpus, NegativeSpec{});

  TrainConfig cfg;
  cfg.dims.embed = 8;
  cfg.dims.hidden = 5;
  cfg.dims.attention = 5;
  cfg.dims.sentence = 5;
  cfg.dims.fuse1 = 10;
  cfg.dims.fuse2 = 10;
  cfg.dims.zone_hidden = 5;
  cfg.dims.max_query_tokens = 12;
  cfg.dims.max_title_tokens = 8;
  cfg.dims.max_abstract_tokens = 16;
  cfg.epochs = 2;
  cfg.batch_size = 16;
  cfg.block_size = 4;
  cfg.seed = 13;
  return TrainSetup{std::move(corpus), std::move(vocab), std::move(examples), cfg};
}

std::vector<std::vector<double>> snapshot(ModelParams& p) {
  std::vector<std::vector<double>> out;
  for (nd::ParamRef& r : p.refs()) out.push_back(r.tensor->v);
  return out;
}

}  // namespace

TEST_CASE("kernels emit identical bytes under different thread requests") {
  Rng rng(77);
  std::size_t rows = 250, cols = 180;  // beyond the parallel threshold
  std::vector<double> W = random_vec(rows * cols, rng);
  std::vector<double> x = random_vec(cols, rng);
  std::vector<double> b = random_vec(rows, rng);
  std::vector<double> dy = random_vec(rows, rng);

  std::vector<double> y1(rows), y4(rows);
  std::vector<double> dx1(cols, 0.0), dx4(cols, 0.0);
  std::vector<double> dW1(rows * cols, 0.0), dW4(rows * cols, 0.0);
  std::vector<double> db1(rows, 0.0), db4(rows, 0.0);
  {
    ThreadGuard g(1);
    nd::matvec_add(y1.data(), W.data(), x.data(), b.data(), rows, cols);
    nd::matvec_t_acc(dx1.data(), W.data(), dy.data(), rows, cols);
    nd::outer_acc(dW1.data(), db1.data(), dy.data(), x.data(), rows, cols);
  }
  {
    ThreadGuard g(4);
    nd::matvec_add(y4.data(), W.data(), x.data(), b.data(), rows, cols);
    nd::matvec_t_acc(dx4.data(), W.data(), dy.data(), rows, cols);
    nd::outer_acc(dW4.data(), db4.data(), dy.data(), x.data(), rows, cols);
  }
  CHECK(std::memcmp(y1.data(), y4.data(), rows * sizeof(double)) == 0);
  CHECK(std::memcmp(dx1.data(), dx4.data(), cols * sizeof(double)) == 0);
  CHECK(std::memcmp(dW1.data(), dW4.data(), rows * cols * sizeof(double)) == 0);
  CHECK(std::memcmp(db1.data(), db4.data(), rows * sizeof(double)) == 0);
}

TEST_CASE("training lands on identical parameters under different thread requests") {
  TrainSetup s = make_setup();

  TrainResult r1, r4;
  {
    ThreadGuard g(1);
    r1 = train(s.examples, s.corpus, s.vocab, s.cfg);
  }
  {
    ThreadGuard g(4);
    r4 = train(s.examples, s.corpus, s.vocab, s.cfg);
  }
  auto v1 = snapshot(r1.params);
  auto v4 = snapshot(r4.params);
  REQUIRE(v1.size() == v4.size());
  for (std::size_t i = 0; i < v1.size(); ++i) CHECK(v1[i] == v4[i]);
  REQUIRE(r1.history.size() == r4.history.size());
  for (std::size_t i = 0; i < r1.history.size(); ++i) {
    CHECK(r1.history[i].mean_joint == r4.history[i].mean_joint);
    CHECK(r1.history[i].mean_zone == r4.history[i].mean_zone);
  }
}

TEST_CASE("scoring produces identical records under different thread requests") {
  TrainSetup s = make_setup();
  TrainResult r = train(s.examples, s.corpus, s.vocab, s.cfg);

  // score every candidate for the first few queries under both settings
  std::vector<const Paper*> candidates;
  for (const Paper& p : s.corpus.papers) candidates.push_back(&p);

  const Query* q = s.corpus.query(s.examples.front().query_id);
  REQUIRE(q != nullptr);

  std::vector<Recommendation> rec1, rec4;
  {
    ThreadGuard g(1);
    rec1 = recommend(*q, candidates, s.vocab, r.params);
  }
  {
    ThreadGuard g(4);
    rec4 = recommend(*q, candidates, s.vocab, r.params);
  }
  REQUIRE(rec1.size() == rec4.size());
  for (std::size_t i = 0; i < rec1.size(); ++i) {
    CHECK(rec1[i].paper_id == rec4[i].paper_id);
    CHECK(rec1[i].p_cite == rec4[i].p_cite);
    CHECK(rec1[i].recommended == rec4[i].recommended);
  }
}
