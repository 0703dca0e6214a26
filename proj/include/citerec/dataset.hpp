#ifndef CITEREC_DATASET_HPP
#define CITEREC_DATASET_HPP

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "citerec/ingest.hpp"

namespace citerec {

enum class CiteLabel { cite, not_cite };

std::string cite_to_string(CiteLabel c);
CiteLabel cite_from_string(std::string_view s);

// One classifier input: a query paired with a candidate paper.
struct Example {
  std::string query_id;
  std::string candidate_id;
  CiteLabel cite = CiteLabel::not_cite;
  AzLabel az = AzLabel::other;
};

// ---- lexical similarity ------------------------------------------------------

// tf-idf vectors over the candidate pool; document frequencies come
// from the pool only, so adding queries later cannot shift the
// weighting. A paper's document is its title plus resolved abstract.
class TermIndex {
 public:
  static TermIndex build(const std::vector<const Paper*>& pool);
  static TermIndex build(const std::vector<Paper>& pool);

  // Sparse tf-idf vector for arbitrary text. Terms unseen in the pool
  // carry no weight.
  std::vector<std::pair<int, double>> vectorize(std::string_view text) const;

  // Cosine similarity between free text and a pooled paper. Papers
  // outside the pool throw ErrorKind::lookup. Zero when either side
  // has no weighted terms.
  double similarity(std::string_view text, const std::string& paper_id) const;

  std::size_t pool_size() const { return pool_size_; }

 private:
  std::unordered_map<std::string, int> term_ids_;
  std::vector<double> idf_;
  std::unordered_map<std::string, std::vector<std::pair<int, double>>> doc_vecs_;
  std::unordered_map<std::string, double> doc_norms_;
  std::size_t pool_size_ = 0;
};

double similarity(const Query& query, const Paper& paper, const TermIndex& index);

// ---- negative sampling --------------------------------------------------------

struct NegativeSpec {
  std::size_t ratio = 5;                     // negatives per positive
  std::array<int, 3> strata_weights{5, 2, 3};  // high, low, median
};

// Largest-remainder split of `total` across the three strata; ties in
// the remainders resolve in stratum order high, low, median. The
// result always sums to total.
std::array<std::size_t, 3> allocate_strata(std::size_t total,
                                           const std::array<int, 3>& weights);

// Draws k*ratio negatives for the query from candidates ranked by
// similarity (descending, paper id ascending on ties): the top of the
// ranking, the bottom, and a window spreading outward from the median
// rank, skipping ranks another stratum already took. Throws
// ErrorKind::shortage when candidates cannot cover the request.
std::vector<Example> sample_negatives(const Query& query,
                                      const std::vector<const Paper*>& candidates,
                                      std::size_t k, const NegativeSpec& spec,
                                      const TermIndex& index);

// ---- dataset assembly -----------------------------------------------------------

struct AssembleStats {
  std::size_t queries_used = 0;
  std::size_t skipped_unresolvable = 0;  // cited id absent from the corpus pool
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

// One positive (query, cited paper) per query record plus sampled
// negatives. Candidates are the text-bearing papers of the corpus
// minus the citing paper and minus everything cited by queries sharing
// this query's text. Queries are processed in query_id order and the
// examples of a query stay together, so the output is reproducible.
std::vector<Example> assemble_dataset(const CorpusIndex& corpus, const NegativeSpec& spec,
                                      AssembleStats* stats = nullptr);

// ---- train/test split --------------------------------------------------------------

enum class TestSizeMode {
  examples,  // target counts examples; whole queries move until reached
  queries,   // target counts queries
};

struct DatasetSplit {
  std::vector<Example> train;
  std::vector<Example> test;
  std::vector<std::string> test_query_ids;
};

// Moves whole queries with a specific zone label (anything but Other)
// into the test side until the target is reached, choosing them by
// seeded shuffle. No query straddles the split. Throws
// ErrorKind::insufficient when the eligible queries cannot fill the
// target.
DatasetSplit split_train_test(const std::vector<Example>& examples, std::size_t test_target,
                              std::uint64_t seed, TestSizeMode mode = TestSizeMode::examples);

// ---- persistence ---------------------------------------------------------------------

void save_examples(const std::string& path, const std::vector<Example>& examples);
std::vector<Example> load_examples(const std::string& path);

}  // namespace citerec

#endif
