#ifndef CITEREC_SYNTH_HPP
#define CITEREC_SYNTH_HPP

#include <cstdint>
#include <vector>

#include "citerec/ingest.hpp"

namespace citerec {

// Generated corpus with a planted joint structure: papers live on a
// (topic, zone category) grid, and a query cites exactly the paper
// sharing both its topic tokens and its category clue words. The
// category of a query is therefore readable from its text, and whether
// a candidate should be cited depends on topic overlap and category
// agreement together, so both heads of the model have something real
// to learn and the negative sampler's high-similarity stratum yields
// genuinely hard (same topic, wrong category) distractors.
struct SynthConfig {
  std::size_t topics = 25;
  std::size_t queries_per_paper = 4;
  std::size_t filler_pool = 24;      // distinct filler tokens available
  std::size_t fillers_per_text = 3;  // drawn per query or abstract
  std::uint64_t seed = 7;
};

struct SynthCorpus {
  std::vector<Paper> papers;   // topics x kAzCount, ids in grid order
  std::vector<Query> queries;  // queries_per_paper per paper
};

SynthCorpus make_synth_corpus(const SynthConfig& cfg);

}  // namespace citerec

#endif
