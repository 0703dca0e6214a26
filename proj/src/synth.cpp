#include "citerec/synth.hpp"

#include <cctype>
#include <cstdio>
#include <string>

#include "citerec/rng.hpp"
#include "citerec/text.hpp"

namespace citerec {

namespace {

// Two clue words per category. They double as the lexical overlap
// between a query and its cited paper, which is what makes same-topic
// wrong-category candidates separable.
const char* kClueWords[kAzCount][2] = {
    {"procedure", "protocol"},    // method
    {"finding", "implication"},   // conclusion
    {"aim", "motivation"},        // goal
    {"specimen", "inventory"},    // object
    {"remark", "aside"},          // other
};

std::string topic_token(std::size_t t, char suffix) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "topic%02zu%c", t, suffix);
  return buf;
}

std::string grid_paper_id(std::size_t t, AzLabel az) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "sp%02zu_%s", t, az_to_string(az).c_str());
  std::string id = buf;
  for (char& ch : id) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return id;
}

std::string draw_fillers(Rng& rng, std::size_t pool, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "filler%02llu",
                  static_cast<unsigned long long>(rng.below(pool)));
    if (!out.empty()) out += ' ';
    out += buf;
  }
  return out;
}

}  // namespace

SynthCorpus make_synth_corpus(const SynthConfig& cfg) {
  SynthCorpus corpus;
  Rng rng(cfg.seed);

  for (std::size_t t = 0; t < cfg.topics; ++t) {
    for (std::size_t c = 0; c < kAzCount; ++c) {
      AzLabel az = kAzOrder[c];
      Paper p;
      p.paper_id = grid_paper_id(t, az);
      std::string tx = topic_token(t, 'x');
      std::string ty = topic_token(t, 'y');
      p.title = tx + " " + kClueWords[c][0] + " study of " + ty;
      p.abstract = "the " + std::string(kClueWords[c][0]) + " and " + kClueWords[c][1] +
                   " of " + tx + " with " + ty + " considered " +
                   draw_fillers(rng, cfg.filler_pool, cfg.fillers_per_text);
      p.pub_year = 1961 + static_cast<int>((t * kAzCount + c) % 53);
      corpus.papers.push_back(std::move(p));
    }
  }

  for (std::size_t t = 0; t < cfg.topics; ++t) {
    for (std::size_t c = 0; c < kAzCount; ++c) {
      AzLabel az = kAzOrder[c];
      std::string cited = grid_paper_id(t, az);
      for (std::size_t j = 0; j < cfg.queries_per_paper; ++j) {
        Query q;
        char buf[64];
        std::snprintf(buf, sizeof buf, "sq%02zu_%s_%zu", t, az_to_string(az).c_str(), j);
        q.query_id = buf;
        for (char& ch : q.query_id)
          ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        q.source_id = "synthsource";
        q.cited_id = cited;
        q.az = az;
        // Alternate which clue word leads so neither is a giveaway for
        // one specific query.
        const char* lead = kClueWords[c][j % 2];
        const char* trail = kClueWords[c][(j + 1) % 2];
        q.text = std::string(lead) + " " + trail + " " + topic_token(t, 'x') + " " +
                 topic_token(t, 'y') + " " + kCiteToken + " " +
                 draw_fillers(rng, cfg.filler_pool, cfg.fillers_per_text);
        q.context = q.text;
        corpus.queries.push_back(std::move(q));
      }
    }
  }
  return corpus;
}

}  // namespace citerec
