#include "citerec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "citerec/error.hpp"
#include "citerec/rng.hpp"
#include "citerec/text.hpp"

namespace citerec {

using nlohmann::json;

std::string cite_to_string(CiteLabel c) {
  return c == CiteLabel::cite ? "cite" : "not_cite";
}

CiteLabel cite_from_string(std::string_view s) {
  if (s == "cite") return CiteLabel::cite;
  if (s == "not_cite") return CiteLabel::not_cite;
  throw Error(ErrorKind::label, "unknown citation label '" + std::string(s) + "'");
}

// ---- lexical similarity -------------------------------------------------------

namespace {

// What a paper looks like to the lexical index: title plus summary.
std::string paper_document(const Paper& p) {
  std::string text = p.title;
  try {
    std::string abs = resolve_abstract(p);
    if (!text.empty() && !abs.empty()) text += ' ';
    text += abs;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::missing_text) throw;
  }
  return text;
}

std::vector<std::pair<int, double>> tf_weights(
    const std::vector<std::string>& tokens, const std::unordered_map<std::string, int>& ids,
    const std::vector<double>& idf) {
  std::map<int, double> tf;
  for (const std::string& t : tokens) {
    auto it = ids.find(t);
    if (it != ids.end()) tf[it->second] += 1.0;
  }
  std::vector<std::pair<int, double>> out;
  out.reserve(tf.size());
  for (const auto& [id, count] : tf) out.emplace_back(id, count * idf[id]);
  return out;
}

double norm_of(const std::vector<std::pair<int, double>>& v) {
  double s = 0.0;
  for (const auto& [id, w] : v) s += w * w;
  return std::sqrt(s);
}

double sparse_dot(const std::vector<std::pair<int, double>>& a,
                  const std::vector<std::pair<int, double>>& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) ++i;
    else if (a[i].first > b[j].first) ++j;
    else s += a[i++].second * b[j++].second;
  }
  return s;
}

}  // namespace

TermIndex TermIndex::build(const std::vector<const Paper*>& pool) {
  TermIndex idx;
  idx.pool_size_ = pool.size();
  std::vector<std::vector<std::string>> docs;
  docs.reserve(pool.size());
  std::map<std::string, long> df;
  for (const Paper* p : pool) {
    docs.push_back(tokenize(paper_document(*p)));
    std::set<std::string> uniq(docs.back().begin(), docs.back().end());
    for (const std::string& t : uniq) df[t] += 1;
  }
  idx.idf_.reserve(df.size());
  double n = static_cast<double>(pool.size());
  for (const auto& [term, count] : df) {
    idx.term_ids_.emplace(term, static_cast<int>(idx.idf_.size()));
    idx.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto vec = tf_weights(docs[i], idx.term_ids_, idx.idf_);
    idx.doc_norms_.emplace(pool[i]->paper_id, norm_of(vec));
    idx.doc_vecs_.emplace(pool[i]->paper_id, std::move(vec));
  }
  return idx;
}

TermIndex TermIndex::build(const std::vector<Paper>& pool) {
  std::vector<const Paper*> ptrs;
  ptrs.reserve(pool.size());
  for (const Paper& p : pool) ptrs.push_back(&p);
  return build(ptrs);
}

std::vector<std::pair<int, double>> TermIndex::vectorize(std::string_view text) const {
  return tf_weights(tokenize(text), term_ids_, idf_);
}

double TermIndex::similarity(std::string_view text, const std::string& paper_id) const {
  auto vit = doc_vecs_.find(paper_id);
  if (vit == doc_vecs_.end())
    throw Error(ErrorKind::lookup, "paper '" + paper_id + "' is not in the similarity pool");
  auto qv = vectorize(text);
  double qn = norm_of(qv);
  double dn = doc_norms_.at(paper_id);
  if (qn == 0.0 || dn == 0.0) return 0.0;
  return sparse_dot(qv, vit->second) / (qn * dn);
}

double similarity(const Query& query, const Paper& paper, const TermIndex& index) {
  return index.similarity(query.text, paper.paper_id);
}

// ---- negative sampling -----------------------------------------------------------

std::array<std::size_t, 3> allocate_strata(std::size_t total,
                                           const std::array<int, 3>& weights) {
  long wsum = 0;
  for (int w : weights) {
    if (w < 0) throw Error(ErrorKind::config, "stratum weights must be non-negative");
    wsum += w;
  }
  if (wsum == 0) throw Error(ErrorKind::config, "stratum weights must not all be zero");
  std::array<std::size_t, 3> out{};
  std::array<long, 3> rem{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    long num = static_cast<long>(total) * weights[i];
    out[i] = static_cast<std::size_t>(num / wsum);
    rem[i] = num % wsum;
    assigned += out[i];
  }
  // Hand out what the floors left over, largest remainder first; equal
  // remainders resolve in stratum order (high, low, median).
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&rem](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) out[order[i % 3]] += 1;
  return out;
}

std::vector<Example> sample_negatives(const Query& query,
                                      const std::vector<const Paper*>& candidates,
                                      std::size_t k, const NegativeSpec& spec,
                                      const TermIndex& index) {
  const std::size_t need = k * spec.ratio;
  const std::size_t n = candidates.size();
  if (n < need)
    throw Error(ErrorKind::shortage, "query '" + query.query_id + "' needs " +
                                         std::to_string(need) + " negatives but only " +
                                         std::to_string(n) + " candidates are available");
  struct Ranked {
    double sim;
    const Paper* paper;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(n);
  for (const Paper* p : candidates)
    ranked.push_back({index.similarity(query.text, p->paper_id), p});
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    return a.paper->paper_id < b.paper->paper_id;
  });

  std::array<std::size_t, 3> counts = allocate_strata(need, spec.strata_weights);
  std::vector<bool> taken(n, false);
  std::vector<std::size_t> picks;
  picks.reserve(need);
  for (std::size_t i = 0; i < counts[0]; ++i) {
    picks.push_back(i);
    taken[i] = true;
  }
  for (std::size_t i = n - counts[1]; i < n; ++i) {
    picks.push_back(i);
    taken[i] = true;
  }
  if (counts[2] > 0) {
    // Window around the median rank, widening one step at a time and
    // stepping over ranks the edge strata already claimed.
    std::size_t center = n >= 2 ? n / 2 - 1 : 0;
    std::size_t got = 0;
    for (std::size_t off = 0; got < counts[2]; ++off) {
      if (off > n) break;
      std::size_t up = center + off;
      if (off > 0) {
        if (up < n && !taken[up]) {
          picks.push_back(up);
          taken[up] = true;
          if (++got == counts[2]) break;
        }
        if (center >= off) {
          std::size_t down = center - off;
          if (!taken[down]) {
            picks.push_back(down);
            taken[down] = true;
            ++got;
          }
        }
      } else if (!taken[up]) {
        picks.push_back(up);
        taken[up] = true;
        ++got;
      }
    }
    if (got < counts[2])
      throw Error(ErrorKind::shortage,
                  "query '" + query.query_id + "': median stratum exhausted the candidate list");
  }

  std::vector<Example> out;
  out.reserve(picks.size());
  for (std::size_t idx : picks)
    out.push_back({query.query_id, ranked[idx].paper->paper_id, CiteLabel::not_cite, query.az});
  return out;
}

// ---- dataset assembly ---------------------------------------------------------------

std::vector<Example> assemble_dataset(const CorpusIndex& corpus, const NegativeSpec& spec,
                                      AssembleStats* stats) {
  std::vector<const Paper*> pool;
  for (const Paper& p : corpus.papers)
    if (!paper_document(p).empty()) pool.push_back(&p);
  TermIndex index = TermIndex::build(pool);

  std::set<std::string> pool_ids;
  for (const Paper* p : pool) pool_ids.insert(p->paper_id);

  // Everything cited by queries sharing a text must stay out of that
  // text's negative candidates, or a masked sentence could show up
  // labeled both cite and not_cite for the same pair of texts.
  std::map<std::string, std::set<std::string>> cited_by_text;
  for (const Query& q : corpus.queries) cited_by_text[q.text].insert(q.cited_id);

  AssembleStats local;
  const std::size_t nq = corpus.queries.size();
  std::vector<std::vector<Example>> per_query(nq);
  std::vector<char> used(nq, 0);
  std::vector<std::string> errors(nq);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::size_t qi = 0; qi < nq; ++qi) {
    const Query& q = corpus.queries[qi];
    if (!pool_ids.count(q.cited_id)) continue;
    const std::set<std::string>& excluded = cited_by_text.at(q.text);
    std::vector<const Paper*> candidates;
    candidates.reserve(pool.size());
    for (const Paper* p : pool) {
      if (p->paper_id == q.source_id) continue;
      if (excluded.count(p->paper_id)) continue;
      candidates.push_back(p);
    }
    try {
      std::vector<Example> ex;
      ex.push_back({q.query_id, q.cited_id, CiteLabel::cite, q.az});
      std::vector<Example> negs = sample_negatives(q, candidates, 1, spec, index);
      ex.insert(ex.end(), negs.begin(), negs.end());
      per_query[qi] = std::move(ex);
      used[qi] = 1;
    } catch (const Error& e) {
      errors[qi] = e.what();
    }
  }

  for (std::size_t qi = 0; qi < nq; ++qi)
    if (!errors[qi].empty()) throw Error(ErrorKind::shortage, errors[qi]);

  std::vector<Example> out;
  for (std::size_t qi = 0; qi < nq; ++qi) {
    if (!used[qi]) {
      ++local.skipped_unresolvable;
      continue;
    }
    ++local.queries_used;
    local.positives += 1;
    local.negatives += per_query[qi].size() - 1;
    out.insert(out.end(), per_query[qi].begin(), per_query[qi].end());
  }
  if (stats) *stats = local;
  return out;
}

// ---- train/test split ------------------------------------------------------------------

DatasetSplit split_train_test(const std::vector<Example>& examples, std::size_t test_target,
                              std::uint64_t seed, TestSizeMode mode) {
  // Group sizes and zone labels per query, discovery in input order
  // but selection over a sorted id list so the seed fully determines
  // the outcome.
  std::map<std::string, std::pair<std::size_t, AzLabel>> groups;
  for (const Example& e : examples) {
    auto [it, fresh] = groups.try_emplace(e.query_id, std::make_pair(std::size_t{0}, e.az));
    it->second.first += 1;
  }
  std::vector<std::string> eligible;
  for (const auto& [qid, info] : groups)
    if (info.second != AzLabel::other) eligible.push_back(qid);

  Rng rng(seed);
  rng.shuffle(eligible);

  std::set<std::string> chosen;
  std::size_t have = 0;
  for (const std::string& qid : eligible) {
    bool done = mode == TestSizeMode::examples ? have >= test_target : chosen.size() >= test_target;
    if (done) break;
    chosen.insert(qid);
    have += groups.at(qid).first;
  }
  bool satisfied =
      mode == TestSizeMode::examples ? have >= test_target : chosen.size() >= test_target;
  if (!satisfied)
    throw Error(ErrorKind::insufficient,
                "eligible queries cover only " +
                    std::to_string(mode == TestSizeMode::examples ? have : chosen.size()) +
                    " of the requested " + std::to_string(test_target));

  DatasetSplit split;
  for (const Example& e : examples) {
    if (chosen.count(e.query_id)) split.test.push_back(e);
    else split.train.push_back(e);
  }
  split.test_query_ids.assign(chosen.begin(), chosen.end());
  return split;
}

// ---- persistence --------------------------------------------------------------------------

void save_examples(const std::string& path, const std::vector<Example>& examples) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  for (const Example& e : examples) {
    json j{{"query_id", e.query_id},
           {"candidate_id", e.candidate_id},
           {"cite_label", cite_to_string(e.cite)},
           {"az_label", az_to_string(e.az)}};
    f << j.dump() << '\n';
  }
  if (!f) throw Error(ErrorKind::io, "short write to '" + path + "'");
}

std::vector<Example> load_examples(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::io, "cannot read '" + path + "'");
  std::vector<Example> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      Example e;
      e.query_id = j.at("query_id").get<std::string>();
      e.candidate_id = j.at("candidate_id").get<std::string>();
      e.cite = cite_from_string(j.at("cite_label").get<std::string>());
      e.az = az_from_string(j.at("az_label").get<std::string>());
      out.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw Error(ErrorKind::invalid_input, path + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace citerec
