#include "citerec/text.hpp"

#include <algorithm>
#include <map>

#include "citerec/error.hpp"

namespace citerec {

namespace {

inline bool word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  std::size_t i = 0;
  const std::string_view cite = kCiteToken;
  while (i < text.size()) {
    if (text.compare(i, cite.size(), cite) == 0) {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
      out.emplace_back(cite);
      i += cite.size();
      continue;
    }
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (word_byte(c)) {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                         : static_cast<char>(c));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
    ++i;
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& texts, int min_frequency) {
  std::vector<std::string> toks;
  for (const std::string& t : texts) {
    std::vector<std::string> parts = tokenize(t);
    toks.insert(toks.end(), parts.begin(), parts.end());
  }
  return from_tokens(std::move(toks), min_frequency);
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens, int min_frequency) {
  // std::map keeps the surviving tokens sorted, which is what pins the
  // index assignment.
  std::map<std::string, long> counts;
  for (std::string& t : tokens)
    if (t != kCiteToken) counts[std::move(t)] += 1;
  Vocabulary v;
  v.min_frequency_ = min_frequency;
  v.index_to_token_ = {"<pad>", "<oov>", kCiteToken};
  for (const auto& [tok, n] : counts)
    if (n >= min_frequency) v.index_to_token_.push_back(tok);
  for (std::size_t i = 0; i < v.index_to_token_.size(); ++i)
    v.token_to_index_[v.index_to_token_[i]] = static_cast<int>(i);
  return v;
}

Vocabulary Vocabulary::from_index(std::vector<std::string> tokens_in_order, int min_frequency) {
  if (tokens_in_order.size() < 3 || tokens_in_order[0] != "<pad>" ||
      tokens_in_order[1] != "<oov>" || tokens_in_order[2] != kCiteToken)
    throw Error(ErrorKind::invalid_input,
                "vocabulary index must start with <pad>, <oov>, " + std::string(kCiteToken));
  Vocabulary v;
  v.min_frequency_ = min_frequency;
  v.index_to_token_ = std::move(tokens_in_order);
  for (std::size_t i = 0; i < v.index_to_token_.size(); ++i)
    if (!v.token_to_index_.emplace(v.index_to_token_[i], static_cast<int>(i)).second)
      throw Error(ErrorKind::invalid_input,
                  "vocabulary index repeats token '" + v.index_to_token_[i] + "'");
  return v;
}

int Vocabulary::lookup(const std::string& token) const {
  auto it = token_to_index_.find(token);
  return it == token_to_index_.end() ? oov_index : it->second;
}

std::uint64_t Vocabulary::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const std::string& t : index_to_token_) {
    for (char c : t) mix(static_cast<unsigned char>(c));
    mix(0);
  }
  return h;
}

Encoded tokenize_encode(std::string_view text, const Vocabulary& vocab, std::size_t max_len) {
  std::vector<std::string> toks = tokenize(text);
  Encoded e;
  e.true_len = std::min(toks.size(), max_len);
  e.ids.assign(max_len, Vocabulary::pad_index);
  for (std::size_t i = 0; i < e.true_len; ++i) e.ids[i] = vocab.lookup(toks[i]);
  return e;
}

}  // namespace citerec
