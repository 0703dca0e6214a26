#ifndef CITEREC_TEXT_HPP
#define CITEREC_TEXT_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace citerec {

// Lowercased alphanumeric runs; punctuation separates. Bytes outside
// ASCII are kept as word characters so UTF-8 words survive unsplit.
// The literal citation placeholder "[CITE]" is one token.
std::vector<std::string> tokenize(std::string_view text);

inline constexpr const char* kCiteToken = "[CITE]";

// Fixed specials at the bottom of the index space, then every token
// meeting the frequency floor, in lexicographic order. Same corpus in,
// same table out.
class Vocabulary {
 public:
  static constexpr int pad_index = 0;
  static constexpr int oov_index = 1;
  static constexpr int cite_index = 2;

  static Vocabulary build(const std::vector<std::string>& texts, int min_frequency = 2);
  static Vocabulary from_tokens(std::vector<std::string> tokens, int min_frequency);
  // Restores a table saved earlier; the list must start with the three
  // specials in their fixed slots.
  static Vocabulary from_index(std::vector<std::string> tokens_in_order, int min_frequency);

  int lookup(const std::string& token) const;
  std::size_t size() const { return index_to_token_.size(); }
  const std::vector<std::string>& tokens() const { return index_to_token_; }
  int min_frequency() const { return min_frequency_; }

  // FNV-1a over the tokens in index order; checkpoints store it so a
  // model cannot be silently applied with a different table.
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> index_to_token_;
  std::unordered_map<std::string, int> token_to_index_;
  int min_frequency_ = 2;
};

struct Encoded {
  std::vector<int> ids;       // padded to the requested length with pad_index
  std::size_t true_len = 0;   // count of real tokens after truncation
};

// Tokenize, map through the vocabulary (unknowns to oov), truncate to
// max_len and pad the rest.
Encoded tokenize_encode(std::string_view text, const Vocabulary& vocab, std::size_t max_len);

}  // namespace citerec

#endif
