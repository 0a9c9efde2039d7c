// Word-level tokenization shared by the neural backend.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace unlearn {

/// Splits text into word tokens. Words are runs of letters, digits and
/// apostrophes; a trailing possessive "'s" becomes its own token; every other
/// non-space character is a single-character token.
std::vector<std::string> split_words(std::string_view text);

/// Inverse of split_words for ordinary prose: punctuation attaches to the
/// preceding word, hyphens join their neighbours.
std::string join_words(const std::vector<std::string>& words);

class Vocabulary {
 public:
  static constexpr int kBos = 0;
  static constexpr int kEos = 1;

  Vocabulary();
  /// Builds a vocabulary holding every token of `texts`, sorted so the id
  /// assignment is independent of input order.
  static Vocabulary from_texts(const std::vector<std::string>& texts);
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  int size() const { return static_cast<int>(tokens_.size()); }
  bool contains(const std::string& token) const { return ids_.count(token) != 0; }
  /// Throws BackendError naming the token when it is out of vocabulary.
  int id(const std::string& token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<int> encode(std::string_view text) const;
  std::string decode(const std::vector<int>& ids) const;

  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace unlearn
