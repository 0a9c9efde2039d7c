#include "unlearn/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "unlearn/common.hpp"

namespace unlearn {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) || c == '\'' || c >= 0x80; }

bool attaches_left(const std::string& t) {
  return t == "." || t == "," || t == "?" || t == "!" || t == ":" || t == ";" || t == ")" || t == "-" ||
         t == "'s";
}

}  // namespace

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (!is_word_char(c)) {
      out.emplace_back(1, text[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_word_char(static_cast<unsigned char>(text[j]))) ++j;
    std::string word(text.substr(i, j - i));
    if (word.size() > 2 && word.compare(word.size() - 2, 2, "'s") == 0) {
      out.push_back(word.substr(0, word.size() - 2));
      out.emplace_back("'s");
    } else {
      out.push_back(std::move(word));
    }
    i = j;
  }
  return out;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  bool glue_next = false;
  for (const auto& w : words) {
    if (!out.empty() && !glue_next && !attaches_left(w)) out += ' ';
    out += w;
    glue_next = (w == "-" || w == "(");
  }
  return out;
}

Vocabulary::Vocabulary() : tokens_{"<bos>", "<eos>"} {
  ids_.emplace(tokens_[0], kBos);
  ids_.emplace(tokens_[1], kEos);
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary v;
  for (const auto& t : tokens) {
    if (v.ids_.count(t)) continue;
    v.ids_.emplace(t, v.size());
    v.tokens_.push_back(t);
  }
  return v;
}

Vocabulary Vocabulary::from_texts(const std::vector<std::string>& texts) {
  std::set<std::string> all;
  for (const auto& t : texts)
    for (auto& w : split_words(t)) all.insert(std::move(w));
  return from_tokens({all.begin(), all.end()});
}

int Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  if (it == ids_.end()) throw BackendError("out-of-vocabulary token '" + token + "'");
  return it->second;
}

std::vector<int> Vocabulary::encode(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& w : split_words(text)) ids.push_back(id(w));
  return ids;
}

std::string Vocabulary::decode(const std::vector<int>& ids) const {
  std::vector<std::string> words;
  for (int i : ids) {
    if (i == kBos || i == kEos) continue;
    words.push_back(token(i));
  }
  return join_words(words);
}

std::uint64_t Vocabulary::fingerprint() const {
  std::string joined;
  for (const auto& t : tokens_) {
    joined += t;
    joined += '\n';
  }
  return fnv1a(joined);
}

}  // namespace unlearn
