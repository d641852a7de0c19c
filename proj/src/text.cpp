#include "ifl/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <unordered_set>

#include "ifl/random.hpp"

namespace ifl::text {

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

char lower(unsigned char c) { return static_cast<char>(std::tolower(c)); }

const std::unordered_set<std::string_view>& stopwords() {
  static const std::unordered_set<std::string_view> kWords = {
      "a",     "about", "above", "after", "again", "all",   "also",  "am",
      "an",    "and",   "any",   "are",   "as",    "at",    "be",    "been",
      "being", "both",  "but",   "by",    "can",   "could", "did",   "do",
      "does",  "each",  "for",   "from",  "had",   "has",   "have",  "having",
      "he",    "her",   "here",  "hers",  "him",   "his",   "how",   "i",
      "if",    "in",    "into",  "is",    "it",    "its",   "just",  "may",
      "me",    "might", "more",  "most",  "my",    "no",    "nor",   "not",
      "of",    "on",    "once",  "only",  "or",    "other", "our",   "out",
      "over",  "own",   "s",     "same",  "she",   "should", "so",   "some",
      "such",  "than",  "that",  "the",   "their", "them",  "then",  "there",
      "these", "they",  "this",  "those", "through", "to",  "too",   "under",
      "until", "up",    "very",  "was",   "we",    "were",  "what",  "when",
      "where", "which", "while", "who",   "whom",  "why",   "will",  "with",
      "would", "you",   "your"};
  return kWords;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_word_byte(c)) {
      current.push_back(lower(c));
      continue;
    }
    if ((c == '.' || c == ',') && !current.empty() &&
        is_digit(static_cast<unsigned char>(current.back())) && i + 1 < n &&
        is_digit(static_cast<unsigned char>(text[i + 1]))) {
      current.push_back(static_cast<char>(c));
      continue;
    }
    if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

bool is_stopword(std::string_view lowered_token) {
  return stopwords().contains(lowered_token);
}

bool is_numeric_token(std::string_view token) {
  return std::any_of(token.begin(), token.end(),
                     [](char c) { return is_digit(static_cast<unsigned char>(c)); });
}

std::vector<std::string> content_words(std::string_view text) {
  auto tokens = tokenize(text);
  std::erase_if(tokens, [](const std::string& t) { return is_stopword(t); });
  return tokens;
}

std::string normalize_answer(std::string_view text) {
  std::string no_punct;
  no_punct.reserve(text.size());
  for (unsigned char c : text) {
    if (std::ispunct(c)) continue;
    no_punct.push_back(lower(c));
  }
  std::string out;
  for (const auto& word : split_words(no_punct)) {
    if (word == "a" || word == "an" || word == "the") continue;
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(c));
  }
  return out;
}

std::string bare_word(std::string_view word) {
  std::size_t b = 0;
  std::size_t e = word.size();
  while (b < e && std::ispunct(static_cast<unsigned char>(word[b]))) ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(word[e - 1]))) --e;
  std::string out;
  for (std::size_t i = b; i < e; ++i) out.push_back(lower(static_cast<unsigned char>(word[i])));
  return out;
}

std::string hex_digest(std::string_view bytes) {
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx",
                static_cast<unsigned long long>(fnv1a(bytes)));
  return std::string(buf.data());
}

}  // namespace ifl::text
