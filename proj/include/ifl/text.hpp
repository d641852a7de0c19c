#ifndef IFL_TEXT_HPP_
#define IFL_TEXT_HPP_

#include <string>
#include <string_view>
#include <vector>

// Lexical helpers shared by the answer model, critic features and metrics.
namespace ifl::text {

// Lowercased word tokens. A run of ASCII alphanumerics (or non-ASCII bytes)
// forms a token; '.' and ',' between two digits stay inside the token, so
// "9.41" and "1,200" are single tokens.
std::vector<std::string> tokenize(std::string_view text);

// Whitespace-delimited words, punctuation kept.
std::vector<std::string> split_words(std::string_view text);

bool is_stopword(std::string_view lowered_token);

// True when the token contains at least one digit.
bool is_numeric_token(std::string_view token);

// tokenize() minus stopwords.
std::vector<std::string> content_words(std::string_view text);

// Answer normalization for exact-match checks: lowercase, drop ASCII
// punctuation, drop the articles a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view text);

// Collapses whitespace runs to one space and trims both ends.
std::string collapse_whitespace(std::string_view text);

// Lowercases and strips leading/trailing ASCII punctuation from one word.
std::string bare_word(std::string_view word);

std::string hex_digest(std::string_view bytes);

}  // namespace ifl::text

#endif  // IFL_TEXT_HPP_
