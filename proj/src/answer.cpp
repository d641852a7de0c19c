#include "ifl/answer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>

#include "ifl/error.hpp"
#include "ifl/serialize.hpp"
#include "ifl/text.hpp"

namespace ifl {

DocumentSet::DocumentSet(std::vector<Document> docs) : docs_(std::move(docs)) {
  std::sort(docs_.begin(), docs_.end(),
            [](const Document& a, const Document& b) { return a.index < b.index; });
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    const auto& d = docs_[i];
    if (d.index < 1)
      throw PreconditionError("document index must be >= 1, got " + std::to_string(d.index));
    if (d.body.empty())
      throw PreconditionError("document " + std::to_string(d.index) + " has an empty body");
    if (i > 0 && docs_[i - 1].index == d.index)
      throw PreconditionError("duplicate document index " + std::to_string(d.index));
  }
}

const Document* DocumentSet::find(int index) const {
  auto it = std::lower_bound(docs_.begin(), docs_.end(), index,
                             [](const Document& d, int i) { return d.index < i; });
  if (it == docs_.end() || it->index != index) return nullptr;
  return &*it;
}

std::string document_text(const Document& doc) {
  if (doc.title.empty()) return doc.body;
  return doc.title + "\n" + doc.body;
}

std::size_t CitedAnswer::citation_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.citations.size();
  return n;
}

bool CitedAnswer::citations_valid(const DocumentSet& docs) const {
  for (const auto& s : sentences)
    for (int c : s.citations)
      if (!docs.contains(c)) return false;
  return true;
}

namespace {

bool is_terminator(char c) { return c == '.' || c == '?' || c == '!'; }

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Matches "[k]" at pos with k a positive integer; returns the index just past
// the marker.
std::optional<std::pair<int, std::size_t>> match_marker(std::string_view raw, std::size_t pos) {
  if (pos >= raw.size() || raw[pos] != '[') return std::nullopt;
  std::size_t i = pos + 1;
  long value = 0;
  std::size_t digits = 0;
  while (i < raw.size() && std::isdigit(static_cast<unsigned char>(raw[i]))) {
    if (++digits > 9) return std::nullopt;
    value = value * 10 + (raw[i] - '0');
    ++i;
  }
  if (digits == 0 || i >= raw.size() || raw[i] != ']' || value <= 0) return std::nullopt;
  return std::make_pair(static_cast<int>(value), i + 1);
}

bool ends_with_protected_abbreviation(const std::string& buf) {
  std::size_t end = buf.size();
  std::size_t start = end;
  while (start > 0 && !is_space(buf[start - 1])) --start;
  std::string word;
  for (std::size_t i = start; i < end; ++i)
    word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(buf[i]))));
  // Leading quotes or parentheses do not change the abbreviation.
  while (!word.empty() && (word.front() == '(' || word.front() == '"' || word.front() == '\''))
    word.erase(word.begin());
  if (word == "e.g." || word == "i.e." || word == "etc.") return true;
  return word.size() == 2 && std::isalpha(static_cast<unsigned char>(word[0])) && word[1] == '.';
}

bool trim_trailing_space(std::string& buf) {
  const std::size_t before = buf.size();
  while (!buf.empty() && is_space(buf.back())) buf.pop_back();
  return buf.size() != before;
}

// True when buf ends in "[" plus optional digits. Removing a marker right
// after such a tail would splice a new marker into the text.
bool ends_with_open_marker(const std::string& buf) {
  std::size_t i = buf.size();
  while (i > 0 && std::isdigit(static_cast<unsigned char>(buf[i - 1]))) --i;
  return i > 0 && buf[i - 1] == '[';
}

class AnswerParser {
 public:
  explicit AnswerParser(std::string_view raw) : raw_(raw), matched_(raw.size(), false) { match_brackets(); }

  CitedAnswer run() {
    std::size_t i = 0;
    const std::size_t n = raw_.size();
    while (i < n) {
      const char c = raw_[i];
      if (c == '[' && !ends_with_open_marker(buf_)) {
        if (auto m = match_marker(raw_, i)) {
          std::string trimmed_buf = buf_;
          bool trimmed = trim_trailing_space(trimmed_buf);
          if (trimmed && ends_with_open_marker(trimmed_buf))
            trimmed = false;
          else
            buf_ = std::move(trimmed_buf);
          cites_.insert(m->first);
          i = m->second;
          if (trimmed && i < n && !is_space(raw_[i]) && !is_terminator(raw_[i]) && raw_[i] != '[') buf_.push_back(' ');
          continue;
        }
      }
      if (matched_[i]) depth_ += (c == '(' || c == '[') ? 1 : -1;
      if (is_terminator(c)) {
        std::size_t j = i;
        while (j < n && is_terminator(raw_[j])) ++j;
        buf_.append(raw_.substr(i, j - i));
        if (depth_ == 0 && !ends_with_protected_abbreviation(buf_)) {
          if (j == n || is_space(raw_[j])) {
            i = absorb_trailing_markers(j);
            finish_sentence();
            continue;
          }
          const std::size_t k = absorb_adjacent_markers(j);
          if (k != j && (k == n || is_space(raw_[k]))) {
            i = absorb_trailing_markers(k);
            finish_sentence();
            continue;
          }
        }
        i = j;
        continue;
      }
      buf_.push_back(c);
      ++i;
    }
    finish_sentence();
    return std::move(answer_);
  }

 private:
  // Marks parentheses and non-marker square brackets that have a partner.
  void match_brackets() {
    std::vector<std::size_t> parens, squares;
    for (std::size_t i = 0; i < raw_.size(); ++i) {
      if (auto m = match_marker(raw_, i)) {
        i = m->second - 1;
        continue;
      }
      const char c = raw_[i];
      std::vector<std::size_t>* stack = (c == '(' || c == ')') ? &parens : (c == '[' || c == ']') ? &squares : nullptr;
      if (stack == nullptr) continue;
      if (c == '(' || c == '[') {
        stack->push_back(i);
      } else if (!stack->empty()) {
        matched_[stack->back()] = true;
        matched_[i] = true;
        stack->pop_back();
      }
    }
  }

  // Markers directly after pos, with no whitespace in between.
  std::size_t absorb_adjacent_markers(std::size_t pos) {
    std::size_t k = pos;
    while (auto m = match_marker(raw_, k)) {
      cites_.insert(m->first);
      k = m->second;
    }
    return k;
  }

  std::size_t absorb_trailing_markers(std::size_t pos) {
    std::size_t k = pos;
    for (;;) {
      std::size_t probe = k;
      while (probe < raw_.size() && is_space(raw_[probe])) ++probe;
      auto m = match_marker(raw_, probe);
      if (!m) return k;
      cites_.insert(m->first);
      k = m->second;
    }
  }

  void finish_sentence() {
    std::string text = text::collapse_whitespace(buf_);
    buf_.clear();
    if (text.empty()) {
      if (!cites_.empty()) {
        if (!answer_.sentences.empty())
          answer_.sentences.back().citations.merge(cites_);
        else
          pending_.merge(cites_);
      }
      cites_.clear();
      return;
    }
    cites_.merge(pending_);
    pending_.clear();
    answer_.sentences.push_back(Sentence{std::move(text), std::move(cites_)});
    cites_.clear();
  }

  std::string_view raw_;
  std::vector<bool> matched_;
  int depth_ = 0;
  std::string buf_;
  std::set<int> cites_;
  std::set<int> pending_;  // markers seen before any sentence text
  CitedAnswer answer_;
};

}  // namespace

CitedAnswer parse_cited_answer(std::string_view raw) { return AnswerParser(raw).run(); }

std::string render_cited_answer(const CitedAnswer& answer) {
  std::string out;
  for (const auto& s : answer.sentences) {
    if (!out.empty()) out.push_back(' ');
    if (s.citations.empty()) {
      out += s.text;
      continue;
    }
    std::size_t body_end = s.text.size();
    while (body_end > 0 && is_terminator(s.text[body_end - 1])) --body_end;
    std::string body = s.text.substr(0, body_end);
    const bool spaced = trim_trailing_space(body);
    if (body.empty() || (body_end < s.text.size() && ends_with_open_marker(body))) {
      out += s.text;
      if (body.empty()) out.push_back(' ');
      for (int c : s.citations) out += "[" + std::to_string(c) + "]";
      continue;
    }
    out += body;
    out.push_back(' ');
    for (int c : s.citations) out += "[" + std::to_string(c) + "]";
    if (spaced) out.push_back(' ');
    out.append(s.text, body_end, std::string::npos);
  }
  return out;
}

std::string plain_text(const CitedAnswer& answer) {
  std::string out;
  for (const auto& s : answer.sentences) {
    if (!out.empty()) out.push_back(' ');
    out += s.text;
  }
  return out;
}

std::string strip_citations(std::string_view raw) { return plain_text(parse_cited_answer(raw)); }

std::string normalize_marker_style(std::string_view raw) {
  static const std::regex kLongForm(R"(\[\s*Citation:\s*Doc\s*(\d+)\s*\])", std::regex::icase);
  return std::regex_replace(std::string(raw), kLongForm, "[$1]");
}

std::vector<CorpusRecord> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open corpus file: " + path);
  std::vector<CorpusRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::collapse_whitespace(line).empty()) continue;
    try {
      records.push_back(corpus_record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception& e) {
      throw SchemaError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void write_corpus(const std::string& path, std::span<const CorpusRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SchemaError("cannot write corpus file: " + path);
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

}  // namespace ifl
