#ifndef IFL_ANSWER_HPP_
#define IFL_ANSWER_HPP_

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ifl {

// A retrieved passage. Indices are 1-based and match the "[k]" markers.
struct Document {
  int index = 0;
  std::string title;
  std::string body;

  bool operator==(const Document&) const = default;
};

// Documents sorted by index. Construction validates: index >= 1, indices
// unique, body non-empty. Throws PreconditionError otherwise.
class DocumentSet {
 public:
  DocumentSet() = default;
  explicit DocumentSet(std::vector<Document> docs);

  const Document* find(int index) const;
  bool contains(int index) const { return find(index) != nullptr; }

  std::span<const Document> documents() const { return docs_; }
  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  auto begin() const { return docs_.begin(); }
  auto end() const { return docs_.end(); }

  bool operator==(const DocumentSet&) const = default;

 private:
  std::vector<Document> docs_;
};

// Title and body joined the way premises and overlap features see a document.
std::string document_text(const Document& doc);

using GoldGroups = std::vector<std::vector<std::string>>;

struct Question {
  std::string id;
  std::string text;
  // Each group lists acceptable spellings of one short answer.
  GoldGroups gold_aspects;

  bool operator==(const Question&) const = default;
};

struct Sentence {
  std::string text;  // marker-free, whitespace-collapsed
  std::set<int> citations;

  bool operator==(const Sentence&) const = default;
};

struct CitedAnswer {
  std::vector<Sentence> sentences;

  bool empty() const { return sentences.empty(); }
  std::size_t citation_count() const;
  // True when every citation index exists in docs.
  bool citations_valid(const DocumentSet& docs) const;

  bool operator==(const CitedAnswer&) const = default;
};

// Total parser. Sentences end at '.', '?' or '!' (or a run of them) followed
// by whitespace or end of text, except after "e.g.", "i.e.", "etc." and
// single-letter initials, and never inside brackets. Markers "[k]" (k a
// positive integer) anywhere in a sentence add k to that sentence's
// citations; markers directly after a sentence terminator belong to the
// sentence they follow. Anything else in brackets stays in the text.
CitedAnswer parse_cited_answer(std::string_view raw);

// Inverse of parse_cited_answer: citations go in ascending order right
// before the sentence's terminal punctuation; sentences joined by spaces.
std::string render_cited_answer(const CitedAnswer& answer);

// Sentence texts of the parsed answer joined by single spaces.
std::string strip_citations(std::string_view raw);

// Same as strip_citations on an already parsed answer.
std::string plain_text(const CitedAnswer& answer);

// Rewrites "[Citation: Doc k]" style markers to "[k]".
std::string normalize_marker_style(std::string_view raw);

// One line of the corpus JSONL file.
struct CorpusRecord {
  Question question;
  DocumentSet docs;
  CitedAnswer answer;
  // Gold long-form answer, used as a MAUVE reference when present.
  std::optional<std::string> long_answer;

  bool operator==(const CorpusRecord&) const = default;
};

std::vector<CorpusRecord> read_corpus(const std::string& path);
void write_corpus(const std::string& path, std::span<const CorpusRecord> records);

}  // namespace ifl

#endif  // IFL_ANSWER_HPP_
