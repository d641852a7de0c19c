#ifndef IFL_CORPUS_HPP_
#define IFL_CORPUS_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ifl/answer.hpp"
#include "ifl/aspect.hpp"
#include "ifl/gateway.hpp"

// Critic training data: annotation prompts, deterministic negative
// corruptors, and CritiqueExample assembly.
namespace ifl {

enum class PromptKind { kPositive, kNegFluency, kNegCorrectness };

// "Question: ...", a blank line, then "Search results:" and one
// "Document [k] (Title: t): body" line per document.
std::string format_question_and_docs(const Question& question, const DocumentSet& docs);

// Annotation prompt: instruction and bullets of the chosen template, the
// question/documents block, then "Answer:". Throws PreconditionError on an
// empty document set.
std::string build_aspect_prompt(PromptKind kind, const Question& question, const DocumentSet& docs);

// The instruction block alone (first line plus "- " bullets).
std::string_view prompt_instructions(PromptKind kind);

class CorruptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CorruptionMode { kShuffle, kRemove, kMixed };

// Sentence texts are never touched.
//  - Shuffle: every citation becomes a uniformly drawn different index in
//    [1, n_docs]. Needs n_docs >= 2 and at least one citation.
//  - Remove: every citation is deleted with probability 0.5, at least one.
//  - Mixed: every citation is either re-drawn or deleted, each with
//    probability 0.5 (deleted when n_docs < 2).
// Draws are repeated while the result equals the input; a CorruptionError is
// raised if no differing result exists.
CitedAnswer corrupt_citations(const CitedAnswer& answer, int n_docs, CorruptionMode mode,
                              std::uint64_t seed);

// Duplicates the leading n-gram (n = min(5, words)) of one sentence two or
// three extra times, appended as ", <phrase>" inside seeded sentences.
CitedAnswer inject_repetition(const CitedAnswer& answer, std::uint64_t seed);

struct CritiqueExample {
  Question question;
  DocumentSet docs;
  Aspect aspect = Aspect::kFluency;
  CitedAnswer positive;
  std::array<CitedAnswer, 3> negatives;

  bool operator==(const CritiqueExample&) const = default;
};

using NegativePool = PerAspect<std::vector<CitedAnswer>>;

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One example per aspect, in canonical aspect order, each with three
// negatives drawn without replacement from that aspect's pool.
std::vector<CritiqueExample> assemble_critique_examples(const Question& question,
                                                        const DocumentSet& docs,
                                                        const CitedAnswer& positive,
                                                        const NegativePool& negative_pool,
                                                        std::uint64_t seed);

// Offline pools for corpus[index]: fluency from inject_repetition, correctness
// from other questions' positives (cyclic shifts 1..4), citation from
// corrupt_citations in all three modes.
NegativePool deterministic_negative_pool(std::span<const CorpusRecord> corpus, std::size_t index,
                                         std::uint64_t seed);

std::vector<CritiqueExample> build_deterministic_critique_set(std::span<const CorpusRecord> corpus,
                                                              std::uint64_t seed);

// Fluency and correctness negatives come from the generator through the
// annotation prompts; citation negatives from corrupt_citations. When a
// record has an empty answer, the positive is generated too.
std::vector<CritiqueExample> build_llm_critique_set(std::span<const CorpusRecord> corpus,
                                                    const Generator& generator,
                                                    const DecodeOptions& decode,
                                                    std::uint64_t seed);

std::vector<CritiqueExample> read_critique_set(const std::string& path);
void write_critique_set(const std::string& path, std::span<const CritiqueExample> examples);

}  // namespace ifl

#endif  // IFL_CORPUS_HPP_
