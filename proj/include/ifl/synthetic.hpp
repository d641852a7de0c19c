#ifndef IFL_SYNTHETIC_HPP_
#define IFL_SYNTHETIC_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "ifl/answer.hpp"
#include "ifl/mock.hpp"

// Deterministic offline corpus: fictional cities, four documents per
// question, and a fully grounded cited positive answer.
namespace ifl {

std::vector<CorpusRecord> synthetic_corpus(std::size_t questions, std::uint64_t seed);

// Positive answer with corrupted citations and injected repetition, the
// starting point for offline refinement runs.
CitedAnswer degrade_answer(const CorpusRecord& record, std::uint64_t seed);

// Mock script whose base answers are the corpus answers, degraded when
// requested.
MockScript script_from_corpus(std::span<const CorpusRecord> corpus, MockMode mode, bool degrade,
                              std::uint64_t seed);

}  // namespace ifl

#endif  // IFL_SYNTHETIC_HPP_
