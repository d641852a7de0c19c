#ifndef IFL_MOCK_HPP_
#define IFL_MOCK_HPP_

#include <map>
#include <string>

#include "ifl/answer.hpp"
#include "ifl/gateway.hpp"

namespace ifl {

// A scripted mock cannot answer the prompt. Derives from GeneratorError so
// callers treat it like any other generator failure.
class ScriptError : public GeneratorError {
 public:
  using GeneratorError::GeneratorError;
};

enum class MockMode {
  // Always returns the scripted base answer for the prompt's question.
  kEcho,
  // Returns the base answer for generation prompts; for refinement prompts
  // repairs the previous answer according to the feedback it carries.
  kResponsive,
};

struct MockScript {
  MockMode mode = MockMode::kResponsive;
  // Unknown questions raise ScriptError instead of returning fallback_answer.
  bool strict = true;
  // Question text -> rendered cited answer.
  std::map<std::string, std::string> base_answers;
  std::string fallback_answer;
};

// Repairs applied in kResponsive mode, keyed by the feedback sentences found
// in the prompt:
//  - fluency Improve/Corrective: later occurrences of repeated 5-, 4- and
//    3-grams are deleted;
//  - citation Improve/Corrective: the first sentence not citing its best
//    matching document is re-cited to that document;
//  - correctness Corrective: the least grounded sentence (under half its
//    content words in the documents) is replaced by its closest document
//    sentence, citing that document.
std::string mock_generate(const MockScript& script, const GenerationRequest& request);

// The fluency repair on its own.
CitedAnswer remove_repeated_ngrams(const CitedAnswer& answer);

class MockGenerator final : public Generator {
 public:
  explicit MockGenerator(MockScript script) : script_(std::move(script)) {}

  std::string generate(const GenerationRequest& request) const override {
    return mock_generate(script_, request);
  }
  std::string model_id() const override { return "mock-generator"; }

 private:
  MockScript script_;
};

}  // namespace ifl

#endif  // IFL_MOCK_HPP_
