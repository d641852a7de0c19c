#include <doctest.h>

#include "ifl/corpus.hpp"
#include "ifl/feedback.hpp"
#include "ifl/metrics.hpp"
#include "ifl/mock.hpp"
#include "ifl/synthetic.hpp"
#include "ifl/text.hpp"

using namespace ifl;

namespace {

std::string refinement_request(const CorpusRecord& r, const CitedAnswer& previous, Band fluency, Band correctness,
                               Band citation) {
  const std::vector<FeedbackItem> items = {
      FeedbackItem{Aspect::kFluency, {}, fluency, std::string(render_feedback(Aspect::kFluency, fluency))},
      FeedbackItem{Aspect::kCorrectness, {}, correctness,
                   std::string(render_feedback(Aspect::kCorrectness, correctness))},
      FeedbackItem{Aspect::kCitation, {}, citation, std::string(render_feedback(Aspect::kCitation, citation))}};
  return build_refinement_prompt(r.question, r.docs, previous, items);
}

GenerationRequest req(std::string user) {
  GenerationRequest r;
  r.user = std::move(user);
  return r;
}

bool has_repeated_ngram(const std::string& text, std::size_t n) {
  const auto words = text::tokenize(text);
  std::set<std::vector<std::string>> seen;
  for (std::size_t i = 0; i + n <= words.size(); ++i) {
    std::vector<std::string> gram(words.begin() + i, words.begin() + i + n);
    if (!seen.insert(gram).second) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("mock") {
  TEST_CASE("generation prompts return the scripted base answer") {
    const auto corpus = synthetic_corpus(5, 1);
    const auto script = script_from_corpus(corpus, MockMode::kResponsive, false, 1);
    for (const auto& r : corpus) {
      const auto prompt = build_aspect_prompt(PromptKind::kPositive, r.question, r.docs);
      CHECK(mock_generate(script, req(prompt)) == render_cited_answer(r.answer));
      CHECK(mock_generate(script, req(prompt)) == mock_generate(script, req(prompt)));
    }
  }

  TEST_CASE("unknown questions") {
    const auto corpus = synthetic_corpus(2, 1);
    auto script = script_from_corpus(corpus, MockMode::kEcho, false, 1);
    const Question other{"x", "What is unknown?", {{"y"}}};
    const auto prompt = build_aspect_prompt(PromptKind::kPositive, other, corpus[0].docs);
    CHECK_THROWS_AS(mock_generate(script, req(prompt)), ScriptError);
    script.strict = false;
    script.fallback_answer = "I do not know.";
    CHECK(mock_generate(script, req(prompt)) == "I do not know.");
  }

  TEST_CASE("fluency feedback removes an injected duplicate 5-gram") {
    const auto corpus = synthetic_corpus(30, 2);
    const auto script = script_from_corpus(corpus, MockMode::kResponsive, false, 2);
    for (const auto& r : corpus) {
      const auto repeated = inject_repetition(r.answer, 5);
      REQUIRE(has_repeated_ngram(plain_text(repeated), 5));
      const auto out = parse_cited_answer(
          mock_generate(script, req(refinement_request(r, repeated, Band::kImprove, Band::kPraise, Band::kPraise))));
      CAPTURE(render_cited_answer(repeated));
      CHECK_FALSE(has_repeated_ngram(plain_text(out), 5));
      CHECK(out == r.answer);
    }
  }

  TEST_CASE("praise everywhere leaves the answer alone") {
    const auto corpus = synthetic_corpus(3, 2);
    const auto script = script_from_corpus(corpus, MockMode::kResponsive, false, 2);
    const auto previous = degrade_answer(corpus[0], 2);
    const auto out =
        mock_generate(script, req(refinement_request(corpus[0], previous, Band::kPraise, Band::kPraise, Band::kPraise)));
    CHECK(out == render_cited_answer(previous));
  }

  TEST_CASE("echo mode ignores feedback") {
    const auto corpus = synthetic_corpus(3, 2);
    const auto script = script_from_corpus(corpus, MockMode::kEcho, true, 2);
    const auto previous = degrade_answer(corpus[0], 2);
    const auto out = mock_generate(
        script, req(refinement_request(corpus[0], previous, Band::kCorrective, Band::kCorrective, Band::kCorrective)));
    CHECK(out == render_cited_answer(degrade_answer(corpus[0], 2)));
  }

  TEST_CASE("citation feedback fixes one citation per round") {
    const auto corpus = synthetic_corpus(20, 3);
    const auto script = script_from_corpus(corpus, MockMode::kResponsive, false, 3);
    const LexicalEntailmentJudge judge;
    for (const auto& r : corpus) {
      CitedAnswer a = corrupt_citations(r.answer, 4, CorruptionMode::kShuffle, 3);
      double last = citation_precision(a, r.docs, judge);
      for (std::size_t round = 0; round < r.answer.sentences.size(); ++round) {
        const auto next = parse_cited_answer(
            mock_generate(script, req(refinement_request(r, a, Band::kPraise, Band::kPraise, Band::kImprove))));
        std::size_t changed = 0;
        for (std::size_t i = 0; i < a.sentences.size(); ++i) changed += next.sentences[i] != a.sentences[i];
        CHECK(changed <= 1);
        const double p = citation_precision(next, r.docs, judge);
        CHECK(p >= last);
        last = p;
        a = next;
      }
      CHECK(a == r.answer);
    }
  }

  TEST_CASE("correctness corrective grounds the weakest sentence") {
    const auto corpus = synthetic_corpus(4, 6);
    const auto script = script_from_corpus(corpus, MockMode::kResponsive, false, 6);
    const auto& r = corpus[0];
    CitedAnswer a = r.answer;
    a.sentences[0].text = "Zorblat quimbles over fenwick marshes daily.";
    const auto out = parse_cited_answer(
        mock_generate(script, req(refinement_request(r, a, Band::kPraise, Band::kCorrective, Band::kPraise))));
    REQUIRE(out.sentences.size() == a.sentences.size());
    CHECK(out.sentences[0].text.find("Zorblat") == std::string::npos);
    CHECK(out.sentences[1] == a.sentences[1]);
  }

  TEST_CASE("remove_repeated_ngrams keeps clean answers") {
    for (const auto& r : synthetic_corpus(10, 4)) CHECK(remove_repeated_ngrams(r.answer) == r.answer);
  }

  TEST_CASE("mock generator wraps the script") {
    const auto corpus = synthetic_corpus(1, 1);
    MockGenerator gen(script_from_corpus(corpus, MockMode::kEcho, false, 1));
    CHECK(gen.model_id() == "mock-generator");
    CHECK(gen.generate(req(build_aspect_prompt(PromptKind::kPositive, corpus[0].question, corpus[0].docs))) ==
          render_cited_answer(corpus[0].answer));
  }
}
