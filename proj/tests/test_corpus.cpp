#include <doctest.h>

#include <algorithm>
#include <map>

#include "ifl/corpus.hpp"
#include "ifl/error.hpp"
#include "ifl/synthetic.hpp"
#include "ifl/text.hpp"
#include "support.hpp"

using namespace ifl;

namespace {

Question seoul_question() { return {"seoul", "What is the population of Seoul?", {{"9.41 million"}}}; }

DocumentSet seoul_docs() {
  return DocumentSet({{1, "Seoul", "Seoul population: 9.41 million"}, {2, "Daejeon", "Daejeon population: 1.44 million"}});
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

// Returns canned answers keyed by the prompt's instruction line.
class ScriptedAnnotator final : public Generator {
 public:
  std::string generate(const GenerationRequest& request) const override {
    ++calls;
    const std::string n = std::to_string(calls);
    if (request.user.find("at least 200 tokens") != std::string::npos)
      return "Seoul Seoul has has a population population of 9.41 million million [1] " + n + ".";
    if (request.user.find("wrong number") != std::string::npos)
      return "Seoul has a population of " + n + " million [Citation: Doc 1].";
    return "Seoul has a population of 9.41 million [1].";
  }
  std::string model_id() const override { return "scripted"; }
  mutable int calls = 0;
};

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("annotation prompts carry their instructions") {
    const auto q = seoul_question();
    const auto docs = seoul_docs();
    const auto pos = build_aspect_prompt(PromptKind::kPositive, q, docs);
    CHECK(pos.starts_with("Write an accurate answer for the question using only the provided web search results."));
    CHECK(pos.ends_with("\n\nAnswer:"));
    CHECK(pos.find("Document [1] (Title: Seoul): Seoul population: 9.41 million") != std::string::npos);
    CHECK(build_aspect_prompt(PromptKind::kNegFluency, q, docs).find("at least 200 tokens or more") !=
          std::string::npos);
    CHECK(build_aspect_prompt(PromptKind::kNegCorrectness, q, docs)
              .find("okay with the wrong number, date, organization name") != std::string::npos);
    CHECK_THROWS_AS(build_aspect_prompt(PromptKind::kPositive, q, DocumentSet{}), PreconditionError);
  }

  TEST_CASE("question and documents block") {
    CHECK(format_question_and_docs(seoul_question(), seoul_docs()) ==
          "Question: What is the population of Seoul?\n\nSearch results:\n"
          "Document [1] (Title: Seoul): Seoul population: 9.41 million\n"
          "Document [2] (Title: Daejeon): Daejeon population: 1.44 million");
  }

  TEST_CASE("shuffle with two documents has one choice") {
    const auto a = parse_cited_answer("Seoul has 9.41 million people [1].");
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto out = corrupt_citations(a, 2, CorruptionMode::kShuffle, seed);
      CHECK(out.sentences[0].citations == std::set<int>{2});
    }
  }

  TEST_CASE("shuffle moves every citation") {
    const auto a = parse_cited_answer("A is one [1]. B is two [2]. C is three [3].");
    const auto out = corrupt_citations(a, 5, CorruptionMode::kShuffle, 7);
    REQUIRE(out.sentences.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(out.sentences[i].text == a.sentences[i].text);
      REQUIRE(out.sentences[i].citations.size() == 1);
      const int now = *out.sentences[i].citations.begin();
      CHECK(now != static_cast<int>(i) + 1);
      CHECK(now >= 1);
      CHECK(now <= 5);
    }
  }

  TEST_CASE("corruptors are deterministic and never touch text") {
    const auto corpus = synthetic_corpus(30, 3);
    for (const auto& r : corpus) {
      for (auto mode : {CorruptionMode::kShuffle, CorruptionMode::kRemove, CorruptionMode::kMixed}) {
        const auto x = corrupt_citations(r.answer, 4, mode, 99);
        CHECK(x == corrupt_citations(r.answer, 4, mode, 99));
        CHECK(x != r.answer);
        CHECK(plain_text(x) == plain_text(r.answer));
        for (const auto& s : x.sentences)
          for (int c : s.citations) CHECK((c >= 1 && c <= 4));
      }
      const auto removed = corrupt_citations(r.answer, 4, CorruptionMode::kRemove, 5);
      CHECK(removed.citation_count() < r.answer.citation_count());
    }
  }

  TEST_CASE("corruption errors") {
    const auto uncited = parse_cited_answer("No citations here.");
    CHECK_THROWS_AS(corrupt_citations(uncited, 3, CorruptionMode::kShuffle, 1), CorruptionError);
    CHECK_THROWS_AS(corrupt_citations(uncited, 3, CorruptionMode::kRemove, 1), CorruptionError);
    CHECK_THROWS_AS(corrupt_citations(parse_cited_answer("A [1]."), 1, CorruptionMode::kShuffle, 1),
                    CorruptionError);
  }

  TEST_CASE("inject_repetition on one sentence") {
    const auto a = parse_cited_answer("The main river of Belqui is the Tanlo River [4].");
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto out = inject_repetition(a, seed);
      CHECK(out == inject_repetition(a, seed));
      const std::string t = plain_text(out);
      CHECK(t.size() > plain_text(a).size());
      CHECK(count_occurrences(t, "The main river of Belqui") + count_occurrences(t, "the main river of Belqui") >= 3);
      CHECK(out.sentences[0].citations == std::set<int>{4});
    }
  }

  TEST_CASE("assembly picks all three from exact pools") {
    const auto q = seoul_question();
    const auto docs = seoul_docs();
    const auto positive = parse_cited_answer("Seoul has a population of 9.41 million [1].");
    NegativePool pool;
    for (Aspect a : kAllAspects)
      for (int k = 0; k < 3; ++k)
        pool[a].push_back(parse_cited_answer("Variant " + std::to_string(k) + " of " +
                                             std::string(aspect_name(a)) + " [2]."));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto examples = assemble_critique_examples(q, docs, positive, pool, seed);
      REQUIRE(examples.size() == 3);
      for (std::size_t i = 0; i < 3; ++i) {
        CHECK(examples[i].aspect == kAllAspects[i]);
        auto chosen = std::vector<CitedAnswer>(examples[i].negatives.begin(), examples[i].negatives.end());
        auto expected = pool[examples[i].aspect];
        auto key = [](const CitedAnswer& x) { return render_cited_answer(x); };
        std::sort(chosen.begin(), chosen.end(), [&](auto& l, auto& r) { return key(l) < key(r); });
        std::sort(expected.begin(), expected.end(), [&](auto& l, auto& r) { return key(l) < key(r); });
        CHECK(chosen == expected);
      }
    }
  }

  TEST_CASE("assembly rejects short pools and copies of the positive") {
    const auto positive = parse_cited_answer("Seoul has a population of 9.41 million [1].");
    NegativePool pool;
    for (Aspect a : kAllAspects) pool[a] = {parse_cited_answer("x [1]."), parse_cited_answer("y [1].")};
    CHECK_THROWS_AS(assemble_critique_examples(seoul_question(), seoul_docs(), positive, pool, 1), AssemblyError);
    for (Aspect a : kAllAspects) pool[a].push_back(positive);
    CHECK_THROWS_AS(assemble_critique_examples(seoul_question(), seoul_docs(), positive, pool, 1), AssemblyError);
  }

  TEST_CASE("deterministic set: citation negatives only change citations") {
    const auto corpus = synthetic_corpus(25, 4);
    const auto set = build_deterministic_critique_set(corpus, 4);
    REQUIRE(set.size() == 3 * corpus.size());
    CHECK(set == build_deterministic_critique_set(corpus, 4));
    std::map<std::string, int> per_question;
    for (const auto& ex : set) {
      ++per_question[ex.question.id];
      for (const auto& neg : ex.negatives) CHECK(neg != ex.positive);
      if (ex.aspect == Aspect::kCitation)
        for (const auto& neg : ex.negatives) CHECK(plain_text(neg) == plain_text(ex.positive));
      if (ex.aspect == Aspect::kCorrectness)
        for (const auto& neg : ex.negatives)
          CHECK(text::normalize_answer(plain_text(neg)).find(text::normalize_answer(ex.question.gold_aspects[2][0])) ==
                std::string::npos);
    }
    for (const auto& [id, n] : per_question) CHECK(n == 3);
  }

  TEST_CASE("llm set uses the annotation prompts") {
    const std::vector<CorpusRecord> corpus = {
        CorpusRecord{seoul_question(), seoul_docs(), CitedAnswer{}, std::nullopt}};
    ScriptedAnnotator gen;
    const auto set = build_llm_critique_set(corpus, gen, DecodeOptions{}, 3);
    REQUIRE(set.size() == 3);
    CHECK(gen.calls == 7);
    CHECK(set[0].positive == parse_cited_answer("Seoul has a population of 9.41 million [1]."));
    CHECK(plain_text(set[1].negatives[0]).find("million") != std::string::npos);
    for (const auto& neg : set[2].negatives) CHECK(neg.sentences[0].citations != std::set<int>{1});
  }

  TEST_CASE("critique set file round trip") {
    testing::TempDir dir;
    const auto set = build_deterministic_critique_set(synthetic_corpus(8, 2), 2);
    write_critique_set(dir.file("k.jsonl"), set);
    CHECK(read_critique_set(dir.file("k.jsonl")) == set);
  }
}
