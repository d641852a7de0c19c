#include <doctest.h>

#include <fstream>

#include "ifl/answer.hpp"
#include "ifl/error.hpp"
#include "ifl/random.hpp"
#include "ifl/text.hpp"
#include "support.hpp"

using namespace ifl;

namespace {

CitedAnswer answer_of(std::vector<Sentence> sentences) { return CitedAnswer{std::move(sentences)}; }

// Random marker-bearing text over a small alphabet that exercises the
// terminator, abbreviation and bracket rules.
std::string random_raw(Rng& rng) {
  static const std::vector<std::string> pieces = {
      "Seoul", "has", "a", "population", "of", "9.41", "million", "e.g.", "i.e.", "etc.", "J.", "K.",
      "[1]", "[2]", "[3]", "[12]", "[x]", "(see", "it)", ".", "?", "!", "...", "Doc", "1,200", "[",
      "]", "the", "river", "\n", "  "};
  std::string out;
  const std::size_t n = rng.uniform_index(25);
  for (std::size_t i = 0; i < n; ++i) {
    out += pieces[rng.uniform_index(pieces.size())];
    if (rng.bernoulli(0.8)) out += ' ';
  }
  return out;
}

CitedAnswer random_answer(Rng& rng) {
  static const std::vector<std::string> words = {"Seoul", "river", "was", "founded", "in", "1362", "by",
                                                 "Mara", "Quell", "the", "city", "9.41", "million"};
  CitedAnswer a;
  const std::size_t n = rng.uniform_index(5);
  for (std::size_t i = 0; i < n; ++i) {
    Sentence s;
    const std::size_t len = 1 + rng.uniform_index(8);
    for (std::size_t w = 0; w < len; ++w) {
      if (w) s.text += ' ';
      s.text += words[rng.uniform_index(words.size())];
    }
    s.text += std::string(1, ".?!"[rng.uniform_index(3)]);
    const std::size_t c = rng.uniform_index(4);
    for (std::size_t k = 0; k < c; ++k) s.citations.insert(1 + static_cast<int>(rng.uniform_index(6)));
    a.sentences.push_back(s);
  }
  return a;
}

}  // namespace

TEST_SUITE("text") {
  TEST_CASE("tokenize keeps decimals and thousands together") {
    CHECK(text::tokenize("Seoul has 9.41 million, or 1,200 people.") ==
          std::vector<std::string>{"seoul", "has", "9.41", "million", "or", "1,200", "people"});
  }

  TEST_CASE("normalize_answer drops articles and punctuation") {
    CHECK(text::normalize_answer("The  Tanlo River!") == "tanlo river");
    CHECK(text::normalize_answer("An apple, a day") == "apple day");
  }

  TEST_CASE("content words skip stopwords") {
    CHECK(text::content_words("Seoul has a population of 9.41 million") ==
          std::vector<std::string>{"seoul", "population", "9.41", "million"});
  }

  TEST_CASE("collapse_whitespace") {
    CHECK(text::collapse_whitespace("  a \n\t b  ") == "a b");
    CHECK(text::collapse_whitespace("   ").empty());
  }
}

TEST_SUITE("answer") {
  TEST_CASE("single cited sentence") {
    const auto a = parse_cited_answer("Seoul has a population of 9.41 million [2]");
    REQUIRE(a.sentences.size() == 1);
    CHECK(a.sentences[0].text == "Seoul has a population of 9.41 million");
    CHECK(a.sentences[0].citations == std::set<int>{2});
  }

  TEST_CASE("empty input") { CHECK(parse_cited_answer("").empty()); }

  TEST_CASE("two sentences, markers before the terminator") {
    const auto a = parse_cited_answer("A is true [1][3]. B is false.");
    REQUIRE(a.sentences.size() == 2);
    CHECK(a.sentences[0].citations == std::set<int>{1, 3});
    CHECK(a.sentences[1].citations.empty());
    CHECK(a.sentences[0].text == "A is true.");
    CHECK(a.sentences[1].text == "B is false.");
  }

  TEST_CASE("markers after the terminator stay with their sentence") {
    const auto a = parse_cited_answer("It opened in 1932. [2] It is long [1].");
    REQUIRE(a.sentences.size() == 2);
    CHECK(a.sentences[0].citations == std::set<int>{2});
    CHECK(a.sentences[1].citations == std::set<int>{1});
  }

  TEST_CASE("abbreviations, initials and brackets do not split") {
    CHECK(parse_cited_answer("Rivers, e.g. the Han, flow west. It rains.").sentences.size() == 2);
    CHECK(parse_cited_answer("J. K. Rowling wrote it [1].").sentences.size() == 1);
    CHECK(parse_cited_answer("Values (approx. 9.41 m. people) vary.").sentences.size() == 1);
  }

  TEST_CASE("non-numeric bracket text stays in the sentence") {
    const auto a = parse_cited_answer("See [note] here [1].");
    REQUIRE(a.sentences.size() == 1);
    CHECK(a.sentences[0].text == "See [note] here.");
    CHECK(a.sentences[0].citations == std::set<int>{1});
  }

  TEST_CASE("render orders citations ascending before the terminator") {
    CHECK(render_cited_answer(answer_of({Sentence{"X is Y", {2, 1}}})) == "X is Y [1][2]");
    CHECK(render_cited_answer(answer_of({Sentence{"X is Y.", {3}}, Sentence{"Z?", {}}})) == "X is Y [3]. Z?");
    CHECK(render_cited_answer(CitedAnswer{}).empty());
  }

  TEST_CASE("strip_citations") {
    CHECK(strip_citations("Seoul has a population of 9.41 million [2]") == "Seoul has a population of 9.41 million");
    CHECK(strip_citations("A [1] and B [2].") == "A and B.");
    CHECK(strip_citations("plain  text\nhere.") == "plain text here.");
  }

  TEST_CASE("normalize_marker_style") {
    CHECK(normalize_marker_style("Seoul has 9.41 million [Citation: Doc 2]") == "Seoul has 9.41 million [2]");
    const auto a = parse_cited_answer(normalize_marker_style("Alpha [Citation: Doc 1]. Beta [Citation: Doc 3]."));
    REQUIRE(a.sentences.size() == 2);
    CHECK(a.sentences[1].citations == std::set<int>{3});
  }

  TEST_CASE("property: parse/render/parse fixpoint on arbitrary text") {
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
      const std::string raw = random_raw(rng);
      const auto once = parse_cited_answer(raw);
      const auto twice = parse_cited_answer(render_cited_answer(once));
      CAPTURE(raw);
      CHECK(twice == once);
    }
  }

  TEST_CASE("property: generated answers round-trip exactly") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
      const auto a = random_answer(rng);
      CHECK(parse_cited_answer(render_cited_answer(a)) == a);
    }
  }

  TEST_CASE("property: strip_citations is idempotent and marker-free") {
    Rng rng(19);
    for (int i = 0; i < 1000; ++i) {
      const std::string raw = random_raw(rng);
      const std::string once = strip_citations(raw);
      CAPTURE(raw);
      CHECK(strip_citations(once) == once);
      CHECK(parse_cited_answer(once).citation_count() == 0);
    }
  }

  TEST_CASE("document set validation") {
    CHECK_THROWS_AS(DocumentSet({{0, "t", "b"}}), PreconditionError);
    CHECK_THROWS_AS(DocumentSet({{1, "t", "b"}, {1, "u", "c"}}), PreconditionError);
    CHECK_THROWS_AS(DocumentSet({{1, "t", ""}}), PreconditionError);
    const DocumentSet docs({{3, "c", "z"}, {1, "a", "x"}});
    CHECK(docs.documents()[0].index == 1);
    CHECK(docs.contains(3));
    CHECK_FALSE(docs.contains(2));
  }

  TEST_CASE("citations_valid") {
    const DocumentSet docs({{1, "a", "x"}, {2, "b", "y"}});
    CHECK(parse_cited_answer("A [1][2].").citations_valid(docs));
    CHECK_FALSE(parse_cited_answer("A [3].").citations_valid(docs));
  }

  TEST_CASE("corpus file round trip") {
    testing::TempDir dir;
    CorpusRecord r;
    r.question = {"q1", "Who?", {{"Mara Quell"}}};
    r.docs = DocumentSet({{1, "Bridge", "Mara Quell designed it."}});
    r.answer = parse_cited_answer("Mara Quell designed it [1].");
    r.long_answer = "Mara Quell designed the bridge.";
    CorpusRecord bare = r;
    bare.question.id = "q2";
    bare.long_answer.reset();
    const std::vector<CorpusRecord> records = {r, bare};
    write_corpus(dir.file("c.jsonl"), records);
    CHECK(read_corpus(dir.file("c.jsonl")) == records);
  }

  TEST_CASE("corpus schema errors name the line") {
    testing::TempDir dir;
    {
      std::ofstream out(dir.file("bad.jsonl"));
      out << "\n" << R"({"id":"b"})" << "\n";
    }
    try {
      read_corpus(dir.file("bad.jsonl"));
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()).find("bad.jsonl:2:") != std::string::npos);
    }
  }
}
