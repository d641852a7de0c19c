#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ifl/error.hpp"
#include "ifl/feedback.hpp"
#include "ifl/serialize.hpp"
#include "support.hpp"

using namespace ifl;

namespace {

RewardScore reward(Aspect a, double raw) { return RewardScore{a, raw, clip_reward(raw)}; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Fixture {
  Question question{"harbor", "When did the Harbor Bridge open?", {{"1932"}}};
  DocumentSet docs{{{1, "Harbor Bridge", "The Harbor Bridge opened to traffic in 1932."},
                    {2, "Harbor Bridge design", "Engineer Mara Quell designed the Harbor Bridge."}}};
  CitedAnswer answer = parse_cited_answer("The Harbor Bridge opened in 1932 [2]. It opened in 1932 [2].");
  std::vector<FeedbackItem> feedback;

  Fixture() {
    const auto t = BandThresholds::defaults();
    feedback = {make_feedback(reward(Aspect::kFluency, -0.93), t), make_feedback(reward(Aspect::kCorrectness, 1.25), t),
                make_feedback(reward(Aspect::kCitation, 0.51), t)};
  }
};

}  // namespace

TEST_SUITE("feedback") {
  TEST_CASE("default thresholds") {
    const auto t = BandThresholds::defaults();
    CHECK(t.per_aspect[Aspect::kFluency] == AspectThreshold{-0.35, -1.36});
    CHECK(t.per_aspect[Aspect::kCorrectness] == AspectThreshold{1.12, -1.25});
    CHECK(t.per_aspect[Aspect::kCitation] == AspectThreshold{0.93, -1.75});
    CHECK_NOTHROW(t.validate());
  }

  TEST_CASE("reference rewards map to the reference feedback") {
    const auto t = BandThresholds::defaults();
    const auto fluency = make_feedback(reward(Aspect::kFluency, -0.93), t);
    const auto correctness = make_feedback(reward(Aspect::kCorrectness, 1.25), t);
    const auto citation = make_feedback(reward(Aspect::kCitation, 0.51), t);
    CHECK(fluency.band == Band::kImprove);
    CHECK(correctness.band == Band::kPraise);
    CHECK(citation.band == Band::kImprove);
    CHECK(fluency.text == "For the fluency aspect, try to provide a more concise and non-repetitive response.");
    CHECK(correctness.text == "For the correctness aspect, you did great.");
    CHECK(citation.text ==
          "For the citation aspect, you have cited the appropriate search results, but try to cite more "
          "specifically by mentioning the search result number for each citation.");
  }

  TEST_CASE("band boundaries are inclusive") {
    const auto t = BandThresholds::defaults();
    CHECK(classify_reward_band(reward(Aspect::kCorrectness, 1.12), t) == Band::kPraise);
    CHECK(classify_reward_band(reward(Aspect::kCorrectness, -1.25), t) == Band::kCorrective);
    CHECK(classify_reward_band(reward(Aspect::kCorrectness, 0.0), t) == Band::kImprove);
    CHECK(classify_reward_band(reward(Aspect::kCitation, -5.0), t) == Band::kCorrective);
  }

  TEST_CASE("property: bands are monotone and ignore raw scores beyond the clip") {
    const auto t = BandThresholds::defaults();
    Rng rng(31);
    for (int i = 0; i < 3000; ++i) {
      const Aspect a = kAllAspects[rng.uniform_index(3)];
      const double x = rng.normal() * 3;
      const double y = x + std::abs(rng.normal());
      CHECK(static_cast<int>(classify_reward_band(reward(a, y), t)) <=
            static_cast<int>(classify_reward_band(reward(a, x), t)));
      const double far = (x > 0 ? 2.0 : -2.0) * (1.0 + std::abs(rng.normal()));
      CHECK(classify_reward_band(reward(a, far), t) ==
            classify_reward_band(reward(a, far > 0 ? 2.0 : -2.0), t));
    }
  }

  TEST_CASE("every template is aspect-specific and deterministic") {
    for (Aspect a : kAllAspects)
      for (Band b : {Band::kPraise, Band::kImprove, Band::kCorrective}) {
        const auto text = render_feedback(a, b);
        CHECK(text.starts_with("For the " + std::string(aspect_name(a)) + " aspect, "));
        CHECK(text == render_feedback(a, b));
      }
  }

  TEST_CASE("threshold validation") {
    auto t = BandThresholds::defaults();
    t.per_aspect[Aspect::kCitation] = {0.1, 0.1};
    CHECK_THROWS_AS(t.validate(), PreconditionError);
  }

  TEST_CASE("thresholds from an evaluation") {
    CriticEvaluation ev;
    ev[Aspect::kFluency] = {10, 1.0, 0.3, -2.0};
    ev[Aspect::kCorrectness] = {10, 1.0, 2.0, 0.8};
    ev[Aspect::kCitation] = {10, 1.0, 1.9, -0.8};
    const auto t = thresholds_from_evaluation(ev);
    CHECK(t.per_aspect[Aspect::kFluency] == AspectThreshold{0.3, -2.0});
    CHECK(t.per_aspect[Aspect::kCitation] == AspectThreshold{1.9, -0.8});
    ev[Aspect::kCitation].avg_negative_reward = 1.9;
    CHECK_THROWS_AS(thresholds_from_evaluation(ev), PreconditionError);
  }

  TEST_CASE("threshold file round trip") {
    testing::TempDir dir;
    auto t = BandThresholds::defaults();
    t.per_aspect[Aspect::kFluency] = {0.25, -1.5};
    write_thresholds(dir.file("t.json"), t);
    CHECK(read_thresholds(dir.file("t.json")) == t);
  }

  TEST_CASE("refinement prompt layout") {
    Fixture f;
    const auto prompt = build_refinement_prompt(f.question, f.docs, f.answer, f.feedback);
    CHECK(prompt.starts_with(std::string(refinement_instruction())));
    CHECK(prompt.find("Use the feedback given on Fluency, Correctness, and Citation to continually refine the "
                      "previous answer for higher quality.") != std::string::npos);
    CHECK(prompt.find("Previous answer: The Harbor Bridge opened in 1932 [2]. It opened in 1932 [2].") !=
          std::string::npos);
    CHECK(prompt.ends_with("\n\nRefined answer:"));
  }

  TEST_CASE("refinement prompt golden file") {
    Fixture f;
    const auto prompt = build_refinement_prompt(f.question, f.docs, f.answer, f.feedback);
    CHECK(prompt == read_file(std::string(IFL_GOLDEN_DIR) + "/refinement_prompt.txt"));
  }

  TEST_CASE("feedback order does not matter") {
    Fixture f;
    const auto expected = build_refinement_prompt(f.question, f.docs, f.answer, f.feedback);
    auto items = f.feedback;
    std::sort(items.begin(), items.end(), [](auto& a, auto& b) { return a.text < b.text; });
    do {
      CHECK(build_refinement_prompt(f.question, f.docs, f.answer, items) == expected);
    } while (std::next_permutation(items.begin(), items.end(), [](auto& a, auto& b) { return a.text < b.text; }));
  }

  TEST_CASE("refinement prompt needs one item per aspect") {
    Fixture f;
    auto missing = f.feedback;
    missing.pop_back();
    CHECK_THROWS_AS(build_refinement_prompt(f.question, f.docs, f.answer, missing), PreconditionError);
    auto dup = f.feedback;
    dup[2] = dup[1];
    CHECK_THROWS_AS(build_refinement_prompt(f.question, f.docs, f.answer, dup), PreconditionError);
  }

  TEST_CASE("band names") {
    for (Band b : {Band::kPraise, Band::kImprove, Band::kCorrective}) CHECK(band_from_name(band_name(b)) == b);
    CHECK_THROWS_AS(band_from_name("great"), SchemaError);
  }
}
