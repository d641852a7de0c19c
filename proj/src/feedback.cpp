#include "ifl/feedback.hpp"

#include <array>
#include <fstream>

#include "ifl/corpus.hpp"
#include "ifl/error.hpp"
#include "ifl/serialize.hpp"

namespace ifl {

namespace {

constexpr std::string_view kInstruction =
    "Use the feedback given on Fluency, Correctness, and Citation to continually refine the previous "
    "answer for higher quality.";

// [aspect][band]
constexpr std::array<std::array<std::string_view, 3>, 3> kTemplates = {{
    {"For the fluency aspect, you did great.",
     "For the fluency aspect, try to provide a more concise and non-repetitive response.",
     "For the fluency aspect, the response repeats the same words and phrases. Rewrite it concisely "
     "and state each fact only once."},
    {"For the correctness aspect, you did great.",
     "For the correctness aspect, try to rely more closely on the facts stated in the provided search "
     "results.",
     "For the correctness aspect, the response contains information that the search results do not "
     "support. Rewrite it using only facts stated in the provided search results."},
    {"For the citation aspect, you did great.",
     "For the citation aspect, you have cited the appropriate search results, but try to cite more "
     "specifically by mentioning the search result number for each citation.",
     "For the citation aspect, the cited search results do not support the statements. Cite the "
     "search result that contains each statement, using its number in brackets, for every "
     "sentence."},
}};

}  // namespace

std::string_view band_name(Band band) {
  switch (band) {
    case Band::kPraise: return "praise";
    case Band::kImprove: return "improve";
    case Band::kCorrective: return "corrective";
  }
  return "improve";
}

Band band_from_name(std::string_view name) {
  for (Band b : {Band::kPraise, Band::kImprove, Band::kCorrective})
    if (band_name(b) == name) return b;
  throw SchemaError("unknown feedback band: " + std::string(name));
}

BandThresholds BandThresholds::defaults() {
  BandThresholds t;
  t.per_aspect[Aspect::kFluency] = {-0.35, -1.36};
  t.per_aspect[Aspect::kCorrectness] = {1.12, -1.25};
  t.per_aspect[Aspect::kCitation] = {0.93, -1.75};
  return t;
}

void BandThresholds::validate() const {
  for (Aspect a : kAllAspects) {
    const auto& t = per_aspect[a];
    if (!(t.avg_positive > t.avg_negative))
      throw PreconditionError("thresholds for aspect '" + std::string(aspect_name(a)) +
                              "' need avg_positive > avg_negative");
  }
}

BandThresholds thresholds_from_evaluation(const CriticEvaluation& evaluation) {
  BandThresholds t;
  for (Aspect a : kAllAspects)
    t.per_aspect[a] = {evaluation[a].avg_positive_reward, evaluation[a].avg_negative_reward};
  t.validate();
  return t;
}

BandThresholds read_thresholds(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open thresholds file: " + path);
  try {
    auto t = thresholds_from_json(nlohmann::json::parse(in));
    t.validate();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  } catch (const PreconditionError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

void write_thresholds(const std::string& path, const BandThresholds& thresholds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SchemaError("cannot write thresholds file: " + path);
  out << to_json(thresholds).dump(2) << '\n';
}

Band classify_reward_band(const RewardScore& score, const BandThresholds& thresholds) {
  const auto& t = thresholds.per_aspect[score.aspect];
  if (score.clipped >= t.avg_positive) return Band::kPraise;
  if (score.clipped <= t.avg_negative) return Band::kCorrective;
  return Band::kImprove;
}

std::string_view render_feedback(Aspect aspect, Band band) {
  return kTemplates[aspect_slot(aspect)][static_cast<std::size_t>(band)];
}

FeedbackItem make_feedback(const RewardScore& score, const BandThresholds& thresholds) {
  const Band band = classify_reward_band(score, thresholds);
  return FeedbackItem{score.aspect, score, band, std::string(render_feedback(score.aspect, band))};
}

std::string_view refinement_instruction() { return kInstruction; }

std::string build_refinement_prompt(const Question& question, const DocumentSet& docs,
                                    const CitedAnswer& previous_answer,
                                    std::span<const FeedbackItem> feedback) {
  PerAspect<const FeedbackItem*> by_aspect{};
  for (const auto& item : feedback) {
    if (by_aspect[item.aspect] != nullptr)
      throw PreconditionError("duplicate feedback for aspect '" + std::string(aspect_name(item.aspect)) + "'");
    by_aspect[item.aspect] = &item;
  }
  for (Aspect a : kAllAspects)
    if (by_aspect[a] == nullptr)
      throw PreconditionError("missing feedback for aspect '" + std::string(aspect_name(a)) + "'");

  std::string out(kInstruction);
  out += "\n\n";
  out += format_question_and_docs(question, docs);
  out += "\n\nPrevious answer: ";
  out += render_cited_answer(previous_answer);
  out += "\n\nFeedback:";
  for (Aspect a : kAllAspects) {
    out += "\n- ";
    out += by_aspect[a]->text;
  }
  out += "\n\nRefined answer:";
  return out;
}

}  // namespace ifl
