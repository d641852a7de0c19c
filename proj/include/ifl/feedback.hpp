#ifndef IFL_FEEDBACK_HPP_
#define IFL_FEEDBACK_HPP_

#include <span>
#include <string>
#include <string_view>

#include "ifl/answer.hpp"
#include "ifl/aspect.hpp"
#include "ifl/critic.hpp"

namespace ifl {

enum class Band { kPraise, kImprove, kCorrective };

std::string_view band_name(Band band);  // "praise", "improve", "corrective"
Band band_from_name(std::string_view name);

struct AspectThreshold {
  double avg_positive = 0.0;
  double avg_negative = 0.0;

  bool operator==(const AspectThreshold&) const = default;
};

struct BandThresholds {
  PerAspect<AspectThreshold> per_aspect;

  // Average positive/negative critic rewards reported for the reference
  // critic: fluency -0.35/-1.36, correctness 1.12/-1.25, citation 0.93/-1.75.
  static BandThresholds defaults();

  // Throws PreconditionError unless avg_positive > avg_negative everywhere.
  void validate() const;

  bool operator==(const BandThresholds&) const = default;
};

// Thresholds taken from a critic's own average clipped rewards.
BandThresholds thresholds_from_evaluation(const CriticEvaluation& evaluation);

BandThresholds read_thresholds(const std::string& path);
void write_thresholds(const std::string& path, const BandThresholds& thresholds);

// clipped >= avg_positive: Praise; clipped <= avg_negative: Corrective;
// otherwise Improve.
Band classify_reward_band(const RewardScore& score, const BandThresholds& thresholds);

// One fixed sentence per (aspect, band). The Corrective texts are authored
// for this toolkit; the others follow the reference feedback examples.
std::string_view render_feedback(Aspect aspect, Band band);

struct FeedbackItem {
  Aspect aspect = Aspect::kFluency;
  RewardScore score;
  Band band = Band::kImprove;
  std::string text;

  bool operator==(const FeedbackItem&) const = default;
};

FeedbackItem make_feedback(const RewardScore& score, const BandThresholds& thresholds);

std::string_view refinement_instruction();

// Instruction, question and documents, the rendered previous answer, then
// the three feedback sentences in canonical aspect order. Throws
// PreconditionError unless there is exactly one item per aspect.
std::string build_refinement_prompt(const Question& question, const DocumentSet& docs,
                                    const CitedAnswer& previous_answer,
                                    std::span<const FeedbackItem> feedback);

}  // namespace ifl

#endif  // IFL_FEEDBACK_HPP_
