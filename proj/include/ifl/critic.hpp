#ifndef IFL_CRITIC_HPP_
#define IFL_CRITIC_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ifl/answer.hpp"
#include "ifl/aspect.hpp"
#include "ifl/corpus.hpp"

namespace ifl {

// The (question, documents, answer) triple a reward is computed for.
// Non-owning; the referenced values must outlive the context.
struct AnswerContext {
  const Question& question;
  const DocumentSet& docs;
  const CitedAnswer& answer;
};

inline constexpr std::size_t kFeatureCount = 8;

// Every entry lies in [0, 1]. Layouts:
//
// fluency
//   0-2  repetition of the most frequent 3/4/5-gram, 1 - 1/count (0 if unique)
//   3    type/token ratio
//   4    answer length relative to the mean document length, r / (1 + r)
//   5    fraction of tokens inside a repeated 3-gram
//   6    fraction of tokens equal to their predecessor
//   7    mean sentence length L, as L / (L + 20)
// correctness
//   0    fraction of answer content words present in the documents
//   1    fraction of numeric tokens present in the documents (1 if none)
//   2    fraction of capitalized non-initial words absent from the documents
//   3    fraction of adjacent content-word bigrams present in some document
//   4    fraction of question content words the answer mentions
//   5    fraction of sentences with at least half their content words grounded
//   6    best single-document coverage of the answer's content words
//   7    fraction of sentences whose numbers all appear in the documents
// citation
//   0    fraction of sentences with at least one citation
//   1    mean content-word overlap between a sentence and its cited documents
//   2    mean overlap between a sentence and its best non-cited document
//   3    fraction of citations that name an existing document
//   4    fraction of sentences where a non-cited document overlaps more
//   5    fraction of sentences the lexical judge finds entailed by citations
//   6    mean citations per sentence c, as c / (1 + c)
//   7    fraction of citations whose document alone covers half the sentence
using FeatureVector = std::array<double, kFeatureCount>;

// An empty answer maps to the zero vector.
FeatureVector extract_features(const AnswerContext& ctx, Aspect aspect);

std::span<const std::string_view> feature_names(Aspect aspect);

struct AspectHead {
  FeatureVector weights{};
  double bias = 0.0;

  bool operator==(const AspectHead&) const = default;
};

struct CriticParams {
  static constexpr int kVersion = 1;
  PerAspect<AspectHead> heads;

  bool operator==(const CriticParams&) const = default;
};

// Same shape as the parameters it differentiates.
using CriticGradient = PerAspect<AspectHead>;

inline constexpr double kRewardClip = 2.0;

struct RewardScore {
  Aspect aspect = Aspect::kFluency;
  double raw = 0.0;
  double clipped = 0.0;

  bool operator==(const RewardScore&) const = default;
};

double clip_reward(double raw);

RewardScore score_features(const AspectHead& head, const FeatureVector& features, Aspect aspect);
RewardScore score_answer(const CriticParams& params, const AnswerContext& ctx, Aspect aspect);

// Sum over every (positive j, negative i) pair of log(1 + exp(neg_i - pos_j)).
// Takes raw scores. Throws PreconditionError if either list is empty.
double pairwise_ranking_loss(std::span<const double> pos_scores, std::span<const double> neg_scores);

// Exact gradient of the loss of one example with respect to all parameters.
// Only the example's aspect head is non-zero; the bias gradient is always
// zero because the bias cancels in every score difference.
CriticGradient loss_gradient(const CriticParams& params, const CritiqueExample& example);

// Example with features computed once, for training and evaluation.
struct FeaturizedExample {
  std::string question_id;
  Aspect aspect = Aspect::kFluency;
  FeatureVector positive{};
  std::array<FeatureVector, 3> negatives{};
};

FeaturizedExample featurize(const CritiqueExample& example);

// Loss of one featurized example under a head.
double example_loss(const AspectHead& head, const FeaturizedExample& example);

struct TrainConfig {
  double rate = 0.1;
  int epochs = 200;
  std::uint64_t seed = 0;
  double l2 = 1e-4;
  // Fraction of question ids held out for evaluation.
  double holdout_fraction = 0.2;
  // 0 means full batch.
  std::size_t batch_size = 0;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AspectTrainingReport {
  std::vector<double> epoch_loss;  // mean example loss before each update
  double final_loss = 0.0;
  std::size_t train_examples = 0;
  std::size_t heldout_examples = 0;
  double train_accuracy = 0.0;
  std::optional<double> heldout_accuracy;
};

struct TrainingReport {
  PerAspect<AspectTrainingReport> aspects;
};

struct TrainResult {
  CriticParams params;
  TrainingReport report;
};

// Independent gradient descent per aspect head on the pairwise loss with L2
// weight decay. Question ids are split into train/held-out sets with the seed.
// Throws TrainingError on an empty dataset or a non-finite loss.
TrainResult train_critic(std::span<const CritiqueExample> dataset, const TrainConfig& config);

struct AspectEvaluation {
  std::size_t examples = 0;
  double pairwise_accuracy = 0.0;
  double avg_positive_reward = 0.0;  // clipped
  double avg_negative_reward = 0.0;  // clipped
};

using CriticEvaluation = PerAspect<AspectEvaluation>;

CriticEvaluation evaluate_critic(const CriticParams& params, std::span<const CritiqueExample> dataset);

// Fraction of (positive, negative) pairs where the positive's raw score is
// strictly higher.
double pairwise_accuracy(const AspectHead& head, std::span<const FeaturizedExample> examples);

CriticParams read_params(const std::string& path);
void write_params(const std::string& path, const CriticParams& params);

void write_training_report(const std::string& path, const TrainingReport& report);

}  // namespace ifl

#endif  // IFL_CRITIC_HPP_
