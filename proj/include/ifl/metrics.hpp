#ifndef IFL_METRICS_HPP_
#define IFL_METRICS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ifl/answer.hpp"
#include "ifl/gateway.hpp"

// Answer quality metrics: EM recall, citation recall/precision and MAUVE.
namespace ifl {

class EntailmentJudge {
 public:
  virtual ~EntailmentJudge() = default;
  virtual bool entails(std::string_view premise, std::string_view hypothesis) const = 0;
};

// True iff the hypothesis has content words, at least 80% of them occur in
// the premise, and every numeric token of the hypothesis occurs in the
// premise.
bool lexical_entailment_judge(std::string_view premise, std::string_view hypothesis);

class LexicalEntailmentJudge final : public EntailmentJudge {
 public:
  bool entails(std::string_view premise, std::string_view hypothesis) const override {
    return lexical_entailment_judge(premise, hypothesis);
  }
};

// Fraction of gold groups with a member contained in the normalized answer.
// Throws PreconditionError on empty gold groups.
double em_recall(const CitedAnswer& answer, const GoldGroups& gold_aspects);

struct CitationScores {
  double recall = 0.0;
  double precision = 0.0;
  std::size_t sentences = 0;
  std::size_t supported_sentences = 0;
  std::size_t citations = 0;
  std::size_t relevant_citations = 0;
  // Precision is 0 with this flag set when the answer cites nothing.
  bool zero_citations = false;
  // Cited indices absent from the document set; they add no premise text.
  std::vector<int> missing_indices;
};

// A sentence counts toward recall when its cited documents, concatenated in
// ascending index order, entail it. A citation is relevant when the full
// cited set entails its sentence and either the citation alone entails it or
// the set without it does not.
CitationScores citation_scores(const CitedAnswer& answer, const DocumentSet& docs,
                               const EntailmentJudge& judge);

double citation_recall(const CitedAnswer& answer, const DocumentSet& docs, const EntailmentJudge& judge);
double citation_precision(const CitedAnswer& answer, const DocumentSet& docs,
                          const EntailmentJudge& judge);

struct MauveConfig {
  std::size_t max_clusters = 16;
  double c_scale = 5.0;
  std::size_t lambda_points = 25;
  double epsilon = 1e-6;
  std::uint64_t seed = 0;
  int kmeans_iterations = 100;
};

// Quantizes the joint embedding set with seeded k-means (k = min(max_clusters,
// n/2)), builds smoothed cluster histograms for both sides, traces the
// divergence curve exp(-c KL) over the mixture grid and returns the area
// under it. Throws PreconditionError with fewer than two points per side or
// mismatched dimensions.
double mauve_from_embeddings(std::span<const std::vector<double>> model,
                             std::span<const std::vector<double>> reference, const MauveConfig& config);

double mauve_score(std::span<const std::string> model_texts, std::span<const std::string> reference_texts,
                   const Embedder& embedder, const MauveConfig& config = {});

struct MetricReport {
  // Absent when either side has fewer than two texts.
  std::optional<double> mauve;
  double em_recall = 0.0;
  double citation_recall = 0.0;
  double citation_precision = 0.0;
  double mean_length = 0.0;  // words
  std::size_t items = 0;

  bool operator==(const MetricReport&) const = default;
};

struct EvalItem {
  const Question& question;
  const DocumentSet& docs;
  const CitedAnswer& answer;
};

struct ItemMetrics {
  std::string id;
  double em_recall = 0.0;
  double citation_recall = 0.0;
  double citation_precision = 0.0;
  double length = 0.0;
  bool zero_citations = false;
  std::vector<int> missing_indices;
};

struct CorpusEvaluation {
  MetricReport report;
  std::vector<ItemMetrics> items;
};

// Per-item metrics averaged in input order; MAUVE compares the marker-free
// answers against the references. Throws PreconditionError on empty runs.
CorpusEvaluation evaluate_corpus(std::span<const EvalItem> runs, const EntailmentJudge& judge,
                                 const Embedder& embedder, std::span<const std::string> references,
                                 const MauveConfig& mauve = {});

}  // namespace ifl

#endif  // IFL_METRICS_HPP_
