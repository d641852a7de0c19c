#include "ifl/critic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "ifl/error.hpp"
#include "ifl/metrics.hpp"
#include "ifl/random.hpp"
#include "ifl/serialize.hpp"
#include "ifl/text.hpp"

namespace ifl {

namespace {

using TokenSet = std::unordered_set<std::string>;

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

TokenSet to_set(const std::vector<std::string>& tokens) { return TokenSet(tokens.begin(), tokens.end()); }

std::string join_gram(const std::vector<std::string>& tokens, std::size_t at, std::size_t n) {
  std::string key;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) key.push_back('\x1f');
    key += tokens[at + k];
  }
  return key;
}

// Count of each n-gram of the token stream.
std::unordered_map<std::string, std::size_t> ngram_counts(const std::vector<std::string>& tokens,
                                                          std::size_t n) {
  std::unordered_map<std::string, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++counts[join_gram(tokens, i, n)];
  return counts;
}

double repetition_feature(const std::vector<std::string>& tokens, std::size_t n) {
  std::size_t max_count = 0;
  for (const auto& [gram, count] : ngram_counts(tokens, n)) max_count = std::max(max_count, count);
  return max_count >= 2 ? 1.0 - 1.0 / static_cast<double>(max_count) : 0.0;
}

// Fraction of the sentence's content words found in the token set.
double overlap(const std::vector<std::string>& content, const TokenSet& tokens) {
  if (content.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& w : content) hit += tokens.contains(w) ? 1 : 0;
  return ratio(hit, content.size());
}

struct DocIndex {
  std::vector<int> indices;
  std::vector<TokenSet> tokens;
  std::vector<std::size_t> lengths;
  TokenSet all;
  std::set<std::pair<std::string, std::string>> content_bigrams;

  explicit DocIndex(const DocumentSet& docs) {
    for (const auto& d : docs) {
      const auto toks = text::tokenize(document_text(d));
      indices.push_back(d.index);
      tokens.push_back(to_set(toks));
      lengths.push_back(toks.size());
      all.insert(toks.begin(), toks.end());
      const auto content = text::content_words(document_text(d));
      for (std::size_t i = 1; i < content.size(); ++i) content_bigrams.emplace(content[i - 1], content[i]);
    }
  }

  const TokenSet* find(int index) const {
    for (std::size_t k = 0; k < indices.size(); ++k)
      if (indices[k] == index) return &tokens[k];
    return nullptr;
  }
};

FeatureVector fluency_features(const AnswerContext& ctx, const DocIndex& docs) {
  FeatureVector f{};
  const auto tokens = text::tokenize(plain_text(ctx.answer));
  if (tokens.empty()) return f;
  f[0] = repetition_feature(tokens, 3);
  f[1] = repetition_feature(tokens, 4);
  f[2] = repetition_feature(tokens, 5);
  f[3] = ratio(to_set(tokens).size(), tokens.size());

  const std::size_t doc_tokens = std::accumulate(docs.lengths.begin(), docs.lengths.end(), std::size_t{0});
  const double expected = docs.lengths.empty() ? 0.0 : static_cast<double>(doc_tokens) / docs.lengths.size();
  const double r = expected > 0 ? static_cast<double>(tokens.size()) / expected : 0.0;
  f[4] = r / (1.0 + r);

  const auto trigram_counts = ngram_counts(tokens, 3);
  std::vector<bool> covered(tokens.size(), false);
  for (std::size_t i = 0; i + 3 <= tokens.size(); ++i)
    if (trigram_counts.at(join_gram(tokens, i, 3)) >= 2)
      covered[i] = covered[i + 1] = covered[i + 2] = true;
  f[5] = ratio(static_cast<std::size_t>(std::count(covered.begin(), covered.end(), true)), tokens.size());

  std::size_t stutter = 0;
  for (std::size_t i = 1; i < tokens.size(); ++i) stutter += tokens[i] == tokens[i - 1] ? 1 : 0;
  f[6] = ratio(stutter, tokens.size());

  const double mean_len = static_cast<double>(tokens.size()) / ctx.answer.sentences.size();
  f[7] = mean_len / (mean_len + 20.0);
  return f;
}

bool starts_upper(std::string_view word) {
  for (char c : word) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) return std::isupper(u) != 0;
    if (std::isdigit(u)) return false;
  }
  return false;
}

FeatureVector correctness_features(const AnswerContext& ctx, const DocIndex& docs) {
  FeatureVector f{};
  const std::string answer_text = plain_text(ctx.answer);
  const auto tokens = text::tokenize(answer_text);
  if (tokens.empty()) return f;
  const auto content = text::content_words(answer_text);

  f[0] = overlap(content, docs.all);

  std::size_t numerics = 0;
  std::size_t grounded_numerics = 0;
  for (const auto& t : tokens) {
    if (!text::is_numeric_token(t)) continue;
    ++numerics;
    grounded_numerics += docs.all.contains(t) ? 1 : 0;
  }
  f[1] = numerics == 0 ? 1.0 : ratio(grounded_numerics, numerics);

  std::size_t named = 0;
  std::size_t named_missing = 0;
  std::size_t bigrams = 0;
  std::size_t grounded_bigrams = 0;
  std::size_t grounded_sentences = 0;
  std::size_t numeric_sentences_ok = 0;
  for (const auto& s : ctx.answer.sentences) {
    const auto words = text::split_words(s.text);
    for (std::size_t i = 1; i < words.size(); ++i) {
      if (!starts_upper(words[i])) continue;
      const auto parts = text::tokenize(words[i]);
      if (parts.empty()) continue;
      ++named;
      const bool grounded =
          std::all_of(parts.begin(), parts.end(), [&](const std::string& p) { return docs.all.contains(p); });
      named_missing += grounded ? 0 : 1;
    }
    const auto sc = text::content_words(s.text);
    for (std::size_t i = 1; i < sc.size(); ++i) {
      ++bigrams;
      grounded_bigrams += docs.content_bigrams.contains({sc[i - 1], sc[i]}) ? 1 : 0;
    }
    if (!sc.empty() && overlap(sc, docs.all) >= 0.5) ++grounded_sentences;
    bool numbers_ok = true;
    for (const auto& t : text::tokenize(s.text))
      if (text::is_numeric_token(t) && !docs.all.contains(t)) numbers_ok = false;
    numeric_sentences_ok += numbers_ok ? 1 : 0;
  }
  f[2] = ratio(named_missing, named);
  f[3] = bigrams == 0 ? f[0] : ratio(grounded_bigrams, bigrams);

  const auto question_content = text::content_words(ctx.question.text);
  const TokenSet answer_tokens = to_set(tokens);
  f[4] = overlap(question_content, answer_tokens);

  const std::size_t n_sent = ctx.answer.sentences.size();
  f[5] = ratio(grounded_sentences, n_sent);
  for (const auto& doc_tokens : docs.tokens) f[6] = std::max(f[6], overlap(content, doc_tokens));
  f[7] = ratio(numeric_sentences_ok, n_sent);
  return f;
}

FeatureVector citation_features(const AnswerContext& ctx, const DocIndex& docs) {
  FeatureVector f{};
  const auto& sentences = ctx.answer.sentences;
  if (sentences.empty()) return f;

  std::size_t cited_sentences = 0;
  std::size_t citations = 0;
  std::size_t valid_citations = 0;
  std::size_t miscited = 0;
  std::size_t entailed = 0;
  std::size_t strong_citations = 0;
  double cited_overlap_sum = 0.0;
  double other_overlap_sum = 0.0;

  for (const auto& s : sentences) {
    const auto content = text::content_words(s.text);
    TokenSet cited_tokens;
    std::string premise;
    for (int c : s.citations) {
      ++citations;
      const TokenSet* doc_tokens = docs.find(c);
      if (doc_tokens == nullptr) continue;
      ++valid_citations;
      cited_tokens.insert(doc_tokens->begin(), doc_tokens->end());
      if (overlap(content, *doc_tokens) >= 0.5) ++strong_citations;
      const Document* d = ctx.docs.find(c);
      if (!premise.empty()) premise.push_back('\n');
      premise += document_text(*d);
    }
    if (!s.citations.empty()) ++cited_sentences;
    const double cited_overlap = s.citations.empty() ? 0.0 : overlap(content, cited_tokens);
    double best_other = 0.0;
    for (std::size_t k = 0; k < docs.indices.size(); ++k) {
      if (s.citations.contains(docs.indices[k])) continue;
      best_other = std::max(best_other, overlap(content, docs.tokens[k]));
    }
    cited_overlap_sum += cited_overlap;
    other_overlap_sum += best_other;
    if (best_other > cited_overlap) ++miscited;
    if (!s.citations.empty() && lexical_entailment_judge(premise, s.text)) ++entailed;
  }

  const std::size_t n = sentences.size();
  f[0] = ratio(cited_sentences, n);
  f[1] = cited_overlap_sum / static_cast<double>(n);
  f[2] = other_overlap_sum / static_cast<double>(n);
  f[3] = ratio(valid_citations, citations);
  f[4] = ratio(miscited, n);
  f[5] = ratio(entailed, n);
  const double mean_cites = static_cast<double>(citations) / static_cast<double>(n);
  f[6] = mean_cites / (1.0 + mean_cites);
  f[7] = ratio(strong_citations, citations);
  return f;
}

constexpr std::array<std::string_view, kFeatureCount> kFluencyNames = {
    "max_3gram_repetition", "max_4gram_repetition", "max_5gram_repetition", "type_token_ratio",
    "length_vs_docs",       "repeated_3gram_coverage", "adjacent_duplicates", "mean_sentence_length"};
constexpr std::array<std::string_view, kFeatureCount> kCorrectnessNames = {
    "content_in_docs",        "numbers_in_docs",     "unsupported_names",  "bigrams_in_docs",
    "question_coverage",      "grounded_sentences",  "best_doc_coverage",  "sentences_numbers_ok"};
constexpr std::array<std::string_view, kFeatureCount> kCitationNames = {
    "cited_sentences",   "overlap_with_cited", "overlap_with_best_uncited", "valid_citations",
    "miscited_sentences", "entailed_sentences", "citation_density",          "strong_citations"};

double dot(const FeatureVector& a, const FeatureVector& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < kFeatureCount; ++k) s += a[k] * b[k];
  return s;
}

// Accumulates the gradient of one example's loss into grad.
void accumulate_gradient(const AspectHead& head, const FeaturizedExample& ex, FeatureVector& grad) {
  const double pos = dot(head.weights, ex.positive);
  for (const auto& neg_features : ex.negatives) {
    const double neg = dot(head.weights, neg_features);
    const double coeff = sigmoid(neg - pos);
    for (std::size_t k = 0; k < kFeatureCount; ++k) grad[k] += coeff * (neg_features[k] - ex.positive[k]);
  }
}

}  // namespace

FeatureVector extract_features(const AnswerContext& ctx, Aspect aspect) {
  if (ctx.answer.empty()) return FeatureVector{};
  const DocIndex docs(ctx.docs);
  switch (aspect) {
    case Aspect::kFluency: return fluency_features(ctx, docs);
    case Aspect::kCorrectness: return correctness_features(ctx, docs);
    case Aspect::kCitation: return citation_features(ctx, docs);
  }
  return FeatureVector{};
}

std::span<const std::string_view> feature_names(Aspect aspect) {
  switch (aspect) {
    case Aspect::kFluency: return kFluencyNames;
    case Aspect::kCorrectness: return kCorrectnessNames;
    case Aspect::kCitation: return kCitationNames;
  }
  return kFluencyNames;
}

double clip_reward(double raw) { return std::min(kRewardClip, std::max(-kRewardClip, raw)); }

RewardScore score_features(const AspectHead& head, const FeatureVector& features, Aspect aspect) {
  const double raw = dot(head.weights, features) + head.bias;
  return RewardScore{aspect, raw, clip_reward(raw)};
}

RewardScore score_answer(const CriticParams& params, const AnswerContext& ctx, Aspect aspect) {
  return score_features(params.heads[aspect], extract_features(ctx, aspect), aspect);
}

double pairwise_ranking_loss(std::span<const double> pos_scores, std::span<const double> neg_scores) {
  if (pos_scores.empty() || neg_scores.empty())
    throw PreconditionError("pairwise ranking loss needs at least one positive and one negative score");
  double loss = 0.0;
  for (double pos : pos_scores)
    for (double neg : neg_scores) loss += softplus(neg - pos);
  return loss;
}

FeaturizedExample featurize(const CritiqueExample& example) {
  FeaturizedExample out;
  out.question_id = example.question.id;
  out.aspect = example.aspect;
  out.positive = extract_features({example.question, example.docs, example.positive}, example.aspect);
  for (std::size_t i = 0; i < 3; ++i)
    out.negatives[i] = extract_features({example.question, example.docs, example.negatives[i]}, example.aspect);
  return out;
}

double example_loss(const AspectHead& head, const FeaturizedExample& example) {
  const double pos = score_features(head, example.positive, example.aspect).raw;
  std::array<double, 3> neg{};
  for (std::size_t i = 0; i < 3; ++i) neg[i] = score_features(head, example.negatives[i], example.aspect).raw;
  return pairwise_ranking_loss(std::span<const double>(&pos, 1), neg);
}

CriticGradient loss_gradient(const CriticParams& params, const CritiqueExample& example) {
  CriticGradient grad;
  const auto featurized = featurize(example);
  accumulate_gradient(params.heads[example.aspect], featurized, grad[example.aspect].weights);
  return grad;
}

double pairwise_accuracy(const AspectHead& head, std::span<const FeaturizedExample> examples) {
  std::size_t pairs = 0;
  std::size_t correct = 0;
  for (const auto& ex : examples) {
    const double pos = dot(head.weights, ex.positive);
    for (const auto& neg : ex.negatives) {
      ++pairs;
      correct += pos > dot(head.weights, neg) ? 1 : 0;
    }
  }
  return ratio(correct, pairs);
}

TrainResult train_critic(std::span<const CritiqueExample> dataset, const TrainConfig& config) {
  if (dataset.empty()) throw TrainingError("training dataset is empty");
  if (config.epochs < 0 || !(config.rate > 0) || config.l2 < 0 || config.holdout_fraction < 0 ||
      config.holdout_fraction >= 1)
    throw TrainingError("invalid training configuration");

  // Question-level split shared by all aspects.
  std::vector<std::string> ids;
  for (const auto& ex : dataset) ids.push_back(ex.question.id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  Rng split_rng(mix_seed(config.seed, "split"));
  for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[split_rng.uniform_index(i)]);
  std::size_t n_holdout = static_cast<std::size_t>(std::llround(config.holdout_fraction * ids.size()));
  if (config.holdout_fraction > 0 && ids.size() >= 2) n_holdout = std::clamp<std::size_t>(n_holdout, 1, ids.size() - 1);
  if (ids.size() < 2) n_holdout = 0;
  const std::set<std::string> heldout_ids(ids.end() - static_cast<std::ptrdiff_t>(n_holdout), ids.end());

  TrainResult result;
  for (Aspect aspect : kAllAspects) {
    std::vector<FeaturizedExample> train;
    std::vector<FeaturizedExample> heldout;
    for (const auto& ex : dataset) {
      if (ex.aspect != aspect) continue;
      (heldout_ids.contains(ex.question.id) ? heldout : train).push_back(featurize(ex));
    }
    auto& report = result.report.aspects[aspect];
    report.train_examples = train.size();
    report.heldout_examples = heldout.size();
    if (train.empty()) continue;

    AspectHead& head = result.params.heads[aspect];
    Rng batch_rng(mix_seed(config.seed, aspect_name(aspect)));
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t batch = config.batch_size == 0 ? train.size() : std::min(config.batch_size, train.size());

    auto mean_loss = [&] {
      double total = 0.0;
      for (const auto& ex : train) total += example_loss(head, ex);
      return total / static_cast<double>(train.size());
    };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      const double loss = mean_loss();
      if (!std::isfinite(loss))
        throw TrainingError("non-finite loss for aspect '" + std::string(aspect_name(aspect)) + "' at epoch " +
                            std::to_string(epoch));
      report.epoch_loss.push_back(loss);
      if (batch < train.size())
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[batch_rng.uniform_index(i)]);
      for (std::size_t start = 0; start < order.size(); start += batch) {
        const std::size_t stop = std::min(order.size(), start + batch);
        FeatureVector grad{};
        for (std::size_t i = start; i < stop; ++i) accumulate_gradient(head, train[order[i]], grad);
        const double scale = 1.0 / static_cast<double>(stop - start);
        for (std::size_t k = 0; k < kFeatureCount; ++k)
          head.weights[k] -= config.rate * (grad[k] * scale + config.l2 * head.weights[k]);
      }
    }
    report.final_loss = mean_loss();
    if (!std::isfinite(report.final_loss))
      throw TrainingError("non-finite final loss for aspect '" + std::string(aspect_name(aspect)) + "'");
    report.train_accuracy = pairwise_accuracy(head, train);
    if (!heldout.empty()) report.heldout_accuracy = pairwise_accuracy(head, heldout);
  }
  return result;
}

CriticEvaluation evaluate_critic(const CriticParams& params, std::span<const CritiqueExample> dataset) {
  CriticEvaluation eval;
  PerAspect<std::vector<FeaturizedExample>> grouped;
  for (const auto& ex : dataset) grouped[ex.aspect].push_back(featurize(ex));
  for (Aspect aspect : kAllAspects) {
    const auto& examples = grouped[aspect];
    auto& out = eval[aspect];
    out.examples = examples.size();
    if (examples.empty()) continue;
    const auto& head = params.heads[aspect];
    out.pairwise_accuracy = pairwise_accuracy(head, examples);
    double pos_sum = 0.0;
    double neg_sum = 0.0;
    for (const auto& ex : examples) {
      pos_sum += score_features(head, ex.positive, aspect).clipped;
      for (const auto& neg : ex.negatives) neg_sum += score_features(head, neg, aspect).clipped;
    }
    out.avg_positive_reward = pos_sum / static_cast<double>(examples.size());
    out.avg_negative_reward = neg_sum / static_cast<double>(3 * examples.size());
  }
  return eval;
}

CriticParams read_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open params file: " + path);
  try {
    return critic_params_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

void write_params(const std::string& path, const CriticParams& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SchemaError("cannot write params file: " + path);
  out << to_json(params).dump(2) << '\n';
}

void write_training_report(const std::string& path, const TrainingReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SchemaError("cannot write training report: " + path);
  for (Aspect aspect : kAllAspects) {
    const auto& r = report.aspects[aspect];
    for (std::size_t e = 0; e < r.epoch_loss.size(); ++e) {
      nlohmann::json line = {{"kind", "epoch"}, {"aspect", aspect_name(aspect)}, {"epoch", e},
                             {"mean_loss", r.epoch_loss[e]}};
      out << line.dump() << '\n';
    }
    nlohmann::json summary = {{"kind", "summary"},
                              {"aspect", aspect_name(aspect)},
                              {"final_loss", r.final_loss},
                              {"train_examples", r.train_examples},
                              {"heldout_examples", r.heldout_examples},
                              {"train_accuracy", r.train_accuracy},
                              {"heldout_accuracy", r.heldout_accuracy ? nlohmann::json(*r.heldout_accuracy)
                                                                      : nlohmann::json(nullptr)}};
    out << summary.dump() << '\n';
  }
}

}  // namespace ifl
