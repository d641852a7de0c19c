#include "ifl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "ifl/error.hpp"
#include "ifl/random.hpp"
#include "ifl/text.hpp"

namespace ifl {

bool lexical_entailment_judge(std::string_view premise, std::string_view hypothesis) {
  const auto hyp_content = text::content_words(hypothesis);
  if (hyp_content.empty()) return false;
  const auto premise_tokens = text::tokenize(premise);
  const std::unordered_set<std::string> premise_set(premise_tokens.begin(), premise_tokens.end());
  std::size_t hit = 0;
  for (const auto& w : hyp_content) hit += premise_set.contains(w) ? 1 : 0;
  // hit / total >= 0.8, in integers.
  if (hit * 5 < hyp_content.size() * 4) return false;
  for (const auto& t : text::tokenize(hypothesis))
    if (text::is_numeric_token(t) && !premise_set.contains(t)) return false;
  return true;
}

double em_recall(const CitedAnswer& answer, const GoldGroups& gold_aspects) {
  if (gold_aspects.empty()) throw PreconditionError("EM recall needs at least one gold group");
  const std::string normalized = text::normalize_answer(plain_text(answer));
  std::size_t matched = 0;
  for (const auto& group : gold_aspects) {
    const bool hit = std::any_of(group.begin(), group.end(), [&](const std::string& gold) {
      const std::string g = text::normalize_answer(gold);
      return !g.empty() && normalized.find(g) != std::string::npos;
    });
    matched += hit ? 1 : 0;
  }
  return static_cast<double>(matched) / static_cast<double>(gold_aspects.size());
}

namespace {

// Cited documents concatenated in ascending index order; missing indices add
// nothing.
std::string premise_for(const std::set<int>& cited, const DocumentSet& docs, int skip = 0) {
  std::string premise;
  for (int c : cited) {
    if (c == skip) continue;
    const Document* d = docs.find(c);
    if (d == nullptr) continue;
    if (!premise.empty()) premise.push_back('\n');
    premise += document_text(*d);
  }
  return premise;
}

bool set_entails(const std::set<int>& cited, const DocumentSet& docs, const EntailmentJudge& judge,
                 std::string_view hypothesis, int skip = 0) {
  const bool any = std::any_of(cited.begin(), cited.end(), [&](int c) { return c != skip; });
  if (!any) return false;
  return judge.entails(premise_for(cited, docs, skip), hypothesis);
}

}  // namespace

CitationScores citation_scores(const CitedAnswer& answer, const DocumentSet& docs,
                               const EntailmentJudge& judge) {
  CitationScores out;
  out.sentences = answer.sentences.size();
  for (const auto& s : answer.sentences) {
    for (int c : s.citations)
      if (!docs.contains(c)) out.missing_indices.push_back(c);
    out.citations += s.citations.size();
    if (s.citations.empty()) continue;
    if (!set_entails(s.citations, docs, judge, s.text)) continue;
    ++out.supported_sentences;
    if (s.citations.size() == 1) {
      ++out.relevant_citations;
      continue;
    }
    for (int c : s.citations) {
      const bool alone = set_entails({c}, docs, judge, s.text);
      if (alone || !set_entails(s.citations, docs, judge, s.text, c)) ++out.relevant_citations;
    }
  }
  std::sort(out.missing_indices.begin(), out.missing_indices.end());
  out.missing_indices.erase(std::unique(out.missing_indices.begin(), out.missing_indices.end()),
                            out.missing_indices.end());
  if (out.sentences > 0)
    out.recall = static_cast<double>(out.supported_sentences) / static_cast<double>(out.sentences);
  out.zero_citations = out.citations == 0;
  if (!out.zero_citations)
    out.precision = static_cast<double>(out.relevant_citations) / static_cast<double>(out.citations);
  return out;
}

double citation_recall(const CitedAnswer& answer, const DocumentSet& docs, const EntailmentJudge& judge) {
  return citation_scores(answer, docs, judge).recall;
}

double citation_precision(const CitedAnswer& answer, const DocumentSet& docs, const EntailmentJudge& judge) {
  return citation_scores(answer, docs, judge).precision;
}

namespace {

using Point = std::vector<double>;

double squared_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

// k-means++ seeding followed by Lloyd iterations. Returns cluster ids.
std::vector<std::size_t> kmeans(const std::vector<Point>& points, std::size_t k, const MauveConfig& config) {
  Rng rng(mix_seed(config.seed, "kmeans"));
  std::vector<Point> centers;
  centers.push_back(points[rng.uniform_index(points.size())]);
  std::vector<double> nearest(points.size(), std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points[i], centers.back()));
      total += nearest[i];
    }
    if (total <= 0.0) break;  // fewer distinct points than clusters
    double target = rng.uniform01() * total;
    std::size_t pick = points.size() - 1;
    for (std::size_t i = 0; i < points.size(); ++i) {
      target -= nearest[i];
      if (target < 0.0 && nearest[i] > 0.0) {
        pick = i;
        break;
      }
    }
    centers.push_back(points[pick]);
  }

  std::vector<std::size_t> assign(points.size(), 0);
  const std::size_t dim = points.front().size();
  for (int iter = 0; iter < config.kmeans_iterations; ++iter) {
    bool changed = iter == 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      std::size_t best = 0;
      double best_d = squared_distance(points[i], centers[0]);
      for (std::size_t c = 1; c < centers.size(); ++c) {
        const double d = squared_distance(points[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[i] != best) changed = true;
      assign[i] = best;
    }
    if (!changed) break;
    std::vector<Point> sums(centers.size(), Point(dim, 0.0));
    std::vector<std::size_t> counts(centers.size(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      ++counts[assign[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[assign[i]][d] += points[i][d];
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) centers[c][d] = sums[c][d] / static_cast<double>(counts[c]);
    }
  }
  return assign;
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& r) {
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) kl += p[i] * std::log(p[i] / r[i]);
  return std::max(0.0, kl);
}

}  // namespace

double mauve_from_embeddings(std::span<const std::vector<double>> model,
                             std::span<const std::vector<double>> reference, const MauveConfig& config) {
  if (model.size() < 2 || reference.size() < 2)
    throw PreconditionError("MAUVE needs at least two texts on each side");
  const std::size_t dim = model.front().size();
  std::vector<Point> joint;
  for (const auto& v : model) joint.push_back(v);
  for (const auto& v : reference) joint.push_back(v);
  for (const auto& v : joint)
    if (v.size() != dim || dim == 0) throw PreconditionError("MAUVE embeddings must share a non-zero dimension");

  const std::size_t k = std::max<std::size_t>(1, std::min(config.max_clusters, joint.size() / 2));
  const auto assign = kmeans(joint, k, config);

  std::vector<double> p(k, 0.0);
  std::vector<double> q(k, 0.0);
  for (std::size_t i = 0; i < model.size(); ++i) p[assign[i]] += 1.0;
  for (std::size_t i = 0; i < reference.size(); ++i) q[assign[model.size() + i]] += 1.0;
  const double eps = config.epsilon;
  const double norm_p = static_cast<double>(model.size()) * (1.0 + eps * static_cast<double>(k));
  const double norm_q = static_cast<double>(reference.size()) * (1.0 + eps * static_cast<double>(k));
  for (std::size_t c = 0; c < k; ++c) {
    p[c] = (p[c] + eps * static_cast<double>(model.size())) / norm_p;
    q[c] = (q[c] + eps * static_cast<double>(reference.size())) / norm_q;
  }

  // Divergence curve with the extreme points (0, 1) and (1, 0).
  std::vector<std::pair<double, double>> curve = {{0.0, 1.0}, {1.0, 0.0}};
  const std::size_t grid = config.lambda_points;
  std::vector<double> r(k);
  for (std::size_t i = 1; i <= grid; ++i) {
    const double lambda = static_cast<double>(i) / static_cast<double>(grid + 1);
    for (std::size_t c = 0; c < k; ++c) r[c] = lambda * p[c] + (1.0 - lambda) * q[c];
    curve.emplace_back(std::exp(-config.c_scale * kl_divergence(q, r)),
                       std::exp(-config.c_scale * kl_divergence(p, r)));
  }
  // Equal x: higher y first, so the curve runs from (0, 1) down to (1, 0).
  std::sort(curve.begin(), curve.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  });
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    area += (curve[i].first - curve[i - 1].first) * (curve[i].second + curve[i - 1].second) / 2.0;
  return std::clamp(area, 0.0, 1.0);
}

double mauve_score(std::span<const std::string> model_texts, std::span<const std::string> reference_texts,
                   const Embedder& embedder, const MauveConfig& config) {
  if (model_texts.size() < 2 || reference_texts.size() < 2)
    throw PreconditionError("MAUVE needs at least two texts on each side");
  const auto model = embedder.embed(model_texts);
  const auto reference = embedder.embed(reference_texts);
  return mauve_from_embeddings(model, reference, config);
}

CorpusEvaluation evaluate_corpus(std::span<const EvalItem> runs, const EntailmentJudge& judge,
                                 const Embedder& embedder, std::span<const std::string> references,
                                 const MauveConfig& mauve) {
  if (runs.empty()) throw PreconditionError("evaluate_corpus needs at least one run");
  CorpusEvaluation out;
  std::vector<std::string> model_texts;
  double em_sum = 0.0;
  double recall_sum = 0.0;
  double precision_sum = 0.0;
  double length_sum = 0.0;
  for (const auto& run : runs) {
    ItemMetrics item;
    item.id = run.question.id;
    item.em_recall = em_recall(run.answer, run.question.gold_aspects);
    const auto cs = citation_scores(run.answer, run.docs, judge);
    item.citation_recall = cs.recall;
    item.citation_precision = cs.precision;
    item.zero_citations = cs.zero_citations;
    item.missing_indices = cs.missing_indices;
    model_texts.push_back(plain_text(run.answer));
    item.length = static_cast<double>(text::split_words(model_texts.back()).size());
    em_sum += item.em_recall;
    recall_sum += item.citation_recall;
    precision_sum += item.citation_precision;
    length_sum += item.length;
    out.items.push_back(std::move(item));
  }
  const double n = static_cast<double>(runs.size());
  out.report.items = runs.size();
  out.report.em_recall = em_sum / n;
  out.report.citation_recall = recall_sum / n;
  out.report.citation_precision = precision_sum / n;
  out.report.mean_length = length_sum / n;
  if (model_texts.size() >= 2 && references.size() >= 2)
    out.report.mauve = mauve_score(model_texts, references, embedder, mauve);
  return out;
}

}  // namespace ifl
