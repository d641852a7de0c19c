#include "ifl/serialize.hpp"

#include <cmath>

#include "ifl/error.hpp"

namespace ifl {

const json& require(const json& j, const char* key) {
  if (!j.is_object()) throw SchemaError(std::string("expected an object containing '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_string()) throw SchemaError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

double require_number(const json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_number()) throw SchemaError(std::string("field '") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(std::string("field '") + key + "' must be finite");
  return d;
}

std::int64_t require_integer(const json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_number_integer()) throw SchemaError(std::string("field '") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

namespace {

const json& require_array(const json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_array()) throw SchemaError(std::string("field '") + key + "' must be an array");
  return v;
}

CitedAnswer answer_from(const json& v, const char* what) {
  if (!v.is_string()) throw SchemaError(std::string(what) + " must be a rendered answer string");
  return parse_cited_answer(normalize_marker_style(v.get<std::string>()));
}

GoldGroups gold_from(const json& j) {
  GoldGroups gold;
  for (const auto& group : require_array(j, "gold_aspects")) {
    if (!group.is_array() || group.empty())
      throw SchemaError("each gold_aspects group must be a non-empty array of strings");
    std::vector<std::string> members;
    for (const auto& m : group) {
      if (!m.is_string()) throw SchemaError("gold answers must be strings");
      members.push_back(m.get<std::string>());
    }
    gold.push_back(std::move(members));
  }
  return gold;
}

json gold_to(const GoldGroups& gold) {
  json out = json::array();
  for (const auto& g : gold) out.push_back(g);
  return out;
}

AspectHead head_from(const json& j) {
  AspectHead head;
  const auto& w = require_array(j, "weights");
  if (w.size() != kFeatureCount)
    throw SchemaError("weights must have " + std::to_string(kFeatureCount) + " entries");
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    if (!w[k].is_number() || !std::isfinite(w[k].get<double>())) throw SchemaError("weights must be finite numbers");
    head.weights[k] = w[k].get<double>();
  }
  head.bias = require_number(j, "bias");
  return head;
}

}  // namespace

json to_json(const Document& doc) { return {{"index", doc.index}, {"title", doc.title}, {"body", doc.body}}; }

json to_json(const DocumentSet& docs) {
  json out = json::array();
  for (const auto& d : docs) out.push_back(to_json(d));
  return out;
}

DocumentSet document_set_from_json(const json& j) {
  if (!j.is_array()) throw SchemaError("docs must be an array");
  std::vector<Document> docs;
  for (const auto& d : j) {
    const auto index = require_integer(d, "index");
    docs.push_back(Document{static_cast<int>(index), d.contains("title") ? require_string(d, "title") : "",
                            require_string(d, "body")});
  }
  try {
    return DocumentSet(std::move(docs));
  } catch (const PreconditionError& e) {
    throw SchemaError(e.what());
  }
}

json to_json(const CorpusRecord& r) {
  json out = {{"id", r.question.id},
              {"question", r.question.text},
              {"docs", to_json(r.docs)},
              {"gold_aspects", gold_to(r.question.gold_aspects)},
              {"answer", render_cited_answer(r.answer)}};
  if (r.long_answer) out["long_answer"] = *r.long_answer;
  return out;
}

CorpusRecord corpus_record_from_json(const json& j) {
  CorpusRecord r;
  r.question.id = require_string(j, "id");
  r.question.text = require_string(j, "question");
  r.question.gold_aspects = gold_from(j);
  r.docs = document_set_from_json(require(j, "docs"));
  r.answer = j.contains("answer") ? answer_from(j.at("answer"), "answer") : CitedAnswer{};
  if (j.contains("long_answer") && !j.at("long_answer").is_null())
    r.long_answer = require_string(j, "long_answer");
  return r;
}

json to_json(const CritiqueExample& e) {
  json negatives = json::array();
  for (const auto& n : e.negatives) negatives.push_back(render_cited_answer(n));
  return {{"id", e.question.id},
          {"aspect", aspect_name(e.aspect)},
          {"question", e.question.text},
          {"gold_aspects", gold_to(e.question.gold_aspects)},
          {"docs", to_json(e.docs)},
          {"positive", render_cited_answer(e.positive)},
          {"negatives", negatives}};
}

CritiqueExample critique_example_from_json(const json& j) {
  CritiqueExample e;
  e.question.id = require_string(j, "id");
  e.question.text = require_string(j, "question");
  e.question.gold_aspects = gold_from(j);
  e.aspect = aspect_from_name(require_string(j, "aspect"));
  e.docs = document_set_from_json(require(j, "docs"));
  e.positive = answer_from(require(j, "positive"), "positive");
  const auto& negs = require_array(j, "negatives");
  if (negs.size() != 3) throw SchemaError("negatives must hold exactly 3 answers");
  for (std::size_t i = 0; i < 3; ++i) e.negatives[i] = answer_from(negs[i], "negative");
  return e;
}

json to_json(const CriticParams& params) {
  json aspects = json::object();
  for (Aspect a : kAllAspects) {
    const auto& h = params.heads[a];
    aspects[std::string(aspect_name(a))] = {{"weights", h.weights}, {"bias", h.bias}};
  }
  return {{"version", CriticParams::kVersion}, {"aspects", aspects}};
}

CriticParams critic_params_from_json(const json& j) {
  const auto version = require_integer(j, "version");
  if (version != CriticParams::kVersion)
    throw SchemaError("unsupported params version " + std::to_string(version));
  const auto& aspects = require(j, "aspects");
  CriticParams params;
  for (Aspect a : kAllAspects) params.heads[a] = head_from(require(aspects, std::string(aspect_name(a)).c_str()));
  return params;
}

json to_json(const RewardScore& s) { return {{"raw", s.raw}, {"clipped", s.clipped}}; }

RewardScore reward_score_from_json(const json& j, Aspect aspect) {
  RewardScore s{aspect, require_number(j, "raw"), require_number(j, "clipped")};
  if (s.clipped != clip_reward(s.raw)) throw SchemaError("clipped reward does not match raw reward");
  return s;
}

json to_json(const FeedbackItem& item) {
  return {{"aspect", aspect_name(item.aspect)},
          {"band", band_name(item.band)},
          {"raw", item.score.raw},
          {"clipped", item.score.clipped},
          {"text", item.text}};
}

FeedbackItem feedback_item_from_json(const json& j) {
  FeedbackItem item;
  item.aspect = aspect_from_name(require_string(j, "aspect"));
  item.band = band_from_name(require_string(j, "band"));
  item.score = reward_score_from_json(j, item.aspect);
  item.text = require_string(j, "text");
  return item;
}

json to_json(const BandThresholds& t) {
  json out = json::object();
  for (Aspect a : kAllAspects)
    out[std::string(aspect_name(a))] = {{"avg_positive", t.per_aspect[a].avg_positive},
                                        {"avg_negative", t.per_aspect[a].avg_negative}};
  return out;
}

BandThresholds thresholds_from_json(const json& j) {
  BandThresholds t = BandThresholds::defaults();
  if (!j.is_object()) throw SchemaError("thresholds must be an object");
  for (Aspect a : kAllAspects) {
    const std::string name(aspect_name(a));
    if (!j.contains(name)) continue;
    const auto& entry = j.at(name);
    t.per_aspect[a] = {require_number(entry, "avg_positive"), require_number(entry, "avg_negative")};
  }
  return t;
}

json to_json(const MetricReport& r) {
  return {{"MAUVE", r.mauve ? json(*r.mauve) : json(nullptr)},
          {"EM Recall", r.em_recall},
          {"Citation Recall", r.citation_recall},
          {"Citation Precision", r.citation_precision},
          {"Length", r.mean_length}};
}

json to_json(const ItemMetrics& item) {
  return {{"id", item.id},
          {"em_recall", item.em_recall},
          {"citation_recall", item.citation_recall},
          {"citation_precision", item.citation_precision},
          {"length", item.length},
          {"zero_citations", item.zero_citations},
          {"missing_indices", item.missing_indices}};
}

}  // namespace ifl
