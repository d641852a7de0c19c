#ifndef IFL_SERIALIZE_HPP_
#define IFL_SERIALIZE_HPP_

#include <json.hpp>

#include "ifl/answer.hpp"
#include "ifl/corpus.hpp"
#include "ifl/critic.hpp"
#include "ifl/feedback.hpp"
#include "ifl/metrics.hpp"

// JSON forms of the file formats. *_from_json functions validate field
// presence and types and throw SchemaError on mismatch.
namespace ifl {

using nlohmann::json;

json to_json(const Document& doc);
json to_json(const DocumentSet& docs);
json to_json(const CorpusRecord& record);
json to_json(const CritiqueExample& example);
json to_json(const CriticParams& params);
json to_json(const RewardScore& score);
json to_json(const FeedbackItem& item);
json to_json(const BandThresholds& thresholds);
json to_json(const MetricReport& report);
json to_json(const ItemMetrics& item);

DocumentSet document_set_from_json(const json& j);
CorpusRecord corpus_record_from_json(const json& j);
CritiqueExample critique_example_from_json(const json& j);
CriticParams critic_params_from_json(const json& j);
RewardScore reward_score_from_json(const json& j, Aspect aspect);
FeedbackItem feedback_item_from_json(const json& j);
BandThresholds thresholds_from_json(const json& j);

// Typed field access with a SchemaError naming the field.
const json& require(const json& j, const char* key);
std::string require_string(const json& j, const char* key);
double require_number(const json& j, const char* key);
std::int64_t require_integer(const json& j, const char* key);

}  // namespace ifl

#endif  // IFL_SERIALIZE_HPP_
