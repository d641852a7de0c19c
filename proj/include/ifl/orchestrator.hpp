#ifndef IFL_ORCHESTRATOR_HPP_
#define IFL_ORCHESTRATOR_HPP_

#include <chrono>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ifl/answer.hpp"
#include "ifl/critic.hpp"
#include "ifl/feedback.hpp"
#include "ifl/gateway.hpp"
#include "ifl/metrics.hpp"

// The generate -> score -> feedback -> refine loop.
namespace ifl {

struct IflConfig {
  int max_iterations = 2;
  bool early_stop_all_praise = true;
  std::uint64_t seed = 0;
  // Attempts after the first failed generator call.
  int generator_retries = 3;
  std::chrono::milliseconds retry_backoff{500};
  DecodeOptions decode;
  // Questions processed concurrently by run_ifl_batch.
  std::size_t parallelism = 1;

  void validate() const;
};

// In-context example shown with the base generation prompt.
struct OneShotExample {
  Question question;
  DocumentSet docs;
  CitedAnswer answer;
};

// Hand-written two-document example; identical to data/one_shot.json.
OneShotExample default_one_shot();
OneShotExample read_one_shot(const std::string& path);

struct IterationRecord {
  int index = 0;  // 0 is the base generation
  std::string prompt;
  CitedAnswer answer;
  PerAspect<RewardScore> scores;
  PerAspect<FeedbackItem> feedback;
  std::chrono::nanoseconds wall_time{0};
};

enum class StopReason { kMaxIterations, kAllPraise, kGeneratorError };

std::string_view stop_reason_name(StopReason reason);
StopReason stop_reason_from_name(std::string_view name);

struct IflRun {
  std::string question_id;
  std::vector<IterationRecord> records;
  CitedAnswer final_answer;
  StopReason stop_reason = StopReason::kMaxIterations;
  std::string error;  // last generator error, if any
};

// Iteration 0 sends the annotation prompt for positives plus the one-shot
// example; every later iteration sends the refinement prompt built from the
// previous answer and its feedback. Generator failures are retried with
// exponential backoff; when retries run out the run stops with
// kGeneratorError and keeps the last good answer (no records when the base
// generation itself failed).
IflRun run_ifl(const Question& question, const DocumentSet& docs, const Generator& generator,
               const CriticParams& critic, const BandThresholds& thresholds, const IflConfig& config,
               const OneShotExample& one_shot = default_one_shot());

// Runs every record's question with up to config.parallelism workers.
// on_complete is called in input order, once per run, from one thread at a
// time.
std::vector<IflRun> run_ifl_batch(std::span<const CorpusRecord> corpus, const Generator& generator,
                                  const CriticParams& critic, const BandThresholds& thresholds,
                                  const IflConfig& config, const OneShotExample& one_shot,
                                  const std::function<void(std::size_t, const IflRun&)>& on_complete = {});

// Run log: one JSON line per IterationRecord, without timing. Identical runs
// produce identical files. stop_reason appears on each run's last line.
std::string run_log_lines(const IflRun& run);
void write_run_log(const std::string& path, std::span<const IflRun> runs);
std::vector<IflRun> read_run_log(const std::string& path);

// Row labels: "Base", "IFL_1", "IFL_2", ...
std::string iteration_label(std::size_t iteration);

struct IterationReport {
  std::vector<MetricReport> rows;  // index = iteration
};

// One MetricReport per iteration index up to the longest run. Runs that
// stopped early contribute their last answer to later rows. Questions are
// looked up in corpus by id.
IterationReport aggregate_report(std::span<const IflRun> runs, std::span<const CorpusRecord> corpus,
                                 const EntailmentJudge& judge, const Embedder& embedder,
                                 std::span<const std::string> references, const MauveConfig& mauve = {});

// Columns: MAUVE, EM Recall, Citation Recall, Citation Precision, Length.
std::span<const std::string_view> report_columns();
std::string render_report_table(const IterationReport& report);

}  // namespace ifl

#endif  // IFL_ORCHESTRATOR_HPP_
