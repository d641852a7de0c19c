#include "ifl/orchestrator.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "ifl/corpus.hpp"
#include "ifl/error.hpp"
#include "ifl/serialize.hpp"
#include "ifl/text.hpp"

namespace ifl {

void IflConfig::validate() const {
  if (max_iterations < 1) throw PreconditionError("max_iterations must be >= 1");
  if (generator_retries < 0) throw PreconditionError("generator_retries must be >= 0");
  if (retry_backoff.count() < 0) throw PreconditionError("retry_backoff must be >= 0");
}

OneShotExample default_one_shot() {
  OneShotExample ex;
  ex.question = {"one-shot", "Who designed the Harbor Bridge and when did it open?", {{"Mara Quell"}, {"1932"}}};
  ex.docs = DocumentSet({
      {1, "Harbor Bridge",
       "The Harbor Bridge was designed by engineer Mara Quell. It carries six lanes of traffic across the bay."},
      {2, "Harbor Bridge history", "The Harbor Bridge opened to traffic in 1932 after six years of construction."},
  });
  ex.answer = parse_cited_answer(
      "The Harbor Bridge was designed by engineer Mara Quell [1]. It opened to traffic in 1932 after six years of "
      "construction [2].");
  return ex;
}

OneShotExample read_one_shot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open one-shot file: " + path);
  try {
    auto record = corpus_record_from_json(json::parse(in));
    if (record.answer.empty()) throw SchemaError("one-shot example needs an answer");
    return OneShotExample{std::move(record.question), std::move(record.docs), std::move(record.answer)};
  } catch (const json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

std::string_view stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::kMaxIterations: return "max_iterations";
    case StopReason::kAllPraise: return "all_praise";
    case StopReason::kGeneratorError: return "generator_error";
  }
  return "max_iterations";
}

StopReason stop_reason_from_name(std::string_view name) {
  for (StopReason r : {StopReason::kMaxIterations, StopReason::kAllPraise, StopReason::kGeneratorError})
    if (stop_reason_name(r) == name) return r;
  throw SchemaError("unknown stop reason: " + std::string(name));
}

namespace {

std::optional<std::string> generate_with_retries(const Generator& generator, const GenerationRequest& request,
                                                 const IflConfig& config, std::string& error) {
  for (int attempt = 0; attempt <= config.generator_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config.retry_backoff * (1LL << std::min(attempt - 1, 20)));
    try {
      return generator.generate(request);
    } catch (const GeneratorError& e) {
      error = e.what();
    }
  }
  return std::nullopt;
}

}  // namespace

IflRun run_ifl(const Question& question, const DocumentSet& docs, const Generator& generator,
               const CriticParams& critic, const BandThresholds& thresholds, const IflConfig& config,
               const OneShotExample& one_shot) {
  config.validate();
  thresholds.validate();
  if (docs.empty()) throw PreconditionError("run_ifl needs at least one document");

  IflRun run;
  run.question_id = question.id;
  const InContextExample example{build_aspect_prompt(PromptKind::kPositive, one_shot.question, one_shot.docs),
                                 render_cited_answer(one_shot.answer)};
  std::string prompt = build_aspect_prompt(PromptKind::kPositive, question, docs);

  for (int iteration = 0; iteration <= config.max_iterations; ++iteration) {
    GenerationRequest request{"", prompt, std::nullopt, config.decode};
    if (iteration == 0) request.in_context = example;
    const auto started = std::chrono::steady_clock::now();
    const auto output = generate_with_retries(generator, request, config, run.error);
    if (!output) {
      run.stop_reason = StopReason::kGeneratorError;
      break;
    }

    IterationRecord record;
    record.index = iteration;
    record.prompt = prompt;
    record.answer = parse_cited_answer(normalize_marker_style(*output));
    const AnswerContext ctx{question, docs, record.answer};
    bool all_praise = true;
    std::vector<FeedbackItem> items;
    for (Aspect aspect : kAllAspects) {
      record.scores[aspect] = score_answer(critic, ctx, aspect);
      record.feedback[aspect] = make_feedback(record.scores[aspect], thresholds);
      all_praise = all_praise && record.feedback[aspect].band == Band::kPraise;
      items.push_back(record.feedback[aspect]);
    }
    record.wall_time = std::chrono::steady_clock::now() - started;
    run.records.push_back(std::move(record));

    if (config.early_stop_all_praise && all_praise) {
      run.stop_reason = StopReason::kAllPraise;
      break;
    }
    if (iteration == config.max_iterations) {
      run.stop_reason = StopReason::kMaxIterations;
      break;
    }
    prompt = build_refinement_prompt(question, docs, run.records.back().answer, items);
  }
  if (!run.records.empty()) run.final_answer = run.records.back().answer;
  return run;
}

std::vector<IflRun> run_ifl_batch(std::span<const CorpusRecord> corpus, const Generator& generator,
                                  const CriticParams& critic, const BandThresholds& thresholds,
                                  const IflConfig& config, const OneShotExample& one_shot,
                                  const std::function<void(std::size_t, const IflRun&)>& on_complete) {
  config.validate();
  std::vector<IflRun> runs(corpus.size());
  std::vector<bool> done(corpus.size(), false);
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t next_to_emit = 0;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= corpus.size()) return;
      try {
        IflRun run = run_ifl(corpus[i].question, corpus[i].docs, generator, critic, thresholds, config, one_shot);
        std::lock_guard lock(mu);
        runs[i] = std::move(run);
        done[i] = true;
        while (next_to_emit < runs.size() && done[next_to_emit]) {
          if (on_complete) on_complete(next_to_emit, runs[next_to_emit]);
          ++next_to_emit;
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next.store(corpus.size());
        return;
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(config.parallelism, 1, std::max<std::size_t>(1, corpus.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return runs;
}

std::string run_log_lines(const IflRun& run) {
  std::string out;
  auto stop_value = [&](bool last) { return last ? json(stop_reason_name(run.stop_reason)) : json(nullptr); };
  if (run.records.empty()) {
    json line = {{"question_id", run.question_id}, {"iteration", nullptr}, {"stop_reason", stop_value(true)}};
    if (!run.error.empty()) line["error"] = run.error;
    return line.dump() + "\n";
  }
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    const auto& r = run.records[i];
    const bool last = i + 1 == run.records.size();
    json scores = json::object();
    json feedback = json::array();
    for (Aspect a : kAllAspects) {
      scores[std::string(aspect_name(a))] = to_json(r.scores[a]);
      feedback.push_back(to_json(r.feedback[a]));
    }
    json line = {{"question_id", run.question_id},
                 {"iteration", r.index},
                 {"prompt", r.prompt},
                 {"answer", render_cited_answer(r.answer)},
                 {"scores", scores},
                 {"feedback", feedback},
                 {"stop_reason", stop_value(last)}};
    if (last && !run.error.empty()) line["error"] = run.error;
    out += line.dump();
    out += '\n';
  }
  return out;
}

void write_run_log(const std::string& path, std::span<const IflRun> runs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SchemaError("cannot write run log: " + path);
  for (const auto& run : runs) out << run_log_lines(run);
}

std::vector<IflRun> read_run_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open run log: " + path);
  std::vector<IflRun> runs;
  std::map<std::string, std::size_t> by_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::collapse_whitespace(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      const std::string id = require_string(j, "question_id");
      auto [it, inserted] = by_id.try_emplace(id, runs.size());
      if (inserted) {
        runs.emplace_back();
        runs.back().question_id = id;
      }
      IflRun& run = runs[it->second];
      const auto& iteration = require(j, "iteration");
      if (!iteration.is_null()) {
        IterationRecord r;
        r.index = static_cast<int>(require_integer(j, "iteration"));
        if (r.index != static_cast<int>(run.records.size()))
          throw SchemaError("iterations of a run must be consecutive from 0");
        r.prompt = require_string(j, "prompt");
        r.answer = parse_cited_answer(require_string(j, "answer"));
        const auto& scores = require(j, "scores");
        for (Aspect a : kAllAspects)
          r.scores[a] = reward_score_from_json(require(scores, std::string(aspect_name(a)).c_str()), a);
        const auto& feedback = require(j, "feedback");
        if (!feedback.is_array() || feedback.size() != 3) throw SchemaError("feedback must hold 3 items");
        PerAspect<bool> seen{};
        for (const auto& f : feedback) {
          auto item = feedback_item_from_json(f);
          if (seen[item.aspect]) throw SchemaError("duplicate feedback aspect");
          seen[item.aspect] = true;
          r.feedback[item.aspect] = std::move(item);
        }
        run.records.push_back(std::move(r));
        run.final_answer = run.records.back().answer;
      }
      const auto& stop = require(j, "stop_reason");
      if (!stop.is_null()) run.stop_reason = stop_reason_from_name(require_string(j, "stop_reason"));
      if (j.contains("error")) run.error = require_string(j, "error");
    } catch (const std::exception& e) {
      throw SchemaError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return runs;
}

std::string iteration_label(std::size_t iteration) {
  return iteration == 0 ? "Base" : "IFL_" + std::to_string(iteration);
}

IterationReport aggregate_report(std::span<const IflRun> runs, std::span<const CorpusRecord> corpus,
                                 const EntailmentJudge& judge, const Embedder& embedder,
                                 std::span<const std::string> references, const MauveConfig& mauve) {
  if (runs.empty()) throw PreconditionError("aggregate_report needs at least one run");
  std::map<std::string, const CorpusRecord*> lookup;
  for (const auto& r : corpus) lookup[r.question.id] = &r;
  std::size_t rows = 1;
  for (const auto& run : runs) rows = std::max(rows, run.records.size());

  const CitedAnswer empty_answer;
  IterationReport report;
  for (std::size_t it = 0; it < rows; ++it) {
    std::vector<EvalItem> items;
    for (const auto& run : runs) {
      auto found = lookup.find(run.question_id);
      if (found == lookup.end()) throw PreconditionError("run for unknown question id '" + run.question_id + "'");
      const CitedAnswer& answer =
          run.records.empty() ? empty_answer : run.records[std::min(it, run.records.size() - 1)].answer;
      items.push_back(EvalItem{found->second->question, found->second->docs, answer});
    }
    report.rows.push_back(evaluate_corpus(items, judge, embedder, references, mauve).report);
  }
  return report;
}

std::span<const std::string_view> report_columns() {
  static constexpr std::array<std::string_view, 5> kColumns = {"MAUVE", "EM Recall", "Citation Recall",
                                                               "Citation Precision", "Length"};
  return kColumns;
}

std::string render_report_table(const IterationReport& report) {
  auto cell = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header = {"Model"};
  for (auto c : report_columns()) header.emplace_back(c);
  table.push_back(header);
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    table.push_back({iteration_label(i), r.mauve ? cell(100.0 * *r.mauve) : "n/a", cell(100.0 * r.em_recall),
                     cell(100.0 * r.citation_recall), cell(100.0 * r.citation_precision), cell(r.mean_length)});
  }
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : table)
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  std::string out;
  for (std::size_t r = 0; r < table.size(); ++r) {
    for (std::size_t c = 0; c < table[r].size(); ++c) {
      if (c > 0) out += " | ";
      std::string value = table[r][c];
      value.resize(widths[c], ' ');
      out += value;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
    if (r == 0) {
      for (std::size_t c = 0; c < widths.size(); ++c) {
        if (c > 0) out += "-+-";
        out += std::string(widths[c], '-');
      }
      out += '\n';
    }
  }
  return out;
}

}  // namespace ifl
