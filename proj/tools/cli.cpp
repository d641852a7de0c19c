#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "ifl/corpus.hpp"
#include "ifl/critic.hpp"
#include "ifl/error.hpp"
#include "ifl/feedback.hpp"
#include "ifl/gateway.hpp"
#include "ifl/metrics.hpp"
#include "ifl/mock.hpp"
#include "ifl/orchestrator.hpp"
#include "ifl/serialize.hpp"
#include "ifl/synthetic.hpp"

namespace ifl::cli {
namespace {

namespace fs = std::filesystem;

class MissingFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw MissingFileError("missing file: " + path);
}

json load_json_file(const std::string& path) {
  require_file(path);
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void check(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("output failed validation: " + what);
}

std::string fixed(double v, int digits = 2) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.resize(width, ' ');
  return s;
}

// ---- configuration --------------------------------------------------------

struct GeneratorSettings {
  std::string kind = "mock";
  ClientConfig client;
  MockMode mock_mode = MockMode::kResponsive;
  bool strict = true;
  bool degrade = true;
};

struct EmbedderSettings {
  std::string kind = "stub";
  ClientConfig client;
  std::size_t dimension = 16;
  std::uint64_t seed = 0;
};

struct RunConfig {
  GeneratorSettings generator;
  EmbedderSettings embedder;
  IflConfig ifl;
  BandThresholds thresholds = BandThresholds::defaults();
  std::optional<std::string> one_shot;
  MauveConfig mauve;
};

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool found = false;
    for (const char* k : known) found = found || key == k;
    if (!found) throw SchemaError("unknown key '" + key + "' in " + where);
  }
}

ClientConfig client_from_json(const json& j, ClientConfig c) {
  if (j.contains("endpoint")) c.endpoint = require_string(j, "endpoint");
  if (j.contains("model")) c.model = require_string(j, "model");
  if (j.contains("api_key_env")) c.api_key_env = require_string(j, "api_key_env");
  if (j.contains("timeout_ms")) c.timeout = std::chrono::milliseconds(require_integer(j, "timeout_ms"));
  if (j.contains("retries")) c.retries = static_cast<int>(require_integer(j, "retries"));
  if (j.contains("backoff_ms")) c.backoff_base = std::chrono::milliseconds(require_integer(j, "backoff_ms"));
  if (j.contains("max_in_flight")) c.max_in_flight = static_cast<int>(require_integer(j, "max_in_flight"));
  if (j.contains("requests_per_second")) c.requests_per_second = require_number(j, "requests_per_second");
  return c;
}

std::string resolve(const std::string& base_file, const std::string& path) {
  fs::path p(path);
  if (p.is_absolute() || base_file.empty()) return path;
  return (fs::path(base_file).parent_path() / p).string();
}

RunConfig parse_config(const json& j, const std::string& path) {
  RunConfig cfg;
  reject_unknown(j, {"generator", "embedder", "ifl", "thresholds", "one_shot", "mauve"}, "config");

  if (j.contains("generator")) {
    const auto& g = j.at("generator");
    reject_unknown(g,
                   {"kind", "endpoint", "model", "api_key_env", "timeout_ms", "retries", "backoff_ms",
                    "max_in_flight", "requests_per_second", "mock_mode", "strict", "degrade"},
                   "generator");
    if (g.contains("kind")) cfg.generator.kind = require_string(g, "kind");
    if (cfg.generator.kind != "mock" && cfg.generator.kind != "chat")
      throw SchemaError("generator.kind must be 'mock' or 'chat'");
    cfg.generator.client = client_from_json(g, cfg.generator.client);
    if (g.contains("mock_mode")) {
      const std::string mode = require_string(g, "mock_mode");
      if (mode == "responsive") cfg.generator.mock_mode = MockMode::kResponsive;
      else if (mode == "echo") cfg.generator.mock_mode = MockMode::kEcho;
      else throw SchemaError("generator.mock_mode must be 'responsive' or 'echo'");
    }
    if (g.contains("strict")) cfg.generator.strict = require(g, "strict").get<bool>();
    if (g.contains("degrade")) cfg.generator.degrade = require(g, "degrade").get<bool>();
  }
  if (j.contains("embedder")) {
    const auto& e = j.at("embedder");
    reject_unknown(e,
                   {"kind", "endpoint", "model", "api_key_env", "timeout_ms", "retries", "backoff_ms",
                    "max_in_flight", "requests_per_second", "dimension", "seed"},
                   "embedder");
    if (e.contains("kind")) cfg.embedder.kind = require_string(e, "kind");
    if (cfg.embedder.kind != "stub" && cfg.embedder.kind != "remote")
      throw SchemaError("embedder.kind must be 'stub' or 'remote'");
    cfg.embedder.client = client_from_json(e, cfg.embedder.client);
    if (e.contains("dimension")) cfg.embedder.dimension = static_cast<std::size_t>(require_integer(e, "dimension"));
    if (e.contains("seed")) cfg.embedder.seed = static_cast<std::uint64_t>(require_integer(e, "seed"));
  }
  if (j.contains("ifl")) {
    const auto& f = j.at("ifl");
    reject_unknown(f,
                   {"max_iterations", "early_stop_all_praise", "seed", "generator_retries", "retry_backoff_ms",
                    "temperature", "max_tokens", "parallelism"},
                   "ifl");
    auto& c = cfg.ifl;
    if (f.contains("max_iterations")) c.max_iterations = static_cast<int>(require_integer(f, "max_iterations"));
    if (f.contains("early_stop_all_praise")) c.early_stop_all_praise = require(f, "early_stop_all_praise").get<bool>();
    if (f.contains("seed")) c.seed = static_cast<std::uint64_t>(require_integer(f, "seed"));
    if (f.contains("generator_retries")) c.generator_retries = static_cast<int>(require_integer(f, "generator_retries"));
    if (f.contains("retry_backoff_ms"))
      c.retry_backoff = std::chrono::milliseconds(require_integer(f, "retry_backoff_ms"));
    if (f.contains("temperature")) c.decode.temperature = require_number(f, "temperature");
    if (f.contains("max_tokens")) c.decode.max_tokens = static_cast<int>(require_integer(f, "max_tokens"));
    if (f.contains("parallelism")) c.parallelism = static_cast<std::size_t>(require_integer(f, "parallelism"));
  }
  if (j.contains("thresholds")) {
    const auto& t = j.at("thresholds");
    cfg.thresholds = t.is_string() ? read_thresholds(resolve(path, t.get<std::string>())) : thresholds_from_json(t);
  }
  if (j.contains("one_shot")) cfg.one_shot = resolve(path, require_string(j, "one_shot"));
  if (j.contains("mauve")) {
    const auto& m = j.at("mauve");
    reject_unknown(m, {"max_clusters", "c_scale", "seed"}, "mauve");
    if (m.contains("max_clusters")) cfg.mauve.max_clusters = static_cast<std::size_t>(require_integer(m, "max_clusters"));
    if (m.contains("c_scale")) cfg.mauve.c_scale = require_number(m, "c_scale");
    if (m.contains("seed")) cfg.mauve.seed = static_cast<std::uint64_t>(require_integer(m, "seed"));
  }
  cfg.ifl.validate();
  cfg.thresholds.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  const json j = load_json_file(path);
  try {
    return parse_config(j, path);
  } catch (const json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

std::unique_ptr<Generator> make_generator(const GeneratorSettings& g, std::span<const CorpusRecord> corpus,
                                          std::uint64_t seed) {
  if (g.kind == "chat") {
    g.client.validate();
    return std::make_unique<ChatClient>(g.client);
  }
  MockScript script = script_from_corpus(corpus, g.mock_mode, g.degrade, seed);
  script.strict = g.strict;
  return std::make_unique<MockGenerator>(std::move(script));
}

std::unique_ptr<Embedder> make_embedder(const EmbedderSettings& e) {
  if (e.kind == "remote") {
    e.client.validate();
    return std::make_unique<EmbeddingClient>(e.client);
  }
  return std::make_unique<StubEmbedder>(e.dimension, e.seed);
}

// ---- subcommands ----------------------------------------------------------

struct BuildCorpusArgs {
  std::string in, out, mode = "deterministic", config;
  std::uint64_t seed = 0;
};

int build_corpus(const BuildCorpusArgs& a, std::ostream& out) {
  require_file(a.in);
  const auto corpus = read_corpus(a.in);
  std::vector<CritiqueExample> examples;
  if (a.mode == "deterministic") {
    examples = build_deterministic_critique_set(corpus, a.seed);
  } else {
    const RunConfig cfg = load_config(a.config);
    auto generator = make_generator(cfg.generator, corpus, a.seed);
    examples = build_llm_critique_set(corpus, *generator, cfg.ifl.decode, a.seed);
  }
  write_critique_set(a.out, examples);
  check(read_critique_set(a.out) == examples, a.out);
  out << "wrote " << examples.size() << " critique examples for " << corpus.size() << " questions to " << a.out
      << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string data, out, report;
  TrainConfig train;
};

int train(const TrainArgs& a, std::ostream& out) {
  require_file(a.data);
  const auto examples = read_critique_set(a.data);
  const TrainResult result = train_critic(examples, a.train);
  write_params(a.out, result.params);
  check(read_params(a.out) == result.params, a.out);
  if (!a.report.empty()) write_training_report(a.report, result.report);
  for (Aspect aspect : kAllAspects) {
    const auto& r = result.report.aspects[aspect];
    out << pad(std::string(aspect_title(aspect)), 12) << " loss " << fixed(r.final_loss, 4) << "  train acc "
        << fixed(100.0 * r.train_accuracy);
    if (r.heldout_accuracy) out << "  held-out acc " << fixed(100.0 * *r.heldout_accuracy);
    out << "\n";
  }
  return kExitOk;
}

struct EvalArgs {
  std::string data, params, thresholds_out;
};

int eval(const EvalArgs& a, std::ostream& out) {
  require_file(a.data);
  require_file(a.params);
  const auto examples = read_critique_set(a.data);
  const auto params = read_params(a.params);
  const CriticEvaluation ev = evaluate_critic(params, examples);

  const std::size_t w0 = 31, w1 = 12;
  out << pad("Metric", w0) << " | " << pad("Aspect", w1) << " | Value\n";
  out << std::string(w0, '-') << "-+-" << std::string(w1, '-') << "-+-" << std::string(15, '-') << "\n";
  for (Aspect aspect : kAllAspects)
    out << pad("Accuracy (%)", w0) << " | " << pad(std::string(aspect_title(aspect)), w1) << " | "
        << fixed(100.0 * ev[aspect].pairwise_accuracy) << "\n";
  for (Aspect aspect : kAllAspects)
    out << pad("Avg Reward (positive/negative)", w0) << " | " << pad(std::string(aspect_title(aspect)), w1) << " | "
        << fixed(ev[aspect].avg_positive_reward) << " / " << fixed(ev[aspect].avg_negative_reward) << "\n";

  if (!a.thresholds_out.empty()) {
    const BandThresholds t = thresholds_from_evaluation(ev);
    write_thresholds(a.thresholds_out, t);
    check(read_thresholds(a.thresholds_out) == t, a.thresholds_out);
  }
  return kExitOk;
}

struct ScoreArgs {
  std::string params, question_file, thresholds, config;
};

int score(const ScoreArgs& a, std::ostream& out) {
  require_file(a.params);
  const auto params = read_params(a.params);
  const CorpusRecord record = corpus_record_from_json(load_json_file(a.question_file));
  BandThresholds thresholds = load_config(a.config).thresholds;
  if (!a.thresholds.empty()) {
    require_file(a.thresholds);
    thresholds = read_thresholds(a.thresholds);
  }
  const AnswerContext ctx{record.question, record.docs, record.answer};
  out << pad("Aspect", 12) << " | " << pad("Raw", 8) << " | " << pad("Clipped", 8) << " | Band\n";
  std::vector<FeedbackItem> items;
  for (Aspect aspect : kAllAspects) {
    const FeedbackItem item = make_feedback(score_answer(params, ctx, aspect), thresholds);
    out << pad(std::string(aspect_title(aspect)), 12) << " | " << pad(fixed(item.score.raw), 8) << " | "
        << pad(fixed(item.score.clipped), 8) << " | " << band_name(item.band) << "\n";
    items.push_back(item);
  }
  out << "\n";
  for (const auto& item : items) out << item.text << "\n";
  return kExitOk;
}

struct RunIflArgs {
  std::string corpus, params, config, out, manifest, thresholds;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iterations;
  std::optional<std::size_t> parallelism;
};

int run_ifl_command(const RunIflArgs& a, std::ostream& out) {
  require_file(a.corpus);
  require_file(a.params);
  RunConfig cfg = load_config(a.config);
  if (a.seed) cfg.ifl.seed = *a.seed;
  if (a.max_iterations) cfg.ifl.max_iterations = *a.max_iterations;
  if (a.parallelism) cfg.ifl.parallelism = *a.parallelism;
  if (!a.thresholds.empty()) {
    require_file(a.thresholds);
    cfg.thresholds = read_thresholds(a.thresholds);
  }
  cfg.ifl.validate();

  const auto corpus = read_corpus(a.corpus);
  const auto params = read_params(a.params);
  const OneShotExample one_shot = cfg.one_shot ? read_one_shot(*cfg.one_shot) : default_one_shot();
  auto generator = make_generator(cfg.generator, corpus, cfg.ifl.seed);

  std::ofstream log(a.out, std::ios::binary | std::ios::trunc);
  if (!log) throw std::runtime_error("cannot write " + a.out);
  std::map<std::string, int> stops;
  const auto started = std::chrono::steady_clock::now();
  const auto runs = run_ifl_batch(corpus, *generator, params, cfg.thresholds, cfg.ifl, one_shot,
                                  [&](std::size_t, const IflRun& run) {
                                    log << run_log_lines(run);
                                    log.flush();
                                    ++stops[std::string(stop_reason_name(run.stop_reason))];
                                  });
  const double total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  log.close();
  check(read_run_log(a.out).size() == runs.size(), a.out);

  if (!a.manifest.empty()) {
    json per_question = json::array();
    for (const auto& run : runs) {
      double seconds = 0.0;
      for (const auto& r : run.records) seconds += std::chrono::duration<double>(r.wall_time).count();
      per_question.push_back({{"question_id", run.question_id}, {"wall_time_seconds", seconds}});
    }
    json manifest = {{"corpus", a.corpus},
                     {"params", a.params},
                     {"runs", a.out},
                     {"generator", generator->model_id()},
                     {"seed", cfg.ifl.seed},
                     {"max_iterations", cfg.ifl.max_iterations},
                     {"thresholds", to_json(cfg.thresholds)},
                     {"questions", runs.size()},
                     {"stop_reasons", stops},
                     {"wall_time_seconds", total_seconds},
                     {"per_question", per_question}};
    write_text(a.manifest, manifest.dump(2) + "\n");
  }
  out << "ran " << runs.size() << " questions;";
  for (const auto& [reason, count] : stops) out << " " << reason << "=" << count;
  out << "\nwrote " << a.out << "\n";
  for (const auto& run : runs)
    if (run.stop_reason == StopReason::kGeneratorError)
      throw GeneratorError(std::to_string(stops["generator_error"]) + " of " + std::to_string(runs.size()) +
                           " questions failed; first: " + run.question_id + ": " + run.error);
  return kExitOk;
}

struct ReportArgs {
  std::string runs, corpus, out, items, config;
};

int report(const ReportArgs& a, std::ostream& out) {
  require_file(a.runs);
  require_file(a.corpus);
  const RunConfig cfg = load_config(a.config);
  const auto runs = read_run_log(a.runs);
  const auto corpus = read_corpus(a.corpus);
  std::vector<std::string> references;
  for (const auto& r : corpus) references.push_back(r.long_answer ? *r.long_answer : plain_text(r.answer));
  const auto embedder = make_embedder(cfg.embedder);
  const LexicalEntailmentJudge judge;
  const IterationReport table = aggregate_report(runs, corpus, judge, *embedder, references, cfg.mauve);

  json columns = json::array();
  for (auto c : report_columns()) columns.push_back(std::string(c));
  json rows = json::array();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    json row = to_json(table.rows[i]);
    row["Model"] = iteration_label(i);
    row["items"] = table.rows[i].items;
    rows.push_back(row);
  }
  const json doc = {{"columns", columns}, {"rows", rows}};
  if (!a.out.empty()) {
    write_text(a.out, doc.dump(2) + "\n");
    const json back = load_json_file(a.out);
    check(back.at("columns") == columns && back.at("rows").size() == table.rows.size(), a.out);
  }

  if (!a.items.empty()) {
    std::map<std::string, const CorpusRecord*> lookup;
    for (const auto& r : corpus) lookup[r.question.id] = &r;
    std::string lines;
    const CitedAnswer empty;
    for (std::size_t it = 0; it < table.rows.size(); ++it) {
      std::vector<EvalItem> items;
      for (const auto& run : runs) {
        const CorpusRecord& rec = *lookup.at(run.question_id);
        const CitedAnswer& ans = run.records.empty() ? empty : run.records[std::min(it, run.records.size() - 1)].answer;
        items.push_back(EvalItem{rec.question, rec.docs, ans});
      }
      const auto ev = evaluate_corpus(items, judge, *embedder, references, cfg.mauve);
      for (const auto& item : ev.items) {
        json line = to_json(item);
        line["iteration"] = it;
        lines += line.dump() + "\n";
      }
    }
    write_text(a.items, lines);
  }

  out << render_report_table(table);
  return kExitOk;
}

struct SynthArgs {
  std::string out;
  std::size_t n = 200;
  std::uint64_t seed = 0;
};

int synth(const SynthArgs& a, std::ostream& out) {
  const auto corpus = synthetic_corpus(a.n, a.seed);
  write_corpus(a.out, corpus);
  check(read_corpus(a.out) == corpus, a.out);
  out << "wrote " << corpus.size() << " records to " << a.out << "\n";
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attributed QA critic training and iterative feedback refinement", "ifl"};
  app.require_subcommand(1);
  app.fallthrough(false);

  BuildCorpusArgs bc;
  auto* cmd_build = app.add_subcommand("build-corpus", "Build critique examples from a corpus");
  cmd_build->add_option("--in", bc.in, "Corpus JSONL")->required();
  cmd_build->add_option("--out", bc.out, "Critique JSONL to write")->required();
  cmd_build->add_option("--mode", bc.mode, "Negative source")->check(CLI::IsMember({"llm", "deterministic"}));
  cmd_build->add_option("--seed", bc.seed, "Seed");
  cmd_build->add_option("--config", bc.config, "JSON config (generator for llm mode)");

  TrainArgs tr;
  auto* cmd_train = app.add_subcommand("train-critic", "Train the per-aspect critic");
  cmd_train->add_option("--data", tr.data, "Critique JSONL")->required();
  cmd_train->add_option("--out", tr.out, "Parameter JSON to write")->required();
  cmd_train->add_option("--epochs", tr.train.epochs, "Epochs")->check(CLI::PositiveNumber);
  cmd_train->add_option("--rate", tr.train.rate, "Learning rate")->check(CLI::PositiveNumber);
  cmd_train->add_option("--seed", tr.train.seed, "Seed");
  cmd_train->add_option("--l2", tr.train.l2, "L2 weight decay")->check(CLI::NonNegativeNumber);
  cmd_train->add_option("--holdout", tr.train.holdout_fraction, "Held-out question fraction")
      ->check(CLI::Range(0.0, 0.9));
  cmd_train->add_option("--batch-size", tr.train.batch_size, "Mini-batch size, 0 for full batch");
  cmd_train->add_option("--report", tr.report, "Training report JSONL to write");

  EvalArgs ev;
  auto* cmd_eval = app.add_subcommand("eval-critic", "Pairwise accuracy and average rewards per aspect");
  cmd_eval->add_option("--data", ev.data, "Critique JSONL")->required();
  cmd_eval->add_option("--params", ev.params, "Parameter JSON")->required();
  cmd_eval->add_option("--thresholds-out", ev.thresholds_out, "Write band thresholds derived from the averages");

  ScoreArgs sc;
  auto* cmd_score = app.add_subcommand("score", "Score one answer and print rewards, bands and feedback");
  cmd_score->add_option("--params", sc.params, "Parameter JSON")->required();
  cmd_score->add_option("--question-file", sc.question_file, "JSON with question, docs and answer")->required();
  cmd_score->add_option("--thresholds", sc.thresholds, "Band thresholds JSON");
  cmd_score->add_option("--config", sc.config, "JSON config");

  RunIflArgs ri;
  auto* cmd_run = app.add_subcommand("run-ifl", "Run iterative feedback refinement over a corpus");
  cmd_run->add_option("--corpus", ri.corpus, "Corpus JSONL")->required();
  cmd_run->add_option("--params", ri.params, "Parameter JSON")->required();
  cmd_run->add_option("--config", ri.config, "JSON config");
  cmd_run->add_option("--out", ri.out, "Run JSONL to write")->required();
  cmd_run->add_option("--manifest", ri.manifest, "Run manifest JSON to write");
  cmd_run->add_option("--thresholds", ri.thresholds, "Band thresholds JSON");
  cmd_run->add_option("--seed", ri.seed, "Seed");
  cmd_run->add_option("--max-iterations", ri.max_iterations, "Refinement iterations")->check(CLI::PositiveNumber);
  cmd_run->add_option("--parallelism", ri.parallelism, "Questions processed concurrently")
      ->check(CLI::PositiveNumber);

  ReportArgs rp;
  auto* cmd_report = app.add_subcommand("report", "Metric table with one row per iteration");
  cmd_report->add_option("--runs", rp.runs, "Run JSONL")->required();
  cmd_report->add_option("--corpus", rp.corpus, "Corpus JSONL the runs came from")->required();
  cmd_report->add_option("--out", rp.out, "Table JSON to write");
  cmd_report->add_option("--items", rp.items, "Per-item metrics JSONL to write");
  cmd_report->add_option("--config", rp.config, "JSON config (embedder, mauve)");

  SynthArgs sy;
  auto* cmd_synth = app.add_subcommand("synth-corpus", "Write the offline synthetic corpus");
  cmd_synth->add_option("--out", sy.out, "Corpus JSONL to write")->required();
  cmd_synth->add_option("--n", sy.n, "Questions")->check(CLI::PositiveNumber);
  cmd_synth->add_option("--seed", sy.seed, "Seed");

  std::vector<std::string> argv_storage = {"ifl"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (args.empty()) {
      err << app.help();
    } else {
      err << "usage error: " << e.what() << "\n";
      err << "run 'ifl --help' for usage\n";
    }
    return kExitUsage;
  }

  try {
    if (cmd_build->parsed()) return build_corpus(bc, out);
    if (cmd_train->parsed()) return train(tr, out);
    if (cmd_eval->parsed()) return eval(ev, out);
    if (cmd_score->parsed()) return score(sc, out);
    if (cmd_run->parsed()) return run_ifl_command(ri, out);
    if (cmd_report->parsed()) return report(rp, out);
    if (cmd_synth->parsed()) return synth(sy, out);
  } catch (const MissingFileError& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const GeneratorError& e) {
    err << "generator error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const PreconditionError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace ifl::cli
