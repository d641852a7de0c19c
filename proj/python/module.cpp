#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ifl/answer.hpp"
#include "ifl/corpus.hpp"
#include "ifl/critic.hpp"
#include "ifl/error.hpp"
#include "ifl/feedback.hpp"
#include "ifl/metrics.hpp"
#include "ifl/mock.hpp"
#include "ifl/orchestrator.hpp"
#include "ifl/synthetic.hpp"

namespace py = pybind11;
using namespace ifl;

namespace {

// Entailment judge backed by a Python callable (premise, hypothesis) -> bool.
class CallableJudge final : public EntailmentJudge {
 public:
  explicit CallableJudge(py::function fn) : fn_(std::move(fn)) {}
  bool entails(std::string_view premise, std::string_view hypothesis) const override {
    py::gil_scoped_acquire gil;
    return fn_(std::string(premise), std::string(hypothesis)).cast<bool>();
  }

 private:
  py::function fn_;
};

CitationScores scores_with(const CitedAnswer& answer, const DocumentSet& docs, const py::object& judge) {
  if (judge.is_none()) return citation_scores(answer, docs, LexicalEntailmentJudge{});
  return citation_scores(answer, docs, CallableJudge(judge.cast<py::function>()));
}

py::dict aspect_dict(const auto& per_aspect, auto&& convert) {
  py::dict d;
  for (Aspect a : kAllAspects) d[py::str(std::string(aspect_name(a)))] = convert(per_aspect[a]);
  return d;
}

}  // namespace

PYBIND11_MODULE(_ifl, m) {
  m.doc() = "Attributed QA critic, citation metrics and iterative feedback refinement.";

  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<GeneratorError>(m, "GeneratorError", PyExc_RuntimeError);

  py::enum_<Aspect>(m, "Aspect")
      .value("FLUENCY", Aspect::kFluency)
      .value("CORRECTNESS", Aspect::kCorrectness)
      .value("CITATION", Aspect::kCitation);

  py::enum_<Band>(m, "Band")
      .value("PRAISE", Band::kPraise)
      .value("IMPROVE", Band::kImprove)
      .value("CORRECTIVE", Band::kCorrective);

  py::class_<Document>(m, "Document")
      .def(py::init([](int index, std::string title, std::string body) {
             return Document{index, std::move(title), std::move(body)};
           }),
           py::arg("index"), py::arg("title"), py::arg("body"))
      .def_readwrite("index", &Document::index)
      .def_readwrite("title", &Document::title)
      .def_readwrite("body", &Document::body)
      .def("__eq__", [](const Document& a, const Document& b) { return a == b; });

  py::class_<DocumentSet>(m, "DocumentSet")
      .def(py::init<std::vector<Document>>(), py::arg("documents"))
      .def("__len__", &DocumentSet::size)
      .def("__contains__", &DocumentSet::contains)
      .def_property_readonly("documents",
                             [](const DocumentSet& d) { return std::vector<Document>(d.begin(), d.end()); });

  py::class_<Question>(m, "Question")
      .def(py::init([](std::string id, std::string text, GoldGroups gold) {
             return Question{std::move(id), std::move(text), std::move(gold)};
           }),
           py::arg("id"), py::arg("text"), py::arg("gold_aspects"))
      .def_readwrite("id", &Question::id)
      .def_readwrite("text", &Question::text)
      .def_readwrite("gold_aspects", &Question::gold_aspects);

  py::class_<Sentence>(m, "Sentence")
      .def(py::init([](std::string text, std::set<int> citations) {
             return Sentence{std::move(text), std::move(citations)};
           }),
           py::arg("text"), py::arg("citations") = std::set<int>{})
      .def_readwrite("text", &Sentence::text)
      .def_readwrite("citations", &Sentence::citations)
      .def("__eq__", [](const Sentence& a, const Sentence& b) { return a == b; })
      .def("__repr__", [](const Sentence& s) { return "Sentence(" + py::repr(py::str(s.text)).cast<std::string>() + ")"; });

  py::class_<CitedAnswer>(m, "CitedAnswer")
      .def(py::init([](std::vector<Sentence> s) { return CitedAnswer{std::move(s)}; }),
           py::arg("sentences") = std::vector<Sentence>{})
      .def_readwrite("sentences", &CitedAnswer::sentences)
      .def("citation_count", &CitedAnswer::citation_count)
      .def("__eq__", [](const CitedAnswer& a, const CitedAnswer& b) { return a == b; })
      .def("__str__", [](const CitedAnswer& a) { return render_cited_answer(a); });

  py::class_<CorpusRecord>(m, "CorpusRecord")
      .def(py::init([](Question q, DocumentSet docs, CitedAnswer answer, std::optional<std::string> long_answer) {
             return CorpusRecord{std::move(q), std::move(docs), std::move(answer), std::move(long_answer)};
           }),
           py::arg("question"), py::arg("docs"), py::arg("answer") = CitedAnswer{},
           py::arg("long_answer") = std::nullopt)
      .def_readwrite("question", &CorpusRecord::question)
      .def_readwrite("docs", &CorpusRecord::docs)
      .def_readwrite("answer", &CorpusRecord::answer)
      .def_readwrite("long_answer", &CorpusRecord::long_answer);

  m.def("parse_cited_answer", &parse_cited_answer, py::arg("raw"));
  m.def("render_cited_answer", &render_cited_answer, py::arg("answer"));
  m.def("normalize_marker_style", &normalize_marker_style, py::arg("raw"));
  m.def("strip_citations", &strip_citations, py::arg("raw"));
  m.def("read_corpus", &read_corpus, py::arg("path"));
  m.def("write_corpus", [](const std::string& path, const std::vector<CorpusRecord>& r) { write_corpus(path, r); },
        py::arg("path"), py::arg("records"));
  m.def("synthetic_corpus", &synthetic_corpus, py::arg("questions"), py::arg("seed") = 0);

  // critic
  py::class_<RewardScore>(m, "RewardScore")
      .def_readonly("aspect", &RewardScore::aspect)
      .def_readonly("raw", &RewardScore::raw)
      .def_readonly("clipped", &RewardScore::clipped);

  py::class_<CriticParams>(m, "CriticParams")
      .def(py::init<>())
      .def("weights", [](const CriticParams& p, Aspect a) { return std::vector<double>(p.heads[a].weights.begin(), p.heads[a].weights.end()); })
      .def("bias", [](const CriticParams& p, Aspect a) { return p.heads[a].bias; })
      .def("__eq__", [](const CriticParams& a, const CriticParams& b) { return a == b; });

  py::class_<CritiqueExample>(m, "CritiqueExample")
      .def_readonly("question", &CritiqueExample::question)
      .def_readonly("aspect", &CritiqueExample::aspect)
      .def_readonly("positive", &CritiqueExample::positive)
      .def_property_readonly("negatives", [](const CritiqueExample& e) {
        return std::vector<CitedAnswer>(e.negatives.begin(), e.negatives.end());
      });

  m.def("pairwise_ranking_loss",
        [](const std::vector<double>& pos, const std::vector<double>& neg) { return pairwise_ranking_loss(pos, neg); },
        py::arg("pos_scores"), py::arg("neg_scores"));
  m.def("clip_reward", &clip_reward, py::arg("raw"));
  m.def(
      "extract_features",
      [](const Question& q, const DocumentSet& docs, const CitedAnswer& a, Aspect aspect) {
        const auto f = extract_features(AnswerContext{q, docs, a}, aspect);
        return std::vector<double>(f.begin(), f.end());
      },
      py::arg("question"), py::arg("docs"), py::arg("answer"), py::arg("aspect"));
  m.def(
      "score_answer",
      [](const CriticParams& p, const Question& q, const DocumentSet& docs, const CitedAnswer& a, Aspect aspect) {
        return score_answer(p, AnswerContext{q, docs, a}, aspect);
      },
      py::arg("params"), py::arg("question"), py::arg("docs"), py::arg("answer"), py::arg("aspect"));
  m.def("read_params", &read_params, py::arg("path"));
  m.def("write_params", &write_params, py::arg("path"), py::arg("params"));

  m.def(
      "build_deterministic_critique_set",
      [](const std::vector<CorpusRecord>& corpus, std::uint64_t seed) {
        return build_deterministic_critique_set(corpus, seed);
      },
      py::arg("corpus"), py::arg("seed") = 0);

  m.def(
      "train_critic",
      [](const std::vector<CritiqueExample>& data, double rate, int epochs, std::uint64_t seed, double l2,
         double holdout, std::size_t batch_size) {
        TrainConfig cfg{rate, epochs, seed, l2, holdout, batch_size};
        TrainResult result;
        {
          py::gil_scoped_release release;
          result = train_critic(data, cfg);
        }
        py::dict report = aspect_dict(result.report.aspects, [](const AspectTrainingReport& r) {
          py::dict d;
          d["final_loss"] = r.final_loss;
          d["train_examples"] = r.train_examples;
          d["heldout_examples"] = r.heldout_examples;
          d["train_accuracy"] = r.train_accuracy;
          d["heldout_accuracy"] = r.heldout_accuracy;
          d["epoch_loss"] = r.epoch_loss;
          return d;
        });
        return py::make_tuple(result.params, report);
      },
      py::arg("data"), py::arg("rate") = 0.1, py::arg("epochs") = 200, py::arg("seed") = 0, py::arg("l2") = 1e-4,
      py::arg("holdout") = 0.2, py::arg("batch_size") = 0,
      "Returns (params, report) where report maps aspect name to training statistics.");

  m.def(
      "evaluate_critic",
      [](const CriticParams& params, const std::vector<CritiqueExample>& data) {
        return aspect_dict(evaluate_critic(params, data), [](const AspectEvaluation& e) {
          py::dict d;
          d["examples"] = e.examples;
          d["pairwise_accuracy"] = e.pairwise_accuracy;
          d["avg_positive_reward"] = e.avg_positive_reward;
          d["avg_negative_reward"] = e.avg_negative_reward;
          return d;
        });
      },
      py::arg("params"), py::arg("data"));

  // feedback
  py::class_<AspectThreshold>(m, "AspectThreshold")
      .def(py::init([](double pos, double neg) { return AspectThreshold{pos, neg}; }), py::arg("avg_positive"),
           py::arg("avg_negative"))
      .def_readwrite("avg_positive", &AspectThreshold::avg_positive)
      .def_readwrite("avg_negative", &AspectThreshold::avg_negative);

  py::class_<BandThresholds>(m, "BandThresholds")
      .def(py::init<>())
      .def_static("defaults", &BandThresholds::defaults)
      .def("get", [](const BandThresholds& t, Aspect a) { return t.per_aspect[a]; })
      .def("set", [](BandThresholds& t, Aspect a, AspectThreshold v) { t.per_aspect[a] = v; })
      .def("validate", &BandThresholds::validate);

  m.def("read_thresholds", &read_thresholds, py::arg("path"));
  m.def(
      "thresholds_from_evaluation",
      [](const CriticParams& params, const std::vector<CritiqueExample>& data) {
        return thresholds_from_evaluation(evaluate_critic(params, data));
      },
      py::arg("params"), py::arg("data"));

  py::class_<FeedbackItem>(m, "FeedbackItem")
      .def_readonly("aspect", &FeedbackItem::aspect)
      .def_readonly("score", &FeedbackItem::score)
      .def_readonly("band", &FeedbackItem::band)
      .def_readonly("text", &FeedbackItem::text);

  m.def(
      "make_feedback",
      [](Aspect aspect, double raw, const BandThresholds& t) {
        return make_feedback(RewardScore{aspect, raw, clip_reward(raw)}, t);
      },
      py::arg("aspect"), py::arg("raw"), py::arg("thresholds") = BandThresholds::defaults());
  m.def(
      "build_refinement_prompt",
      [](const Question& q, const DocumentSet& docs, const CitedAnswer& prev, const std::vector<FeedbackItem>& fb) {
        return build_refinement_prompt(q, docs, prev, fb);
      },
      py::arg("question"), py::arg("docs"), py::arg("previous_answer"), py::arg("feedback"));

  // metrics
  py::class_<CitationScores>(m, "CitationScores")
      .def_readonly("recall", &CitationScores::recall)
      .def_readonly("precision", &CitationScores::precision)
      .def_readonly("sentences", &CitationScores::sentences)
      .def_readonly("supported_sentences", &CitationScores::supported_sentences)
      .def_readonly("citations", &CitationScores::citations)
      .def_readonly("relevant_citations", &CitationScores::relevant_citations)
      .def_readonly("zero_citations", &CitationScores::zero_citations)
      .def_readonly("missing_indices", &CitationScores::missing_indices);

  m.def("lexical_entailment_judge", [](const std::string& p, const std::string& h) { return lexical_entailment_judge(p, h); },
        py::arg("premise"), py::arg("hypothesis"));
  m.def("em_recall", &em_recall, py::arg("answer"), py::arg("gold_aspects"));
  m.def("citation_scores", &scores_with, py::arg("answer"), py::arg("docs"), py::arg("judge") = py::none(),
        "judge is a callable (premise, hypothesis) -> bool; the lexical judge when None.");
  m.def(
      "mauve_score",
      [](const std::vector<std::string>& model, const std::vector<std::string>& reference, std::size_t dimension,
         std::uint64_t seed) { return mauve_score(model, reference, StubEmbedder(dimension, seed)); },
      py::arg("model_texts"), py::arg("reference_texts"), py::arg("dimension") = 16, py::arg("seed") = 0);

  // refinement loop
  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("index", &IterationRecord::index)
      .def_readonly("prompt", &IterationRecord::prompt)
      .def_readonly("answer", &IterationRecord::answer)
      .def_property_readonly("scores",
                             [](const IterationRecord& r) { return aspect_dict(r.scores, [](const RewardScore& s) { return s; }); })
      .def_property_readonly("feedback", [](const IterationRecord& r) {
        return aspect_dict(r.feedback, [](const FeedbackItem& f) { return f; });
      });

  py::class_<IflRun>(m, "IflRun")
      .def_readonly("question_id", &IflRun::question_id)
      .def_readonly("records", &IflRun::records)
      .def_readonly("final_answer", &IflRun::final_answer)
      .def_readonly("error", &IflRun::error)
      .def_property_readonly("stop_reason", [](const IflRun& r) { return std::string(stop_reason_name(r.stop_reason)); })
      .def("log_lines", &run_log_lines);

  m.def(
      "run_ifl_mock",
      [](const std::vector<CorpusRecord>& corpus, const CriticParams& params, const BandThresholds& thresholds,
         int max_iterations, std::uint64_t seed, bool degrade, bool responsive, bool early_stop,
         std::size_t parallelism) {
        const MockGenerator gen(
            script_from_corpus(corpus, responsive ? MockMode::kResponsive : MockMode::kEcho, degrade, seed));
        IflConfig cfg;
        cfg.max_iterations = max_iterations;
        cfg.seed = seed;
        cfg.early_stop_all_praise = early_stop;
        cfg.parallelism = parallelism;
        cfg.retry_backoff = std::chrono::milliseconds(0);
        py::gil_scoped_release release;
        return run_ifl_batch(corpus, gen, params, thresholds, cfg, default_one_shot());
      },
      py::arg("corpus"), py::arg("params"), py::arg("thresholds") = BandThresholds::defaults(),
      py::arg("max_iterations") = 2, py::arg("seed") = 0, py::arg("degrade") = true, py::arg("responsive") = true,
      py::arg("early_stop") = true, py::arg("parallelism") = 1,
      "Runs the refinement loop over the corpus with the offline mock generator.");

  m.def(
      "report",
      [](const std::vector<IflRun>& runs, const std::vector<CorpusRecord>& corpus) {
        std::vector<std::string> refs;
        for (const auto& r : corpus) refs.push_back(r.long_answer.value_or(plain_text(r.answer)));
        const auto report = aggregate_report(runs, corpus, LexicalEntailmentJudge{}, StubEmbedder{}, refs);
        py::list rows;
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
          const auto& row = report.rows[i];
          py::dict d;
          d["Model"] = iteration_label(i);
          d["MAUVE"] = row.mauve;
          d["EM Recall"] = row.em_recall;
          d["Citation Recall"] = row.citation_recall;
          d["Citation Precision"] = row.citation_precision;
          d["Length"] = row.mean_length;
          rows.append(d);
        }
        return rows;
      },
      py::arg("runs"), py::arg("corpus"), "One dict per iteration index with the five report columns.");
}
