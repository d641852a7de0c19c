#include "ifl/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "ifl/error.hpp"
#include "ifl/random.hpp"
#include "ifl/serialize.hpp"
#include "ifl/text.hpp"

namespace ifl {

namespace {

constexpr std::string_view kPositiveInstructions =
    "Write an accurate answer for the question using only the provided web search results.\n"
    "- The answer should be detailed, correct, high-quality, and written by an expert using an "
    "unbiased and journalistic tone.\n"
    "- Be objective. Avoid injecting personal biases or opinions into the answer.\n"
    "- Cite search results using [index]. Cite the most relevant results that answer the "
    "question. Don't cite irrelevant results. All sentences should have at least one citation.";

constexpr std::string_view kNegFluencyInstructions =
    "Write an accurate answer for the question using only the provided web search results.\n"
    "- The summarized result should be an intentionally long summary (at least 200 tokens or "
    "more). It should be not fluent, inconsistent, and not coherent.\n"
    "- The summarized result should contain the same phrases and words that were mentioned "
    "before (keep repeating the same words - more than five grams).\n"
    "- Repeated phrases must appear at least two times or more in the summarized text (e.g., "
    "date, organization name, people's names).";

constexpr std::string_view kNegCorrectnessInstructions =
    "Write an answer for the question with the web search results, but all the results should "
    "be fake like it is appeared in parallel universe.\n"
    "- It should be added the extra information about the question, but it is not accessible to "
    "the web search results.\n"
    "- It is okay with the wrong number, date, organization name, people name, and etc\n"
    "- It is okay to use your own knowledge about the question even if it is not in the given "
    "web search results.";

constexpr int kMaxRedraws = 64;

bool is_terminator(char c) { return c == '.' || c == '?' || c == '!'; }

struct CitationSlot {
  std::size_t sentence;
  int index;
};

std::vector<CitationSlot> citation_slots(const CitedAnswer& answer) {
  std::vector<CitationSlot> slots;
  for (std::size_t s = 0; s < answer.sentences.size(); ++s)
    for (int c : answer.sentences[s].citations) slots.push_back({s, c});
  return slots;
}

int draw_other_index(Rng& rng, int current, int n_docs) {
  if (current < 1 || current > n_docs)
    return static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n_docs))) + 1;
  int draw = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n_docs - 1))) + 1;
  return draw >= current ? draw + 1 : draw;
}

CitedAnswer with_texts_only(const CitedAnswer& answer) {
  CitedAnswer out = answer;
  for (auto& s : out.sentences) s.citations.clear();
  return out;
}

}  // namespace

std::string format_question_and_docs(const Question& question, const DocumentSet& docs) {
  std::string out = "Question: " + text::collapse_whitespace(question.text) + "\n\nSearch results:";
  for (const auto& d : docs) {
    out += "\nDocument [" + std::to_string(d.index) + "] (Title: " +
           text::collapse_whitespace(d.title) + "): " + text::collapse_whitespace(d.body);
  }
  return out;
}

std::string_view prompt_instructions(PromptKind kind) {
  switch (kind) {
    case PromptKind::kPositive: return kPositiveInstructions;
    case PromptKind::kNegFluency: return kNegFluencyInstructions;
    case PromptKind::kNegCorrectness: return kNegCorrectnessInstructions;
  }
  return kPositiveInstructions;
}

std::string build_aspect_prompt(PromptKind kind, const Question& question, const DocumentSet& docs) {
  if (docs.empty()) throw PreconditionError("annotation prompt needs at least one document");
  std::string out(prompt_instructions(kind));
  out += "\n\n";
  out += format_question_and_docs(question, docs);
  out += "\n\nAnswer:";
  return out;
}

CitedAnswer corrupt_citations(const CitedAnswer& answer, int n_docs, CorruptionMode mode,
                              std::uint64_t seed) {
  const auto slots = citation_slots(answer);
  if (slots.empty()) throw CorruptionError("answer has no citations to corrupt");
  if (mode == CorruptionMode::kShuffle && n_docs < 2)
    throw CorruptionError("shuffling citations needs at least 2 documents");

  Rng rng(seed);
  const CitedAnswer bare = with_texts_only(answer);

  if (mode == CorruptionMode::kRemove) {
    CitedAnswer out = bare;
    bool removed_any = false;
    std::vector<bool> keep(slots.size(), true);
    for (std::size_t k = 0; k < slots.size(); ++k) {
      if (rng.bernoulli(0.5)) {
        keep[k] = false;
        removed_any = true;
      }
    }
    if (!removed_any) keep[rng.uniform_index(slots.size())] = false;
    for (std::size_t k = 0; k < slots.size(); ++k)
      if (keep[k]) out.sentences[slots[k].sentence].citations.insert(slots[k].index);
    return out;
  }

  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    CitedAnswer out = bare;
    for (const auto& slot : slots) {
      const bool redraw = mode == CorruptionMode::kShuffle || (n_docs >= 2 && rng.bernoulli(0.5));
      if (redraw)
        out.sentences[slot.sentence].citations.insert(draw_other_index(rng, slot.index, n_docs));
    }
    if (out != answer) return out;
  }
  throw CorruptionError("no corrupted citation assignment differs from the original");
}

CitedAnswer inject_repetition(const CitedAnswer& answer, std::uint64_t seed) {
  if (answer.empty()) throw PreconditionError("cannot inject repetition into an empty answer");
  Rng rng(seed);
  const std::size_t source = rng.uniform_index(answer.sentences.size());
  const auto words = text::split_words(answer.sentences[source].text);
  const std::size_t n = std::min<std::size_t>(5, words.size());
  std::string phrase;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) phrase.push_back(' ');
    phrase += words[i];
  }
  while (!phrase.empty() && (is_terminator(phrase.back()) || phrase.back() == ',' ||
                             phrase.back() == ';' || phrase.back() == ':'))
    phrase.pop_back();
  if (phrase.empty()) phrase = words.front();

  CitedAnswer out = answer;
  const std::size_t copies = 2 + rng.uniform_index(2);
  for (std::size_t k = 0; k < copies; ++k) {
    auto& target = out.sentences[rng.uniform_index(out.sentences.size())].text;
    std::size_t body_end = target.size();
    while (body_end > 0 && is_terminator(target[body_end - 1])) --body_end;
    target.insert(body_end, ", " + phrase);
  }
  return out;
}

std::vector<CritiqueExample> assemble_critique_examples(const Question& question,
                                                        const DocumentSet& docs,
                                                        const CitedAnswer& positive,
                                                        const NegativePool& negative_pool,
                                                        std::uint64_t seed) {
  std::vector<CritiqueExample> out;
  for (Aspect aspect : kAllAspects) {
    const auto& pool = negative_pool[aspect];
    if (pool.size() < 3)
      throw AssemblyError("negative pool for aspect '" + std::string(aspect_name(aspect)) +
                          "' has " + std::to_string(pool.size()) + " answers, need 3");
    Rng rng(mix_seed(seed, aspect_name(aspect)));
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    // Partial Fisher-Yates: the first three slots are a uniform draw without
    // replacement.
    for (std::size_t i = 0; i < 3; ++i) {
      const std::size_t j = i + rng.uniform_index(order.size() - i);
      std::swap(order[i], order[j]);
    }
    CritiqueExample ex{question, docs, aspect, positive, {}};
    for (std::size_t i = 0; i < 3; ++i) {
      ex.negatives[i] = pool[order[i]];
      if (ex.negatives[i] == positive)
        throw AssemblyError("negative for aspect '" + std::string(aspect_name(aspect)) +
                            "' is identical to the positive answer");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

NegativePool deterministic_negative_pool(std::span<const CorpusRecord> corpus, std::size_t index,
                                         std::uint64_t seed) {
  const auto& record = corpus[index];
  const std::uint64_t base = mix_seed(seed, record.question.id);
  NegativePool pool;
  if (!record.answer.empty()) {
    for (std::uint64_t k = 0; k < 4; ++k)
      pool[Aspect::kFluency].push_back(inject_repetition(record.answer, mix_seed(base, "fluency") + k));
  }
  for (std::size_t shift = 1; shift <= 4 && shift < corpus.size(); ++shift) {
    const auto& other = corpus[(index + shift) % corpus.size()].answer;
    if (!other.empty() && other != record.answer) pool[Aspect::kCorrectness].push_back(other);
  }
  const int n_docs = static_cast<int>(record.docs.size());
  const std::uint64_t cite_seed = mix_seed(base, "citation");
  const std::pair<CorruptionMode, std::uint64_t> variants[] = {
      {CorruptionMode::kShuffle, 0}, {CorruptionMode::kShuffle, 1},
      {CorruptionMode::kRemove, 2}, {CorruptionMode::kMixed, 3}};
  for (const auto& [mode, k] : variants) {
    try {
      pool[Aspect::kCitation].push_back(corrupt_citations(record.answer, n_docs, mode, cite_seed + k));
    } catch (const CorruptionError&) {
      // Variant unavailable for this answer; assembly reports a short pool.
    }
  }
  return pool;
}

std::vector<CritiqueExample> build_deterministic_critique_set(std::span<const CorpusRecord> corpus,
                                                              std::uint64_t seed) {
  std::vector<CritiqueExample> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& r = corpus[i];
    auto pool = deterministic_negative_pool(corpus, i, seed);
    try {
      auto examples = assemble_critique_examples(r.question, r.docs, r.answer, pool,
                                                 mix_seed(seed, r.question.id));
      for (auto& e : examples) out.push_back(std::move(e));
    } catch (const AssemblyError& e) {
      throw AssemblyError("question '" + r.question.id + "': " + e.what());
    }
  }
  return out;
}

std::vector<CritiqueExample> build_llm_critique_set(std::span<const CorpusRecord> corpus,
                                                    const Generator& generator,
                                                    const DecodeOptions& decode,
                                                    std::uint64_t seed) {
  std::vector<CritiqueExample> out;
  for (const auto& r : corpus) {
    CitedAnswer positive = r.answer;
    if (positive.empty()) {
      GenerationRequest req{"", build_aspect_prompt(PromptKind::kPositive, r.question, r.docs),
                            std::nullopt, decode};
      positive = parse_cited_answer(normalize_marker_style(generator.generate(req)));
    }
    NegativePool pool;
    const std::pair<Aspect, PromptKind> llm_aspects[] = {
        {Aspect::kFluency, PromptKind::kNegFluency},
        {Aspect::kCorrectness, PromptKind::kNegCorrectness}};
    for (const auto& [aspect, kind] : llm_aspects) {
      GenerationRequest req{"", build_aspect_prompt(kind, r.question, r.docs), std::nullopt, decode};
      for (int k = 0; k < 3; ++k) {
        auto negative = parse_cited_answer(normalize_marker_style(generator.generate(req)));
        if (negative != positive && !negative.empty()) pool[aspect].push_back(std::move(negative));
      }
    }
    const std::uint64_t base = mix_seed(seed, r.question.id);
    const int n_docs = static_cast<int>(r.docs.size());
    const CorruptionMode modes[] = {CorruptionMode::kShuffle, CorruptionMode::kRemove,
                                    CorruptionMode::kMixed};
    for (std::uint64_t k = 0; k < 3; ++k) {
      try {
        pool[Aspect::kCitation].push_back(corrupt_citations(positive, n_docs, modes[k], base + k));
      } catch (const CorruptionError&) {
      }
    }
    try {
      auto examples = assemble_critique_examples(r.question, r.docs, positive, pool, base);
      for (auto& e : examples) out.push_back(std::move(e));
    } catch (const AssemblyError& e) {
      throw AssemblyError("question '" + r.question.id + "': " + e.what());
    }
  }
  return out;
}

std::vector<CritiqueExample> read_critique_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open critique file: " + path);
  std::vector<CritiqueExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::collapse_whitespace(line).empty()) continue;
    try {
      out.push_back(critique_example_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw SchemaError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_critique_set(const std::string& path, std::span<const CritiqueExample> examples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SchemaError("cannot write critique file: " + path);
  for (const auto& e : examples) out << to_json(e).dump() << '\n';
}

}  // namespace ifl
