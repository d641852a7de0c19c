#include "ifl/mock.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <unordered_set>

#include "ifl/aspect.hpp"
#include "ifl/feedback.hpp"
#include "ifl/text.hpp"

namespace ifl {

namespace {

bool is_terminator(char c) { return c == '.' || c == '?' || c == '!'; }

std::optional<std::string> line_after(std::string_view prompt, std::string_view prefix) {
  std::size_t pos = 0;
  while (pos <= prompt.size()) {
    const std::size_t end = std::min(prompt.find('\n', pos), prompt.size());
    const std::string_view line = prompt.substr(pos, end - pos);
    if (line.starts_with(prefix)) return std::string(line.substr(prefix.size()));
    pos = end + 1;
  }
  return std::nullopt;
}

// Parses "Document [k] (Title: t): body" lines.
DocumentSet docs_from_prompt(std::string_view prompt) {
  std::vector<Document> docs;
  std::size_t pos = 0;
  constexpr std::string_view kPrefix = "Document [";
  while (pos < prompt.size()) {
    const std::size_t end = std::min(prompt.find('\n', pos), prompt.size());
    const std::string_view line = prompt.substr(pos, end - pos);
    pos = end + 1;
    if (!line.starts_with(kPrefix)) continue;
    const std::size_t close = line.find(']', kPrefix.size());
    const std::size_t title_at = line.find("(Title: ", close);
    const std::size_t body_at = line.find("): ", title_at);
    if (close == std::string_view::npos || title_at == std::string_view::npos || body_at == std::string_view::npos)
      continue;
    int index = 0;
    try {
      index = std::stoi(std::string(line.substr(kPrefix.size(), close - kPrefix.size())));
    } catch (const std::exception&) {
      continue;
    }
    Document d{index, std::string(line.substr(title_at + 8, body_at - title_at - 8)),
               std::string(line.substr(body_at + 3))};
    if (index < 1 || d.body.empty()) continue;
    if (std::any_of(docs.begin(), docs.end(), [&](const Document& o) { return o.index == index; })) continue;
    docs.push_back(std::move(d));
  }
  return DocumentSet(std::move(docs));
}

std::optional<Band> feedback_band(std::string_view prompt, Aspect aspect) {
  for (Band b : {Band::kPraise, Band::kImprove, Band::kCorrective})
    if (prompt.find(render_feedback(aspect, b)) != std::string_view::npos) return b;
  return std::nullopt;
}

bool needs_repair(std::optional<Band> band) { return band && *band != Band::kPraise; }

double coverage(const std::vector<std::string>& content, const std::unordered_set<std::string>& tokens) {
  if (content.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& w : content) hit += tokens.contains(w) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(content.size());
}

std::unordered_set<std::string> token_set(std::string_view s) {
  const auto t = text::tokenize(s);
  return {t.begin(), t.end()};
}

// Best matching document for a sentence; 0 when nothing overlaps.
int best_document(const Sentence& s, const DocumentSet& docs) {
  const auto content = text::content_words(s.text);
  int best = 0;
  double best_overlap = 0.0;
  for (const auto& d : docs) {
    const double o = coverage(content, token_set(document_text(d)));
    if (o > best_overlap) {
      best_overlap = o;
      best = d.index;
    }
  }
  return best;
}

CitedAnswer restore_one_citation(CitedAnswer answer, const DocumentSet& docs) {
  for (auto& s : answer.sentences) {
    const int best = best_document(s, docs);
    if (best == 0) continue;
    const bool has_invalid =
        std::any_of(s.citations.begin(), s.citations.end(), [&](int c) { return !docs.contains(c); });
    if (!s.citations.contains(best) || has_invalid) {
      s.citations = {best};
      break;
    }
  }
  return answer;
}

CitedAnswer ground_weakest_sentence(CitedAnswer answer, const DocumentSet& docs) {
  std::unordered_set<std::string> all;
  for (const auto& d : docs) {
    auto t = token_set(document_text(d));
    all.insert(t.begin(), t.end());
  }
  std::size_t weakest = answer.sentences.size();
  double weakest_cov = 0.5;
  for (std::size_t i = 0; i < answer.sentences.size(); ++i) {
    const double c = coverage(text::content_words(answer.sentences[i].text), all);
    if (c < weakest_cov) {
      weakest_cov = c;
      weakest = i;
    }
  }
  if (weakest == answer.sentences.size()) return answer;
  const auto target = text::content_words(answer.sentences[weakest].text);
  std::optional<Sentence> replacement;
  double best = -1.0;
  for (const auto& d : docs) {
    for (const auto& ds : parse_cited_answer(d.body).sentences) {
      const double o = coverage(target, token_set(ds.text));
      if (o > best) {
        best = o;
        replacement = Sentence{ds.text, {d.index}};
      }
    }
  }
  if (replacement) answer.sentences[weakest] = *replacement;
  return answer;
}

struct WordPos {
  std::size_t sentence;
  std::size_t word;
};

}  // namespace

CitedAnswer remove_repeated_ngrams(const CitedAnswer& answer) {
  std::vector<std::vector<std::string>> words;
  std::vector<std::vector<bool>> deleted;
  for (const auto& s : answer.sentences) {
    words.push_back(text::split_words(s.text));
    deleted.emplace_back(words.back().size(), false);
  }

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t n : {5u, 4u, 3u}) {
      std::vector<WordPos> live;
      for (std::size_t s = 0; s < words.size(); ++s)
        for (std::size_t w = 0; w < words[s].size(); ++w)
          if (!deleted[s][w]) live.push_back({s, w});
      // Non-overlapping occurrences of each n-gram within a sentence.
      std::map<std::string, std::vector<std::size_t>> occurrences;
      std::map<std::string, std::size_t> last_end;
      for (std::size_t i = 0; i + n <= live.size(); ++i) {
        if (live[i + n - 1].sentence != live[i].sentence) continue;
        std::string key;
        bool blank = false;
        for (std::size_t k = 0; k < n; ++k) {
          const auto b = text::bare_word(words[live[i + k].sentence][live[i + k].word]);
          if (b.empty()) blank = true;
          key += b;
          key.push_back('\x1f');
        }
        if (blank) continue;
        auto it = last_end.find(key);
        if (it != last_end.end() && i < it->second) continue;
        occurrences[key].push_back(i);
        last_end[key] = i + n;
      }
      for (const auto& [key, starts] : occurrences) {
        if (starts.size() < 2) continue;
        // Keep a sentence-initial occurrence when there is one.
        std::size_t keeper = starts.front();
        for (std::size_t st : starts) {
          const auto& flags = deleted[live[st].sentence];
          if (std::all_of(flags.begin(), flags.begin() + static_cast<std::ptrdiff_t>(live[st].word),
                          [](bool d) { return d; })) {
            keeper = st;
            break;
          }
        }
        for (std::size_t st : starts) {
          if (st == keeper) continue;
          bool clash = false;
          for (std::size_t k = 0; k < n; ++k)
            if (deleted[live[st + k].sentence][live[st + k].word]) clash = true;
          if (clash) continue;
          for (std::size_t k = 0; k < n; ++k) deleted[live[st + k].sentence][live[st + k].word] = true;
          changed = true;
        }
      }
      if (changed) break;
    }
  }

  CitedAnswer out;
  for (std::size_t s = 0; s < words.size(); ++s) {
    std::string rebuilt;
    for (std::size_t w = 0; w < words[s].size(); ++w) {
      if (deleted[s][w]) continue;
      if (!rebuilt.empty()) rebuilt.push_back(' ');
      rebuilt += words[s][w];
    }
    if (rebuilt.empty()) continue;
    const std::string& original = answer.sentences[s].text;
    std::size_t term_start = original.size();
    while (term_start > 0 && is_terminator(original[term_start - 1])) --term_start;
    const std::string terminal = original.substr(term_start);
    while (!rebuilt.empty() && (rebuilt.back() == ',' || rebuilt.back() == ';' || rebuilt.back() == ':'))
      rebuilt.pop_back();
    if (!terminal.empty() && !is_terminator(rebuilt.back())) rebuilt += terminal;
    out.sentences.push_back(Sentence{std::move(rebuilt), answer.sentences[s].citations});
  }
  return out;
}

std::string mock_generate(const MockScript& script, const GenerationRequest& request) {
  const std::string_view prompt = request.user;
  const auto question = line_after(prompt, "Question: ");
  const std::string* base = nullptr;
  if (question) {
    auto it = script.base_answers.find(text::collapse_whitespace(*question));
    if (it != script.base_answers.end()) base = &it->second;
  }

  const bool refinement = prompt.find(refinement_instruction()) != std::string_view::npos;
  if (script.mode == MockMode::kResponsive && refinement) {
    const auto previous = line_after(prompt, "Previous answer: ");
    if (!previous) throw ScriptError("refinement prompt has no previous answer");
    const DocumentSet docs = docs_from_prompt(prompt);
    CitedAnswer answer = parse_cited_answer(*previous);
    if (feedback_band(prompt, Aspect::kCorrectness) == Band::kCorrective)
      answer = ground_weakest_sentence(std::move(answer), docs);
    if (needs_repair(feedback_band(prompt, Aspect::kFluency))) answer = remove_repeated_ngrams(answer);
    if (needs_repair(feedback_band(prompt, Aspect::kCitation))) answer = restore_one_citation(std::move(answer), docs);
    return render_cited_answer(answer);
  }

  if (base != nullptr) return *base;
  if (script.strict)
    throw ScriptError("mock script has no answer for question: " + question.value_or("<none>"));
  return script.fallback_answer;
}

}  // namespace ifl
