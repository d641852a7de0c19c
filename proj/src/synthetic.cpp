#include "ifl/synthetic.hpp"

#include <array>
#include <cstdio>
#include <unordered_set>

#include "ifl/corpus.hpp"
#include "ifl/random.hpp"
#include "ifl/text.hpp"

namespace ifl {

namespace {

constexpr std::array<std::string_view, 24> kSyllables = {
    "ka", "ra", "lo", "ve", "mi", "dor", "tan", "bel", "sha", "qui", "zen", "mor",
    "fi", "gal", "ne", "tor", "lin", "ves", "ar", "ul", "pe", "so", "dri", "nak"};

class NameSource {
 public:
  explicit NameSource(std::uint64_t seed) : rng_(seed) {}

  std::string next() {
    for (;;) {
      const std::size_t parts = 2 + rng_.uniform_index(2);
      std::string name;
      for (std::size_t i = 0; i < parts; ++i) name += kSyllables[rng_.uniform_index(kSyllables.size())];
      name[0] = static_cast<char>(name[0] - 'a' + 'A');
      if (used_.insert(name).second) return name;
    }
  }

 private:
  Rng rng_;
  std::unordered_set<std::string> used_;
};

struct City {
  std::string name;
  std::string province;
  std::string population;  // "4.12"
  std::string founded;
  std::string founder;
  std::string river;
};

std::string body_of(const City& c) {
  return c.name + " is a city in the province of " + c.province + ". " + c.name + " is home to " +
         c.population + " million people. " + c.name + " was founded in " + c.founded + " by " + c.founder +
         ". The main river of " + c.name + " is the " + c.river + ".";
}

}  // namespace

std::vector<CorpusRecord> synthetic_corpus(std::size_t questions, std::uint64_t seed) {
  NameSource names(mix_seed(seed, "names"));
  Rng rng(mix_seed(seed, "facts"));
  std::vector<CorpusRecord> corpus;
  corpus.reserve(questions);
  for (std::size_t q = 0; q < questions; ++q) {
    std::array<City, 4> cities;
    for (auto& c : cities) {
      c.name = names.next();
      c.province = names.next();
      char pop[16];
      std::snprintf(pop, sizeof pop, "%zu.%02zu", 1 + rng.uniform_index(9), rng.uniform_index(100));
      c.population = pop;
      c.founded = std::to_string(1200 + rng.uniform_index(800));
      c.founder = names.next() + " " + names.next();
      c.river = names.next() + " River";
    }
    const int target = static_cast<int>(rng.uniform_index(4)) + 1;
    std::vector<Document> docs;
    for (int i = 0; i < 4; ++i) docs.push_back(Document{i + 1, cities[i].name, body_of(cities[i])});

    const City& s = cities[target - 1];
    CorpusRecord r;
    r.question.id = "syn-" + std::to_string(q);
    r.question.text = "What is the population of " + s.name + ", when was it founded, and what is its main river?";
    r.question.gold_aspects = {{s.population + " million"}, {s.founded}, {s.river}};
    r.docs = DocumentSet(std::move(docs));
    r.answer.sentences = {
        Sentence{s.name + " is home to " + s.population + " million people.", {target}},
        Sentence{s.name + " was founded in " + s.founded + " by " + s.founder + ".", {target}},
        Sentence{"The main river of " + s.name + " is the " + s.river + ".", {target}},
    };
    if (rng.bernoulli(0.5)) {
      int other = static_cast<int>(rng.uniform_index(3)) + 1;
      if (other >= target) ++other;
      const City& d = cities[other - 1];
      r.answer.sentences.push_back(Sentence{d.name + " is a city in the province of " + d.province + ".", {other}});
    }
    r.long_answer = body_of(s);
    corpus.push_back(std::move(r));
  }
  return corpus;
}

CitedAnswer degrade_answer(const CorpusRecord& record, std::uint64_t seed) {
  CitedAnswer answer = record.answer;
  if (answer.empty()) return answer;
  try {
    answer = corrupt_citations(answer, static_cast<int>(record.docs.size()), CorruptionMode::kMixed,
                               mix_seed(seed, "degrade-citation:" + record.question.id));
  } catch (const CorruptionError&) {
  }
  return inject_repetition(answer, mix_seed(seed, "degrade-fluency:" + record.question.id));
}

MockScript script_from_corpus(std::span<const CorpusRecord> corpus, MockMode mode, bool degrade,
                              std::uint64_t seed) {
  MockScript script;
  script.mode = mode;
  for (const auto& r : corpus)
    script.base_answers[text::collapse_whitespace(r.question.text)] = render_cited_answer(degrade ? degrade_answer(r, seed) : r.answer);
  return script;
}

}  // namespace ifl
