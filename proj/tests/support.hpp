#ifndef IFL_TESTS_SUPPORT_HPP_
#define IFL_TESTS_SUPPORT_HPP_

// Test-side oracles and generators. Everything here is written against the
// definitions, not against the library code paths it checks.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "ifl/answer.hpp"
#include "ifl/critic.hpp"
#include "ifl/metrics.hpp"
#include "ifl/random.hpp"

namespace ifl::testing {

// log(1 + exp(x)) in long double.
inline long double softplus_ld(long double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline long double dot_ld(const AspectHead& head, const FeatureVector& f) {
  long double s = head.bias;
  for (std::size_t i = 0; i < kFeatureCount; ++i) s += static_cast<long double>(head.weights[i]) * f[i];
  return s;
}

// Pairwise loss of one example in long double, summed over its 3 negatives.
inline long double example_loss_ld(const AspectHead& head, const FeaturizedExample& ex) {
  const long double pos = dot_ld(head, ex.positive);
  long double total = 0;
  for (const auto& neg : ex.negatives) total += softplus_ld(dot_ld(head, neg) - pos);
  return total;
}

// Deterministic but otherwise arbitrary judge: entailment is a fixed
// pseudo-random function of (premise, hypothesis).
class HashJudge final : public EntailmentJudge {
 public:
  explicit HashJudge(std::uint64_t salt) : salt_(salt) {}
  bool entails(std::string_view premise, std::string_view hypothesis) const override {
    const std::uint64_t h = fnv1a(hypothesis, fnv1a(premise, 0xcbf29ce484222325ULL ^ salt_));
    return (mix_seed(h, "judge") & 3) != 0;
  }

 private:
  std::uint64_t salt_;
};

// Citation recall/precision by enumerating every subset of each sentence's
// citation set and reading the definitions off the subset table.
struct OracleCitation {
  double recall = 0.0;
  double precision = 0.0;
};

inline OracleCitation oracle_citation(const CitedAnswer& answer, const DocumentSet& docs,
                                      const EntailmentJudge& judge) {
  std::size_t supported = 0, citations = 0, relevant = 0;
  for (const auto& s : answer.sentences) {
    const std::vector<int> cited(s.citations.begin(), s.citations.end());
    const std::size_t n = cited.size();
    std::vector<bool> entails(std::size_t{1} << n, false);
    for (std::size_t mask = 1; mask < entails.size(); ++mask) {
      std::string premise;
      for (std::size_t i = 0; i < n; ++i) {
        if (!(mask & (std::size_t{1} << i))) continue;
        const Document* d = docs.find(cited[i]);
        if (!d) continue;
        if (!premise.empty()) premise += "\n";
        premise += d->title.empty() ? d->body : d->title + "\n" + d->body;
      }
      entails[mask] = judge.entails(premise, s.text);
    }
    const std::size_t full = entails.size() - 1;
    if (n > 0 && entails[full]) ++supported;
    citations += n;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t alone = std::size_t{1} << i;
      const std::size_t rest = full & ~alone;
      if (entails[full] && (entails[alone] || !entails[rest])) ++relevant;
    }
  }
  OracleCitation out;
  if (!answer.sentences.empty()) out.recall = static_cast<double>(supported) / answer.sentences.size();
  if (citations > 0) out.precision = static_cast<double>(relevant) / citations;
  return out;
}

// Random answers whose sentences are built from document facts, so the
// lexical judge sees a mix of supported and unsupported claims.
inline CitedAnswer random_grounded_answer(Rng& rng, const CorpusRecord& record) {
  std::vector<std::string> facts;
  for (const auto& d : record.docs) {
    for (const auto& s : parse_cited_answer(d.body).sentences) facts.push_back(s.text);
  }
  CitedAnswer a;
  const std::size_t n = 1 + rng.uniform_index(3);
  for (std::size_t i = 0; i < n; ++i) {
    Sentence s;
    s.text = facts[rng.uniform_index(facts.size())];
    if (rng.bernoulli(0.3)) {
      // Splice two facts into one sentence so it needs two documents.
      std::string other = facts[rng.uniform_index(facts.size())];
      s.text.pop_back();
      s.text += " and " + other;
    }
    const std::size_t c = rng.uniform_index(4);
    for (std::size_t k = 0; k < c; ++k) s.citations.insert(1 + static_cast<int>(rng.uniform_index(5)));
    a.sentences.push_back(s);
  }
  return a;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ifl-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace ifl::testing

#endif  // IFL_TESTS_SUPPORT_HPP_
