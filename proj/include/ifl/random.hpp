#ifndef IFL_RANDOM_HPP_
#define IFL_RANDOM_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace ifl {

// Seeded generator with portable derived draws. std::uniform_*_distribution
// is implementation-defined, so draws are computed from raw engine output to
// keep corpora and runs identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  // Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
};

// FNV-1a over bytes, for salting seeds and for digests.
std::uint64_t fnv1a(std::string_view bytes,
                    std::uint64_t basis = 0xcbf29ce484222325ULL);

// Derives an independent seed for a named sub-stream.
inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt) {
  std::uint64_t z = fnv1a(salt) ^ (seed + 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace ifl

#endif  // IFL_RANDOM_HPP_
