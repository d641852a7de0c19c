#ifndef IFL_ASPECT_HPP_
#define IFL_ASPECT_HPP_

#include <array>
#include <cstddef>
#include <string_view>

namespace ifl {

enum class Aspect { kFluency = 0, kCorrectness = 1, kCitation = 2 };

// Canonical order: fluency, correctness, citation.
inline constexpr std::array<Aspect, 3> kAllAspects = {Aspect::kFluency, Aspect::kCorrectness,
                                                      Aspect::kCitation};

inline constexpr std::size_t aspect_slot(Aspect a) { return static_cast<std::size_t>(a); }

// Serialization name: "fluency", "correctness", "citation".
std::string_view aspect_name(Aspect aspect);

// Display name: "Fluency", "Correctness", "Citation".
std::string_view aspect_title(Aspect aspect);

// Accepts the serialization name; throws SchemaError otherwise.
Aspect aspect_from_name(std::string_view name);

// Fixed-size map keyed by aspect.
template <typename T>
struct PerAspect {
  std::array<T, 3> values{};

  T& operator[](Aspect a) { return values[aspect_slot(a)]; }
  const T& operator[](Aspect a) const { return values[aspect_slot(a)]; }

  bool operator==(const PerAspect&) const = default;
};

}  // namespace ifl

#endif  // IFL_ASPECT_HPP_
