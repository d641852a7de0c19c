#include "ifl/aspect.hpp"

#include <string>

#include "ifl/error.hpp"

namespace ifl {

std::string_view aspect_name(Aspect aspect) {
  switch (aspect) {
    case Aspect::kFluency: return "fluency";
    case Aspect::kCorrectness: return "correctness";
    case Aspect::kCitation: return "citation";
  }
  return "unknown";
}

std::string_view aspect_title(Aspect aspect) {
  switch (aspect) {
    case Aspect::kFluency: return "Fluency";
    case Aspect::kCorrectness: return "Correctness";
    case Aspect::kCitation: return "Citation";
  }
  return "Unknown";
}

Aspect aspect_from_name(std::string_view name) {
  for (Aspect a : kAllAspects)
    if (aspect_name(a) == name) return a;
  throw SchemaError("unknown aspect: " + std::string(name));
}

}  // namespace ifl
