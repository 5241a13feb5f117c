#pragma once

#include <string>
#include <vector>

#include "objmem/core.hpp"

namespace objmem {

// Latent description of an object: a category, modifiers in canonical
// vocabulary order, and optional view-dependent context terms.
struct AttributeSet {
  std::string category;
  std::vector<std::string> modifiers;
  std::vector<std::string> context;

  bool operator==(const AttributeSet&) const = default;
};

// "a {modifiers} {category}" followed by " with {context}" when context terms
// are present. Pure function of the attribute set.
inline std::string render_caption(const AttributeSet& attrs) {
  std::string out = "a";
  for (const auto& m : attrs.modifiers) {
    out += ' ';
    out += m;
  }
  if (!attrs.category.empty()) {
    out += ' ';
    out += attrs.category;
  }
  if (!attrs.context.empty()) {
    out += " with";
    for (const auto& c : attrs.context) {
      out += ' ';
      out += c;
    }
  }
  return out;
}

}  // namespace objmem
