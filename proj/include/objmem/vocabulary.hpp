#pragma once

#include <algorithm>
#include <string>
#include <unordered_map>
#include <vector>

#include "objmem/core.hpp"

namespace objmem {

enum class TokenKind { category, modifier, context, unknown };

// Attribute vocabulary of a world. Modifier order is the canonical rendering
// order. Context tokens are view-dependent clutter terms; they may appear in
// individual captions but never belong to an object's identity.
class Vocabulary {
 public:
  Vocabulary() = default;

  Vocabulary(std::vector<std::string> categories, std::vector<std::string> modifiers,
             std::vector<std::string> context,
             std::vector<std::vector<std::string>> confusable_groups)
      : categories_(std::move(categories)),
        modifiers_(std::move(modifiers)),
        context_(std::move(context)),
        confusable_groups_(std::move(confusable_groups)) {
    validate();
    build_index();
  }

  static Vocabulary household() {
    return Vocabulary(
        {"couch", "sofa", "armchair", "bed", "cot", "table", "desk", "chair", "stool", "lamp",
         "cabinet", "dresser", "shelf", "plant", "tv", "monitor", "sink", "toilet"},
        {"small", "large", "tall", "black", "white", "red", "blue", "green", "brown", "gray",
         "pink", "yellow", "leather", "wooden", "metal", "fabric", "glass", "plastic",
         "striped", "dotted"},
        {"pillow", "wall", "window", "shadow", "corner", "floor", "rug", "doorway",
         "background", "clutter"},
        {{"couch", "sofa", "armchair"},
         {"bed", "cot"},
         {"table", "desk"},
         {"chair", "stool", "armchair"},
         {"cabinet", "dresser", "shelf"},
         {"tv", "monitor"},
         {"sink", "toilet"}});
  }

  const std::vector<std::string>& categories() const { return categories_; }
  const std::vector<std::string>& modifiers() const { return modifiers_; }
  const std::vector<std::string>& context() const { return context_; }
  const std::vector<std::vector<std::string>>& confusable_groups() const {
    return confusable_groups_;
  }

  TokenKind kind(const std::string& token) const {
    auto it = kinds_.find(token);
    return it == kinds_.end() ? TokenKind::unknown : it->second;
  }

  // Position of a modifier in canonical order; modifiers_.size() if unknown.
  std::size_t modifier_rank(const std::string& token) const {
    auto it = std::find(modifiers_.begin(), modifiers_.end(), token);
    return static_cast<std::size_t>(it - modifiers_.begin());
  }

  std::size_t category_rank(const std::string& token) const {
    auto it = std::find(categories_.begin(), categories_.end(), token);
    return static_cast<std::size_t>(it - categories_.begin());
  }

  // Categories a captioner may confuse with `category`, in vocabulary order,
  // excluding `category` itself.
  std::vector<std::string> confusables(const std::string& category) const {
    std::vector<std::string> out;
    for (const auto& group : confusable_groups_) {
      if (std::find(group.begin(), group.end(), category) == group.end()) continue;
      for (const auto& c : group) {
        if (c != category && std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
      }
    }
    std::sort(out.begin(), out.end(), [&](const std::string& a, const std::string& b) {
      return category_rank(a) < category_rank(b);
    });
    return out;
  }

  // Every vocabulary token in embedding order: categories, modifiers, context.
  std::vector<std::string> all_tokens() const {
    std::vector<std::string> out = categories_;
    out.insert(out.end(), modifiers_.begin(), modifiers_.end());
    out.insert(out.end(), context_.begin(), context_.end());
    return out;
  }

  bool empty() const { return categories_.empty(); }

  bool operator==(const Vocabulary& other) const {
    return categories_ == other.categories_ && modifiers_ == other.modifiers_ &&
           context_ == other.context_ && confusable_groups_ == other.confusable_groups_;
  }

 private:
  void validate() const {
    if (categories_.empty()) throw Error("vocabulary: no categories");
    std::vector<std::string> seen;
    for (const auto& t : all_tokens()) {
      if (t.empty()) throw Error("vocabulary: empty token");
      for (char c : t) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') {
          throw Error("vocabulary: token '" + t + "' contains characters outside [A-Za-z0-9_-]");
        }
      }
      if (std::find(seen.begin(), seen.end(), t) != seen.end()) {
        throw Error("vocabulary: duplicate token '" + t + "'");
      }
      seen.push_back(t);
    }
    for (const auto& group : confusable_groups_) {
      for (const auto& c : group) {
        if (std::find(categories_.begin(), categories_.end(), c) == categories_.end()) {
          throw Error("vocabulary: confusable '" + c + "' is not a category");
        }
      }
    }
  }

  void build_index() {
    for (const auto& t : categories_) kinds_[t] = TokenKind::category;
    for (const auto& t : modifiers_) kinds_[t] = TokenKind::modifier;
    for (const auto& t : context_) kinds_[t] = TokenKind::context;
  }

  std::vector<std::string> categories_;
  std::vector<std::string> modifiers_;
  std::vector<std::string> context_;
  std::vector<std::vector<std::string>> confusable_groups_;
  std::unordered_map<std::string, TokenKind> kinds_;
};

}  // namespace objmem
