#pragma once

// Viewpoint-conditioned stochastic captioner and the deterministic
// term-frequency text embedding used for caption similarity.

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "objmem/attributes.hpp"
#include "objmem/core.hpp"
#include "objmem/vocabulary.hpp"
#include "objmem/world.hpp"

namespace objmem {

// Corruption probability of one attribute seen at normalized distance d and
// normalized view angle a:  clamp(base + k_d * d + k_a * a, 0, p_max), with
// base = p0 for modifiers and context clutter, base = p_cat for the category.
struct NoiseModel {
  double p0 = 0.0;
  double k_d = 0.0;
  double k_a = 0.0;
  double p_max = 1.0;
  double p_cat = 0.0;

  static NoiseModel noiseless() { return NoiseModel{0.0, 0.0, 0.0, 0.0, 0.0}; }

  bool is_noiseless() const { return p0 == 0.0 && k_d == 0.0 && k_a == 0.0 && p_cat == 0.0; }

  double modifier_probability(double distance_norm, double angle_norm) const {
    return std::clamp(p0 + k_d * distance_norm + k_a * angle_norm, 0.0, p_max);
  }
  double category_probability(double distance_norm, double angle_norm) const {
    if (p_cat == 0.0) return 0.0;
    return std::clamp(p_cat + k_d * distance_norm + k_a * angle_norm, 0.0, p_max);
  }
};

struct Caption {
  std::string text;
  AttributeSet attributes;  // realized (possibly corrupted) attributes
  int source_step = 0;
  AgentPose source_pose;
};

struct ViewGeometry {
  double distance_norm = 0.0;  // distance / max_range
  double angle_norm = 0.0;     // |bearing| / half field of view
};

inline ViewGeometry view_geometry(const WorldObject& object, const AgentPose& pose,
                                  const FieldOfView& fov) {
  ViewGeometry g;
  g.distance_norm = cell_distance(pose.cell, object.cell) / fov.max_range_cells;
  g.angle_norm = std::fabs(relative_bearing(pose, object.cell)) / fov.half_angle();
  return g;
}

// Draws one caption of `object` as seen from `pose`. Each ground-truth
// modifier is independently corrupted (dropped or replaced by a modifier not
// describing the object); the category may flip to a confusable category; a
// view-dependent context term may be appended.
inline Caption caption_object(const WorldObject& object, const AgentPose& pose,
                              const FieldOfView& fov, const NoiseModel& noise,
                              const Vocabulary& vocab, Rng& rng, int step = 0) {
  Caption cap;
  cap.source_step = step;
  cap.source_pose = pose;
  const AttributeSet& truth = object.attributes;
  if (noise.is_noiseless()) {
    cap.attributes = AttributeSet{truth.category, truth.modifiers, {}};
    cap.text = render_caption(cap.attributes);
    return cap;
  }

  const ViewGeometry g = view_geometry(object, pose, fov);
  const double p = noise.modifier_probability(g.distance_norm, g.angle_norm);
  const double p_cat = noise.category_probability(g.distance_norm, g.angle_norm);

  AttributeSet out;
  std::vector<std::string> unused;
  for (const auto& m : vocab.modifiers()) {
    if (std::find(truth.modifiers.begin(), truth.modifiers.end(), m) == truth.modifiers.end()) {
      unused.push_back(m);
    }
  }
  for (const auto& m : truth.modifiers) {
    if (!rng.bernoulli(p)) {
      out.modifiers.push_back(m);
      continue;
    }
    const bool substitute = rng.bernoulli(0.5);
    if (substitute && !unused.empty()) {
      const std::size_t k = rng.index(unused.size());
      out.modifiers.push_back(unused[k]);
      unused.erase(unused.begin() + static_cast<std::ptrdiff_t>(k));
    }
  }
  std::sort(out.modifiers.begin(), out.modifiers.end(),
            [&](const std::string& a, const std::string& b) {
              return vocab.modifier_rank(a) < vocab.modifier_rank(b);
            });

  out.category = truth.category;
  if (rng.bernoulli(p_cat)) {
    const auto alternatives = vocab.confusables(truth.category);
    if (!alternatives.empty()) out.category = alternatives[rng.index(alternatives.size())];
  }

  if (!vocab.context().empty() && rng.bernoulli(p)) {
    out.context.push_back(vocab.context()[rng.index(vocab.context().size())]);
  }

  cap.attributes = std::move(out);
  cap.text = render_caption(cap.attributes);
  return cap;
}

// ---------------------------------------------------------------------------
// Embedding

struct EmbeddingVector {
  std::vector<double> components;

  bool is_zero() const {
    return std::all_of(components.begin(), components.end(), [](double v) { return v == 0.0; });
  }
  bool operator==(const EmbeddingVector&) const = default;
};

inline bool is_stop_token(std::string_view t) {
  return t == "a" || t == "the" || t == "with" || t == "in" || t == "on";
}

// Lowercased words with leading/trailing punctuation stripped.
inline std::vector<std::string> content_words(std::string_view text) {
  std::vector<std::string> out;
  for (auto& raw : split_whitespace(text)) {
    std::size_t b = 0;
    std::size_t e = raw.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(raw[b])) && raw[b] != '_') ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(raw[e - 1])) && raw[e - 1] != '_') --e;
    std::string w = raw.substr(b, e - b);
    for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (w.empty() || is_stop_token(w)) continue;
    out.push_back(std::move(w));
  }
  return out;
}

// L2-normalized term frequencies over the vocabulary plus one shared
// out-of-vocabulary component (the last one).
class Embedder {
 public:
  explicit Embedder(const Vocabulary& vocab) {
    for (const auto& t : vocab.all_tokens()) index_.emplace(t, index_.size());
    dimension_ = index_.size() + 1;
  }

  std::size_t dimension() const { return dimension_; }

  EmbeddingVector embed(std::string_view text) const {
    EmbeddingVector v{std::vector<double>(dimension_, 0.0)};
    for (const auto& w : content_words(text)) {
      auto it = index_.find(w);
      v.components[it == index_.end() ? dimension_ - 1 : it->second] += 1.0;
    }
    double norm = 0.0;
    for (double c : v.components) norm += c * c;
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (double& c : v.components) c /= norm;
    }
    return v;
  }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t dimension_ = 1;
};

inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.components.size() != b.components.size()) {
    throw Error("cosine_similarity: dimension mismatch");
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.components.size(); ++i) {
    dot += a.components[i] * b.components[i];
    na += a.components[i] * a.components[i];
    nb += b.components[i] * b.components[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

// Per-episode memoization of embeddings and pairwise similarities. Not
// thread-safe; each episode owns one.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(const Embedder& embedder) : embedder_(&embedder) {}

  const EmbeddingVector& embed(const std::string& text) {
    auto it = cache_.find(text);
    if (it == cache_.end()) it = cache_.emplace(text, embedder_->embed(text)).first;
    return it->second;
  }

  double similarity(const std::string& a, const std::string& b) {
    if (a == b) {
      return embed(a).is_zero() ? 0.0 : 1.0;
    }
    return cosine_similarity(embed(a), embed(b));
  }

  const Embedder& embedder() const { return *embedder_; }

 private:
  const Embedder* embedder_;
  std::unordered_map<std::string, EmbeddingVector> cache_;
};

}  // namespace objmem
