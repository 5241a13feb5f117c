#pragma once

// Data association: a ground-truth oracle, a gated greedy matcher over
// position and caption similarity, the memory commit step, and the
// identity-correctness metrics.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "objmem/core.hpp"
#include "objmem/memory.hpp"
#include "objmem/oracle.hpp"
#include "objmem/protocol.hpp"
#include "objmem/world.hpp"

namespace objmem {

struct AssociationConfig {
  double distance_gate = 1.0;            // meters
  double caption_similarity_gate = 0.3;  // cosine
  double weight_spatial = 0.6;

  std::vector<std::string> problems() const {
    std::vector<std::string> out;
    if (!std::isfinite(distance_gate) || distance_gate <= 0.0) {
      out.push_back("association.distance_gate must be finite and > 0");
    }
    if (!(caption_similarity_gate >= 0.0 && caption_similarity_gate <= 1.0)) {
      out.push_back("association.caption_similarity_gate must lie in [0, 1]");
    }
    if (!(weight_spatial >= 0.0 && weight_spatial <= 1.0)) {
      out.push_back("association.weight_spatial must lie in [0, 1]");
    }
    return out;
  }
};

struct AssociationRecord {
  int step = 0;
  MatchDecision decision;
  PersistentId predicted_persistent_id = 0;
  TrueId true_object_id = 0;

  bool operator==(const AssociationRecord&) const = default;
};

// true object -> persistent id of the entry created for it (oracle mode).
class IdentityRegistry {
 public:
  std::optional<PersistentId> find(TrueId id) const {
    auto it = bindings_.find(id);
    if (it == bindings_.end()) return std::nullopt;
    return it->second;
  }
  void bind(TrueId id, PersistentId pid) { bindings_.emplace(id, pid); }
  std::size_t size() const { return bindings_.size(); }

 private:
  std::map<TrueId, PersistentId> bindings_;
};

inline std::vector<MatchDecision> associate_oracle(const Observation& observation,
                                                   const EpisodicMemory& memory,
                                                   const IdentityRegistry& registry) {
  std::vector<MatchDecision> out;
  out.reserve(observation.detections.size());
  for (const auto& d : observation.detections) {
    MatchDecision m{d.transient_id, std::nullopt};
    if (auto pid = registry.find(GroundTruth::of(d)); pid && memory.contains(*pid)) m.target = *pid;
    out.push_back(m);
  }
  return out;
}

// Score of pairing one detection with one memory entry, and whether the pair
// passes both the distance gate and the caption-similarity gate.
struct PairScore {
  double score = 0.0;
  double distance = 0.0;
  double similarity = 0.0;
  bool eligible = false;
};

inline PairScore score_pair(const Detection& detection, const std::string& caption,
                            const ObjectEntry& entry, const AssociationConfig& cfg,
                            EmbeddingCache& cache) {
  PairScore s;
  s.distance = distance(detection.world_position, entry.position);
  for (const auto& c : entry.captions) s.similarity = std::max(s.similarity, cache.similarity(caption, c.text));
  const double spatial = std::max(0.0, 1.0 - s.distance / cfg.distance_gate);
  s.score = cfg.weight_spatial * spatial + (1.0 - cfg.weight_spatial) * s.similarity;
  s.eligible = s.distance <= cfg.distance_gate && s.similarity >= cfg.caption_similarity_gate;
  return s;
}

// Greedy one-to-one assignment in descending score (ties: lower transient id,
// then lower persistent id); detections left unassigned become NEW_ID.
inline std::vector<MatchDecision> associate_heuristic(const Observation& observation,
                                                      const std::vector<Caption>& captions,
                                                      const EpisodicMemory& memory,
                                                      const AssociationConfig& cfg,
                                                      EmbeddingCache& cache) {
  if (captions.size() != observation.detections.size()) {
    throw AssociationError("associate_heuristic: one caption per detection required");
  }
  struct Candidate {
    double score;
    TransientId transient;
    PersistentId persistent;
    std::size_t detection;
  };
  std::vector<Candidate> candidates;
  for (std::size_t k = 0; k < observation.detections.size(); ++k) {
    const auto& d = observation.detections[k];
    for (const auto& e : memory.entries()) {
      const PairScore s = score_pair(d, captions[k].text, e, cfg, cache);
      if (s.eligible) candidates.push_back({s.score, d.transient_id, e.id, k});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.transient != b.transient) return a.transient < b.transient;
    return a.persistent < b.persistent;
  });
  std::vector<MatchDecision> out;
  for (const auto& d : observation.detections) out.push_back({d.transient_id, std::nullopt});
  std::set<PersistentId> used;
  for (const auto& c : candidates) {
    if (out[c.detection].target || used.count(c.persistent)) continue;
    out[c.detection].target = c.persistent;
    used.insert(c.persistent);
  }
  return out;
}

// Commits one frame's decisions. Validates the whole batch before touching
// memory. Returns the persistent id each detection ended up with, in
// detection order. NEW_ID commits bind the registry when one is given.
inline std::vector<PersistentId> apply_matches(EpisodicMemory& memory,
                                               const std::vector<MatchDecision>& decisions,
                                               const Observation& observation,
                                               const std::vector<Caption>& captions,
                                               IdentityRegistry* registry = nullptr) {
  const auto& dets = observation.detections;
  if (captions.size() != dets.size()) throw AssociationError("apply_matches: one caption per detection required");
  std::unordered_map<TransientId, const MatchDecision*> by_transient;
  for (const auto& m : decisions) {
    if (!by_transient.emplace(m.transient_id, &m).second) {
      throw AssociationError("apply_matches: transient id " + std::to_string(m.transient_id) + " decided twice");
    }
  }
  if (by_transient.size() != dets.size()) throw AssociationError("apply_matches: decisions do not cover the frame");
  std::set<PersistentId> targets;
  for (const auto& d : dets) {
    auto it = by_transient.find(d.transient_id);
    if (it == by_transient.end()) {
      throw AssociationError("apply_matches: no decision for transient id " + std::to_string(d.transient_id));
    }
    if (const auto& t = it->second->target) {
      if (!memory.contains(*t)) throw AssociationError("apply_matches: unknown persistent id " + std::to_string(*t));
      if (!targets.insert(*t).second) {
        throw AssociationError("apply_matches: persistent id " + std::to_string(*t) + " matched twice");
      }
    }
  }
  std::vector<PersistentId> out;
  out.reserve(dets.size());
  for (std::size_t k = 0; k < dets.size(); ++k) {
    const MatchDecision& m = *by_transient.at(dets[k].transient_id);
    if (m.target) {
      memory.update_entry(*m.target, dets[k], captions[k]);
      out.push_back(*m.target);
    } else {
      const PersistentId pid = memory.insert_new(dets[k], captions[k]);
      if (registry && !registry->find(GroundTruth::of(dets[k]))) registry->bind(GroundTruth::of(dets[k]), pid);
      out.push_back(pid);
    }
  }
  return out;
}

inline std::vector<AssociationRecord> make_records(int step, const std::vector<MatchDecision>& decisions,
                                                   const Observation& observation,
                                                   const std::vector<PersistentId>& committed) {
  std::vector<AssociationRecord> out;
  for (std::size_t k = 0; k < observation.detections.size(); ++k) {
    const auto& d = observation.detections[k];
    auto it = std::find_if(decisions.begin(), decisions.end(),
                           [&](const MatchDecision& m) { return m.transient_id == d.transient_id; });
    if (it == decisions.end()) throw AssociationError("make_records: detection without decision");
    out.push_back({step, *it, committed.at(k), GroundTruth::of(d)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline PrecisionRecall precision_recall(std::size_t true_positive, std::size_t predicted, std::size_t actual) {
  PrecisionRecall pr;
  if (predicted == 0 && actual == 0) return {1.0, 1.0, 1.0};
  pr.precision = predicted == 0 ? 0.0 : static_cast<double>(true_positive) / static_cast<double>(predicted);
  pr.recall = actual == 0 ? 0.0 : static_cast<double>(true_positive) / static_cast<double>(actual);
  pr.f1 = pr.precision + pr.recall == 0.0 ? 0.0 : 2.0 * pr.precision * pr.recall / (pr.precision + pr.recall);
  return pr;
}

struct AssociationMetrics {
  std::size_t total = 0;
  std::size_t correct_matches = 0;
  std::size_t correct_news = 0;
  std::size_t idsw = 0;
  std::size_t frag = 0;
  double accuracy = 0.0;
  PrecisionRecall match;
  PrecisionRecall fresh;  // NEW_ID decisions
};

// Replays the tape in order. A persistent id is owned by the true object of
// the detection that created it. A match is correct when the matched id is
// owned by the detection's object (else an identity switch); NEW_ID is
// correct when the object has no id yet (else a fragmentation).
inline AssociationMetrics evaluate_association(const std::vector<AssociationRecord>& records) {
  if (records.empty()) throw MetricsError("association metrics undefined on an empty record set");
  AssociationMetrics m;
  std::unordered_map<PersistentId, TrueId> owner;
  std::set<TrueId> bound;
  std::size_t match_decisions = 0;
  std::size_t new_decisions = 0;
  std::size_t bound_at_decision = 0;
  for (const auto& r : records) {
    const bool known = bound.count(r.true_object_id) != 0;
    if (known) ++bound_at_decision;
    if (r.decision.is_new()) {
      ++new_decisions;
      if (known) ++m.frag;
      else ++m.correct_news;
      owner.emplace(r.predicted_persistent_id, r.true_object_id);
      bound.insert(r.true_object_id);
    } else {
      ++match_decisions;
      auto it = owner.find(*r.decision.target);
      if (it != owner.end() && it->second == r.true_object_id) ++m.correct_matches;
      else ++m.idsw;
    }
  }
  m.total = records.size();
  m.accuracy = static_cast<double>(m.correct_matches + m.correct_news) / static_cast<double>(m.total);
  m.match = precision_recall(m.correct_matches, match_decisions, bound_at_decision);
  m.fresh = precision_recall(m.correct_news, new_decisions, m.total - bound_at_decision);
  return m;
}

}  // namespace objmem
