#pragma once

// Consensus pseudo-captions: greedy coverage-based view selection and
// frequency-weighted attribute voting over an entry's caption histogram.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "objmem/attributes.hpp"
#include "objmem/core.hpp"
#include "objmem/memory.hpp"
#include "objmem/oracle.hpp"
#include "objmem/vocabulary.hpp"
#include "objmem/world.hpp"

namespace objmem {

struct ViewRecord {
  int step = 0;
  AgentPose pose;
  std::vector<Cell> covered_cells;  // object footprint cells seen from this pose

  bool operator==(const ViewRecord&) const = default;
};

struct AggregatorConfig {
  double vote_threshold = 0.5;
  int view_budget = 5;

  std::vector<std::string> problems() const {
    std::vector<std::string> out;
    if (!(vote_threshold >= 0.0 && vote_threshold <= 1.0)) {
      out.emplace_back("aggregator.vote_threshold must lie in [0, 1]");
    }
    if (view_budget < 1) out.emplace_back("aggregator.view_budget must be >= 1");
    return out;
  }
};

namespace detail {

// Bearing of a pose's cell as seen from `ref` (col, row).
inline double bearing_from(double ref_col, double ref_row, const Cell& c) {
  return std::atan2(c.row - ref_row, c.col - ref_col);
}

}  // namespace detail

// Greedy maximum coverage: each pick adds the most not-yet-covered cells; ties
// go to the record whose bearing around the covered region is farthest from
// every already-picked record, then to the earlier step.
inline std::vector<ViewRecord> select_informative_views(const std::vector<ViewRecord>& records, int budget) {
  if (budget < 1) throw Error("select_informative_views: budget must be >= 1");
  std::vector<ViewRecord> out;
  if (records.empty()) return out;

  double ref_col = 0.0;
  double ref_row = 0.0;
  std::size_t n = 0;
  for (const auto& r : records) {
    for (const Cell& c : r.covered_cells) {
      ref_col += c.col;
      ref_row += c.row;
      ++n;
    }
  }
  if (n > 0) {
    ref_col /= static_cast<double>(n);
    ref_row /= static_cast<double>(n);
  }

  std::set<Cell> covered;
  std::vector<bool> used(records.size(), false);
  std::vector<double> picked_bearings;
  while (static_cast<int>(out.size()) < budget && out.size() < records.size()) {
    std::size_t best = records.size();
    std::size_t best_gain = 0;
    double best_sep = -1.0;
    for (std::size_t k = 0; k < records.size(); ++k) {
      if (used[k]) continue;
      std::size_t gain = 0;
      for (const Cell& c : std::set<Cell>(records[k].covered_cells.begin(), records[k].covered_cells.end())) {
        if (!covered.count(c)) ++gain;
      }
      const double b = detail::bearing_from(ref_col, ref_row, records[k].pose.cell);
      double sep = std::numeric_limits<double>::infinity();
      for (double p : picked_bearings) sep = std::min(sep, angle_between(b, p));
      const bool better = best == records.size() || gain > best_gain ||
                          (gain == best_gain && sep > best_sep) ||
                          (gain == best_gain && sep == best_sep && records[k].step < records[best].step);
      if (better) {
        best = k;
        best_gain = gain;
        best_sep = sep;
      }
    }
    used[best] = true;
    covered.insert(records[best].covered_cells.begin(), records[best].covered_cells.end());
    picked_bearings.push_back(detail::bearing_from(ref_col, ref_row, records[best].pose.cell));
    out.push_back(records[best]);
  }
  return out;
}

struct PseudoCaption {
  std::string text;
  AttributeSet attributes;
  std::map<std::string, int> category_votes;
  std::map<std::string, int> modifier_votes;
  int total = 0;  // total caption count voted
  std::vector<int> supporting_steps;  // steps of the selected views
};

// Each caption adds its count to every category and modifier token it
// contains. Category: plurality (ties in vocabulary order). Modifiers: vote
// share >= threshold, canonical order. Context tokens never survive.
inline PseudoCaption consensus_caption(const ObjectEntry& entry, const Vocabulary& vocab,
                                       const std::vector<ViewRecord>& views = {},
                                       double vote_threshold = 0.5) {
  PseudoCaption pc;
  for (const auto& c : entry.captions) {
    std::set<std::string> tokens;
    for (auto& w : content_words(c.text)) tokens.insert(std::move(w));
    for (const auto& t : tokens) {
      switch (vocab.kind(t)) {
        case TokenKind::category: pc.category_votes[t] += c.count; break;
        case TokenKind::modifier: pc.modifier_votes[t] += c.count; break;
        default: break;
      }
    }
    pc.total += c.count;
  }
  int best = 0;
  for (const auto& cat : vocab.categories()) {
    auto it = pc.category_votes.find(cat);
    if (it != pc.category_votes.end() && it->second > best) {
      best = it->second;
      pc.attributes.category = cat;
    }
  }
  for (const auto& m : vocab.modifiers()) {
    auto it = pc.modifier_votes.find(m);
    if (it == pc.modifier_votes.end() || pc.total == 0) continue;
    if (static_cast<double>(it->second) / pc.total >= vote_threshold) pc.attributes.modifiers.push_back(m);
  }
  for (const auto& v : views) pc.supporting_steps.push_back(v.step);
  pc.text = render_caption(pc.attributes);
  return pc;
}

// Most frequent caption; ties go to the first seen.
inline std::string frequency_baseline(const ObjectEntry& entry) {
  if (entry.captions.empty()) throw Error("frequency_baseline: empty caption history");
  const CaptionCount* best = &entry.captions.front();
  for (const auto& c : entry.captions) {
    if (c.count > best->count) best = &c;
  }
  return best->text;
}

}  // namespace objmem
