#pragma once

// Cross-view caption consistency, attribute-level caption accuracy, memory
// scalability diagnostics and per-step timing summaries.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "objmem/attributes.hpp"
#include "objmem/core.hpp"
#include "objmem/memory.hpp"
#include "objmem/oracle.hpp"

namespace objmem {

// Linear-interpolation quantile of an unsorted sample, q in [0, 1].
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw MetricsError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return values[lo] + (values[hi] - values[lo]) * (pos - static_cast<double>(lo));
}

inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

inline double mean(const std::vector<double>& values) {
  if (values.empty()) throw MetricsError("mean of an empty sample");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

// Pearson correlation; 0 when either side has zero variance.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw MetricsError("pearson: length mismatch");
  if (x.size() < 2) return 0.0;
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------
// Consistency

// Mean cosine similarity over unordered pairs of the count-weighted caption
// multiset; a single observation scores 1.
inline double object_consistency(const std::vector<CaptionCount>& histogram, EmbeddingCache& cache) {
  double n = 0.0;
  for (const auto& c : histogram) n += c.count;
  if (n < 2.0) return 1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < histogram.size(); ++i) {
    const double ci = histogram[i].count;
    sum += ci * (ci - 1.0) / 2.0;  // identical pairs
    for (std::size_t j = i + 1; j < histogram.size(); ++j) {
      sum += ci * histogram[j].count * cache.similarity(histogram[i].text, histogram[j].text);
    }
  }
  return std::clamp(sum / (n * (n - 1.0) / 2.0), 0.0, 1.0);
}

inline double object_consistency(const std::vector<std::string>& captions, EmbeddingCache& cache) {
  std::vector<CaptionCount> h;
  for (const auto& c : captions) {
    auto it = std::find_if(h.begin(), h.end(), [&](const CaptionCount& x) { return x.text == c; });
    if (it == h.end()) h.push_back({c, 1});
    else ++it->count;
  }
  return object_consistency(h, cache);
}

struct ConsistencyReport {
  std::vector<double> per_object;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
};

inline ConsistencyReport summarize_consistency(std::vector<double> per_object) {
  if (per_object.empty()) throw MetricsError("consistency undefined without objects");
  ConsistencyReport r;
  r.per_object = std::move(per_object);
  r.mean = objmem::mean(r.per_object);
  r.median = quantile(r.per_object, 0.5);
  r.q1 = quantile(r.per_object, 0.25);
  r.q3 = quantile(r.per_object, 0.75);
  r.iqr = r.q3 - r.q1;
  return r;
}

inline ConsistencyReport caption_consistency(const std::vector<std::vector<std::string>>& per_object_captions,
                                             EmbeddingCache& cache) {
  std::vector<double> values;
  for (const auto& captions : per_object_captions) {
    if (captions.empty()) throw MetricsError("consistency undefined for an object without captions");
    values.push_back(object_consistency(captions, cache));
  }
  return summarize_consistency(std::move(values));
}

inline ConsistencyReport caption_consistency(const EpisodicMemory& memory, EmbeddingCache& cache) {
  std::vector<double> values;
  for (const auto& e : memory.entries()) values.push_back(object_consistency(e.captions, cache));
  return summarize_consistency(std::move(values));
}

// ---------------------------------------------------------------------------
// Attribute accuracy

struct AttributeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Set precision/recall over {category} ∪ modifiers.
inline AttributeScore attribute_f1(const AttributeSet& predicted, const AttributeSet& truth) {
  auto tokens = [](const AttributeSet& a) {
    std::set<std::string> s(a.modifiers.begin(), a.modifiers.end());
    if (!a.category.empty()) s.insert(a.category);
    return s;
  };
  const auto p = tokens(predicted);
  const auto t = tokens(truth);
  if (p.empty() && t.empty()) return {1.0, 1.0, 1.0};
  std::size_t hit = 0;
  for (const auto& x : p) hit += t.count(x);
  AttributeScore s;
  s.precision = p.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(p.size());
  s.recall = t.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(t.size());
  s.f1 = s.precision + s.recall == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

// ---------------------------------------------------------------------------
// Scalability

struct ScalabilityPoint {
  int step = 0;
  std::size_t tokens = 0;
  std::size_t objects = 0;
  std::size_t distinct_captions = 0;
  double seconds = 0.0;  // optional timing surrogate
};

struct ScalabilityReport {
  std::vector<ScalabilityPoint> series;
  std::size_t saturation_index = 0;  // first series index of the final (objects, captions) state
  int saturation_step = 0;
  double corr_tokens_objects = 0.0;
  double corr_tokens_suffix_step = 0.0;
  bool suffix_constant = false;
  bool pass = false;
};

inline ScalabilityReport memory_scalability(std::vector<ScalabilityPoint> series, std::size_t min_steps = 10) {
  if (series.size() < min_steps) {
    throw MetricsError("scalability needs at least " + std::to_string(min_steps) + " steps, got " +
                       std::to_string(series.size()));
  }
  for (std::size_t k = 1; k < series.size(); ++k) {
    if (series[k].step <= series[k - 1].step) throw MetricsError("scalability: steps must increase");
  }
  ScalabilityReport r;
  const auto& last = series.back();
  std::size_t sat = series.size() - 1;
  while (sat > 0 && series[sat - 1].objects == last.objects &&
         series[sat - 1].distinct_captions == last.distinct_captions) {
    --sat;
  }
  r.saturation_index = sat;
  r.saturation_step = series[sat].step;

  std::vector<double> tokens;
  std::vector<double> objects;
  for (const auto& p : series) {
    tokens.push_back(static_cast<double>(p.tokens));
    objects.push_back(static_cast<double>(p.objects));
  }
  r.corr_tokens_objects = pearson(tokens, objects);

  std::vector<double> suffix_tokens(tokens.begin() + static_cast<std::ptrdiff_t>(sat), tokens.end());
  std::vector<double> suffix_steps;
  for (std::size_t k = sat; k < series.size(); ++k) suffix_steps.push_back(series[k].step);
  r.corr_tokens_suffix_step = pearson(suffix_tokens, suffix_steps);
  r.suffix_constant = std::all_of(suffix_tokens.begin(), suffix_tokens.end(),
                                  [&](double v) { return v == suffix_tokens.front(); });
  r.pass = r.corr_tokens_objects > r.corr_tokens_suffix_step;
  r.series = std::move(series);
  return r;
}

// ---------------------------------------------------------------------------
// Timing

struct TimingReport {
  std::vector<double> per_step;  // seconds
  double median = 0.0;
  double max = 0.0;
  double ratio = 0.0;  // max / median
};

inline TimingReport timing_profile(std::vector<double> per_step) {
  if (per_step.empty()) throw MetricsError("timing profile of an empty episode");
  TimingReport r;
  r.median = quantile(per_step, 0.5);
  r.max = *std::max_element(per_step.begin(), per_step.end());
  r.ratio = r.median > 0.0 ? r.max / r.median : 1.0;
  r.per_step = std::move(per_step);
  return r;
}

// Element-wise minimum over repeated runs of the same deterministic episode,
// which filters scheduler noise out of per-step timings.
inline std::vector<double> min_over_repeats(const std::vector<std::vector<double>>& runs) {
  if (runs.empty()) throw MetricsError("min_over_repeats: no runs");
  std::vector<double> out = runs.front();
  for (const auto& r : runs) {
    if (r.size() != out.size()) throw MetricsError("min_over_repeats: runs differ in length");
    for (std::size_t k = 0; k < r.size(); ++k) out[k] = std::min(out[k], r[k]);
  }
  return out;
}

}  // namespace objmem
