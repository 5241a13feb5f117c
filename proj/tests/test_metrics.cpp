#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <set>

#include "support.hpp"

using namespace objmem;
using namespace objmem::test;

namespace {

struct Env {
  Vocabulary vocab = Vocabulary::household();
  Embedder embedder{vocab};
  EmbeddingCache cache{embedder};
};

std::vector<ScalabilityPoint> series(const std::vector<std::array<std::size_t, 3>>& rows) {
  std::vector<ScalabilityPoint> out;
  int step = 1;
  for (const auto& r : rows) out.push_back(ScalabilityPoint{step++, r[0], r[1], r[2], 0.0});
  return out;
}

}  // namespace

TEST(Stats, QuantileMeanPearson) {
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(median({5, 1, 3}), 3.0);
  EXPECT_DOUBLE_EQ(mean({1, 2, 6}), 3.0);
  EXPECT_THROW(mean({}), MetricsError);
  EXPECT_NEAR(pearson({1, 2, 3}, {2, 4, 7}), 5.0 / std::sqrt(2.0 * 114.0 / 9.0), 1e-12);
  EXPECT_DOUBLE_EQ(pearson({1, 2, 3}, {5, 5, 5}), 0.0);
  EXPECT_NEAR(pearson({1, 2, 3}, {3, 2, 1}), -1.0, 1e-12);
  EXPECT_THROW(pearson({1, 2}, {1}), MetricsError);
}

TEST(Consistency, IdenticalCaptionsScoreOne) {
  Env env;
  const auto r = caption_consistency({{"a red chair", "a red chair"}, {"a lamp", "a lamp", "a lamp"}}, env.cache);
  EXPECT_DOUBLE_EQ(r.mean, 1.0);
  EXPECT_DOUBLE_EQ(r.iqr, 0.0);
}

TEST(Consistency, PerObjectValues) {
  Env env;
  EXPECT_DOUBLE_EQ(object_consistency(std::vector<std::string>{"a red chair", "a tall lamp"}, env.cache), 0.0);
  // pairwise cosines 1, 1/2, 1/2
  EXPECT_NEAR(object_consistency(std::vector<std::string>{"a red chair", "a red chair", "a red lamp"}, env.cache),
              2.0 / 3.0, 1e-12);
  EXPECT_NEAR(object_consistency(std::vector<CaptionCount>{{"a red chair", 2}, {"a red lamp", 1}}, env.cache),
              2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(object_consistency(std::vector<std::string>{"a bed"}, env.cache), 1.0);
}

TEST(Consistency, ComplementsDisagreement) {
  Env env;
  Rng rng(5);
  const std::vector<std::string> pool{"a red chair", "a chair", "a red lamp", "a tall wooden lamp", "a bed"};
  for (int trial = 0; trial < 200; ++trial) {
    ObjectEntry e;
    std::set<std::string> used;
    for (int k = static_cast<int>(rng.uniform_int(1, 4)); k > 0; --k) {
      const auto& t = pool[rng.index(pool.size())];
      if (used.insert(t).second) e.captions.push_back({t, static_cast<int>(rng.uniform_int(1, 3))});
    }
    int n = 0;
    for (const auto& c : e.captions) n += c.count;
    const double cs = object_consistency(e.captions, env.cache);
    EXPECT_GE(cs, 0.0);
    EXPECT_LE(cs, 1.0);
    if (n >= 2) {
      EXPECT_NEAR(cs, 1.0 - object_disagreement(e, env.cache), 1e-12);
    }
  }
}

TEST(Consistency, SummaryBoundsAndErrors) {
  const auto r = summarize_consistency({0.2, 0.9, 0.5, 0.7, 1.0});
  EXPECT_GE(r.iqr, 0.0);
  EXPECT_LE(r.iqr, 1.0 - 0.2);
  EXPECT_DOUBLE_EQ(r.median, 0.7);
  EXPECT_THROW(summarize_consistency({}), MetricsError);
}

TEST(AttributeF1, Cases) {
  const AttributeSet truth{"couch", {"black", "leather"}, {}};
  EXPECT_DOUBLE_EQ(attribute_f1(truth, truth).f1, 1.0);
  const auto empty = attribute_f1(AttributeSet{}, truth);
  EXPECT_DOUBLE_EQ(empty.recall, 0.0);
  EXPECT_DOUBLE_EQ(empty.f1, 0.0);
  const auto partial = attribute_f1(AttributeSet{"couch", {"black"}, {}}, truth);
  EXPECT_DOUBLE_EQ(partial.precision, 1.0);
  EXPECT_NEAR(partial.recall, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(partial.f1, 0.8, 1e-12);
  // Context terms are not attributes.
  EXPECT_DOUBLE_EQ(attribute_f1(AttributeSet{"couch", {"black", "leather"}, {"pillow"}}, truth).f1, 1.0);
}

TEST(Scalability, PlateauAfterSaturation) {
  const auto r = memory_scalability(series({{10, 0, 0}, {20, 1, 1}, {30, 2, 2}, {35, 2, 3}, {35, 2, 3}, {35, 2, 3},
                                            {35, 2, 3}, {35, 2, 3}, {35, 2, 3}, {35, 2, 3}}));
  EXPECT_EQ(r.saturation_index, 3u);
  EXPECT_EQ(r.saturation_step, 4);
  EXPECT_TRUE(r.suffix_constant);
  EXPECT_DOUBLE_EQ(r.corr_tokens_suffix_step, 0.0);
  EXPECT_GT(r.corr_tokens_objects, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(Scalability, EmptyWorldIsConstant) {
  const auto r = memory_scalability(series(std::vector<std::array<std::size_t, 3>>(12, {2, 0, 0})));
  EXPECT_EQ(r.saturation_index, 0u);
  EXPECT_TRUE(r.suffix_constant);
  EXPECT_FALSE(r.pass);  // no variation at all: neither correlation is positive
}

TEST(Scalability, Errors) {
  EXPECT_THROW(memory_scalability(series({{1, 1, 1}, {2, 1, 1}})), MetricsError);
  auto s = series(std::vector<std::array<std::size_t, 3>>(10, {2, 0, 0}));
  s[5].step = s[4].step;
  EXPECT_THROW(memory_scalability(s), MetricsError);
}

TEST(Timing, ProfileAndRepeats) {
  const auto flat = timing_profile(std::vector<double>(50, 0.002));
  EXPECT_DOUBLE_EQ(flat.ratio, 1.0);
  EXPECT_EQ(flat.per_step.size(), 50u);
  EXPECT_EQ(min_over_repeats({{3, 1, 4}, {1, 5, 9}, {2, 6, 5}}), (std::vector<double>{1, 1, 4}));
  EXPECT_THROW(min_over_repeats({{1, 2}, {1}}), MetricsError);
  EXPECT_THROW(timing_profile({}), MetricsError);
}
