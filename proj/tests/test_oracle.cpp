#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace objmem;
using namespace objmem::test;

namespace {

const Vocabulary& vocab() {
  static const Vocabulary v = Vocabulary::household();
  return v;
}

// Fraction of captions missing a true modifier, object straight ahead at `dist` cells.
double drop_rate(const NoiseModel& noise, int dist, int draws, std::uint64_t seed) {
  const auto g = open_grid(20, 5);
  const auto obj = make_object(1, Cell{1 + dist, 2}, g, "couch", {"black"});
  const AgentPose pose{Cell{1, 2}, 0, 4};
  Rng rng(seed);
  int missing = 0;
  for (int k = 0; k < draws; ++k) {
    const auto cap = caption_object(obj, pose, FieldOfView{}, noise, vocab(), rng);
    const auto& mods = cap.attributes.modifiers;
    missing += std::find(mods.begin(), mods.end(), "black") == mods.end();
  }
  return static_cast<double>(missing) / draws;
}

}  // namespace

TEST(Caption, NoiselessIsConstantAcrossPoses) {
  const auto g = open_grid(12, 12);
  const auto obj = make_object(1, Cell{6, 6}, g, "couch", {"black", "leather"});
  Rng rng(1);
  for (int r = 0; r < 12; ++r) {
    for (int c = 0; c < 12; ++c) {
      for (int h = 0; h < 4; ++h) {
        const auto cap = caption_object(obj, AgentPose{Cell{c, r}, h, 4}, FieldOfView{},
                                        NoiseModel::noiseless(), vocab(), rng);
        ASSERT_EQ(cap.text, "a black leather couch");
      }
    }
  }
}

TEST(Caption, ZeroDistanceZeroAngleZeroBase) {
  NoiseModel n{0.0, 0.5, 0.5, 1.0, 0.0};
  EXPECT_DOUBLE_EQ(n.modifier_probability(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(n.category_probability(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(drop_rate(n, 0, 2000, 4), 0.0);
}

TEST(Caption, ProbabilityClamps) {
  NoiseModel n{0.3, 0.5, 0.5, 0.6, 0.1};
  EXPECT_DOUBLE_EQ(n.modifier_probability(1.0, 1.0), 0.6);
  EXPECT_DOUBLE_EQ((NoiseModel{-0.5, 0, 0, 1, 0}.modifier_probability(0.0, 0.0)), 0.0);
}

TEST(Caption, MonteCarloRateAtMaxRange) {
  NoiseModel n{0.1, 0.3, 0.0, 1.0, 0.0};
  EXPECT_NEAR(drop_rate(n, FieldOfView{}.max_range_cells, 100000, 12345), 0.4, 0.01);
}

TEST(Caption, CorruptionGrowsWithDistanceAndAngle) {
  NoiseModel n{0.05, 0.35, 0.25, 0.9, 0.0};
  double prev = -1.0;
  for (int d = 0; d <= 8; d += 2) {
    const double rate = drop_rate(n, d, 20000, 77);
    EXPECT_GE(rate, prev - 0.01) << "distance " << d;
    prev = rate;
  }
  const auto g = open_grid(12, 12);
  const auto obj = make_object(1, Cell{6, 6}, g, "couch", {"black"});
  const FieldOfView fov;
  const AgentPose ahead{Cell{2, 6}, 0, 4};
  const AgentPose oblique{Cell{2, 4}, 0, 4};
  const auto ga = view_geometry(obj, ahead, fov);
  const auto gb = view_geometry(obj, oblique, fov);
  EXPECT_DOUBLE_EQ(ga.angle_norm, 0.0);
  EXPECT_GT(gb.angle_norm, 0.0);
  EXPECT_GT(n.modifier_probability(gb.distance_norm, gb.angle_norm),
            n.modifier_probability(ga.distance_norm, ga.angle_norm));
}

TEST(Caption, CategoryFlipsOnlyToConfusables) {
  const auto g = open_grid(20, 5);
  const auto obj = make_object(1, Cell{9, 2}, g, "couch", {"black", "leather"});
  NoiseModel n{0.3, 0.3, 0.0, 0.9, 0.5};
  Rng rng(8);
  int flips = 0;
  for (int k = 0; k < 2000; ++k) {
    const auto cap = caption_object(obj, AgentPose{Cell{1, 2}, 0, 4}, FieldOfView{}, n, vocab(), rng);
    const auto& c = cap.attributes.category;
    EXPECT_TRUE(c == "couch" || c == "sofa" || c == "armchair") << c;
    flips += c != "couch";
    for (const auto& m : cap.attributes.modifiers) EXPECT_EQ(vocab().kind(m), TokenKind::modifier);
    EXPECT_EQ(cap.text, render_caption(cap.attributes));
  }
  EXPECT_GT(flips, 0);
}

TEST(Caption, DeterministicGivenStream) {
  const auto g = open_grid(20, 5);
  const auto obj = make_object(1, Cell{7, 2}, g, "table", {"large", "wooden"});
  NoiseModel n{0.2, 0.3, 0.2, 0.9, 0.2};
  Rng a(5), b(5);
  for (int k = 0; k < 100; ++k) {
    EXPECT_EQ(caption_object(obj, AgentPose{Cell{1, 2}, 0, 4}, FieldOfView{}, n, vocab(), a).text,
              caption_object(obj, AgentPose{Cell{1, 2}, 0, 4}, FieldOfView{}, n, vocab(), b).text);
  }
}

TEST(Embedding, HandComputedCosine) {
  const Embedder e(vocab());
  EXPECT_NEAR(cosine_similarity(e.embed("black leather couch"), e.embed("black couch")), 2.0 / std::sqrt(6.0), 1e-12);
  EXPECT_NEAR(cosine_similarity(e.embed("a red chair"), e.embed("a red chair")), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(cosine_similarity(e.embed("red chair"), e.embed("blue lamp")), 0.0);
}

TEST(Embedding, StopTokensAndUnknownWords) {
  const Embedder e(vocab());
  EXPECT_EQ(e.embed("a red chair with the rug"), e.embed("red chair rug"));
  EXPECT_TRUE(e.embed("a the with").is_zero());
  // Two different unknown words share one component.
  EXPECT_NEAR(cosine_similarity(e.embed("zebra"), e.embed("giraffe")), 1.0, 1e-12);
  const auto v = e.embed("black leather couch");
  double norm = 0.0;
  for (double c : v.components) norm += c * c;
  EXPECT_NEAR(norm, 1.0, 1e-12);
}

TEST(Embedding, CosineEdgeCases) {
  const EmbeddingVector a{{1.0, 0.0}};
  const EmbeddingVector b{{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)}};
  EXPECT_NEAR(cosine_similarity(a, b), 0.70710678, 1e-8);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, EmbeddingVector{{0.0, 0.0}}), 0.0);
  EXPECT_THROW(cosine_similarity(a, EmbeddingVector{{1.0}}), Error);
}

TEST(Embedding, CacheAgreesWithEmbedder) {
  const Embedder e(vocab());
  EmbeddingCache cache(e);
  EXPECT_DOUBLE_EQ(cache.similarity("black leather couch", "black couch"),
                   cosine_similarity(e.embed("black leather couch"), e.embed("black couch")));
  EXPECT_DOUBLE_EQ(cache.similarity("a", "a"), 0.0);
  EXPECT_DOUBLE_EQ(cache.similarity("a red chair", "a red chair"), 1.0);
}
