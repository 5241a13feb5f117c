#include <gtest/gtest.h>

#include <map>

#include "support.hpp"

using namespace objmem;
using namespace objmem::test;

TEST(Memory, InsertAllocatesSequentialIds) {
  EpisodicMemory m;
  const auto a = m.insert_new(Vec3{0, 0, 0}, "a red chair");
  EXPECT_EQ(a, 1);
  EXPECT_EQ(m.size(), 1u);
  EXPECT_EQ(m.at(a).observation_count, 1);
  const auto b = m.insert_new(Vec3{1, 0, 0}, "a lamp");
  const auto c = m.insert_new(Vec3{2, 0, 0}, "a bed");
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
  EXPECT_EQ(EpisodicMemory(MemoryConfig{40, 0}).insert_new(Vec3{}, "a bed"), 40);
}

TEST(Memory, UpdateCountsAndAverages) {
  EpisodicMemory m;
  const auto id = m.insert_new(Vec3{0, 0, 1}, "a red chair");
  m.update_entry(id, Vec3{2, 0, 1}, "a red chair");
  const auto& e = m.at(id);
  ASSERT_EQ(e.captions.size(), 1u);
  EXPECT_EQ(e.captions[0].count, 2);
  EXPECT_DOUBLE_EQ(e.position.x, 1.0);
  EXPECT_DOUBLE_EQ(e.position.z, 1.0);
  EXPECT_THROW(m.update_entry(99, Vec3{}, "x"), AssociationError);
}

TEST(Memory, RandomUpdatesMatchRecount) {
  const std::vector<std::string> pool{"a red chair", "a chair", "a red stool", "a wooden chair"};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    EpisodicMemory m;
    std::vector<std::string> seen{pool[rng.index(pool.size())]};
    std::vector<Vec3> pts{Vec3{rng.uniform(-5, 5), rng.uniform(-5, 5), 0.5}};
    const auto id = m.insert_new(pts[0], seen[0]);
    for (int k = 0; k < 5; ++k) {
      seen.push_back(pool[rng.index(pool.size())]);
      pts.push_back(Vec3{rng.uniform(-5, 5), rng.uniform(-5, 5), 0.5});
      m.update_entry(id, pts.back(), seen.back());
    }
    std::map<std::string, int> counts;
    std::vector<std::string> order;
    for (const auto& s : seen) {
      if (counts[s]++ == 0) order.push_back(s);
    }
    const auto& e = m.at(id);
    ASSERT_EQ(e.captions.size(), order.size());
    int total = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      EXPECT_EQ(e.captions[i].text, order[i]);
      EXPECT_EQ(e.captions[i].count, counts[order[i]]);
      total += e.captions[i].count;
    }
    EXPECT_EQ(total, e.observation_count);
    double sx = 0, sy = 0;
    for (const auto& p : pts) {
      sx += p.x;
      sy += p.y;
    }
    EXPECT_NEAR(e.position.x, sx / pts.size(), 1e-12);
    EXPECT_NEAR(e.position.y, sy / pts.size(), 1e-12);
  }
}

TEST(Memory, CaptionCapEvictsLeastFrequent) {
  EpisodicMemory m(MemoryConfig{1, 2});
  const auto id = m.insert_new(Vec3{}, "a");
  m.update_entry(id, Vec3{}, "a");
  m.update_entry(id, Vec3{}, "b");
  m.update_entry(id, Vec3{}, "c");
  const auto& e = m.at(id);
  ASSERT_EQ(e.captions.size(), 2u);
  EXPECT_EQ(e.captions[0].text, "a");
  EXPECT_EQ(e.captions[1].text, "c");
  EXPECT_EQ(e.observation_count, 3);
}

TEST(Discretize, RoundsHalfAwayFromZero) {
  EXPECT_EQ(discretize_position(Vec3{-7.091, 1.668, 3.792}), (DiscretizedPosition{-709, 167, 379}));
  EXPECT_EQ(discretize_position(Vec3{0, 0, 0}), (DiscretizedPosition{0, 0, 0}));
  EXPECT_EQ(discretize_position(Vec3{1.005, -1.005, 0}), (DiscretizedPosition{101, -101, 0}));
  EXPECT_EQ(format_position(discretize_position(Vec3{-0.004, 0.5, 12.345})), "[0.00, 0.50, 12.35]");
  EXPECT_THROW(discretize_position(Vec3{std::nan(""), 0, 0}), Error);
}

TEST(Serialize, EmptyMemory) {
  EXPECT_EQ(serialize(EpisodicMemory{}), "[SCENE-START]\n[SCENE-END]");
  EXPECT_EQ(token_count(serialize(EpisodicMemory{})), 2u);
}

TEST(Serialize, MatchesReferenceBlock) {
  EpisodicMemory m;
  ObjectEntry e;
  e.id = 11;
  e.position = Vec3{-7.091, 1.668, 3.792};
  e.captions = {{"a bed with a pink and blue polka dot sheet.", 2}};
  e.observation_count = 2;
  m.restore_entry(e);
  const std::string block = serialize_entry(m.at(11));
  const std::string golden = read_file(std::string(OBJMEM_GOLDEN_DIR) + "/reference_prompt.txt");
  EXPECT_NE(golden.find(block + "\n"), std::string::npos) << block;
}

TEST(Serialize, QuotingEscapes) {
  EXPECT_EQ(quote_caption("a \"big\" \\ thing\n"), "\"a \\\"big\\\" \\\\ thing\\n\"");
}

TEST(TokenCount, AdditiveOverBlocks) {
  EpisodicMemory m;
  m.insert_new(Vec3{1, 2, 0.5}, "a red chair");
  const auto id = m.insert_new(Vec3{-3, 0.25, 0.5}, "a black leather couch.");
  m.update_entry(id, Vec3{-3, 0.3, 0.5}, "a couch");
  std::size_t blocks = 0;
  for (const auto& e : m.entries()) blocks += token_count(serialize_entry(e));
  EXPECT_EQ(token_count(serialize(m)), blocks + 2);
  // "[OBJ-ID] 1" is two tokens; "[1.00," is four.
  EXPECT_EQ(token_count("[OBJ-ID] 1"), 2u);
  EXPECT_EQ(token_count("[1.00,"), 5u);
}

TEST(TokenCount, MoreDistinctCaptionsMoreTokens) {
  EpisodicMemory m;
  const auto id = m.insert_new(Vec3{}, "a red chair");
  m.update_entry(id, Vec3{}, "a blue chair");
  const auto before = token_count(serialize(m));
  m.update_entry(id, Vec3{}, "a green chair");
  m.update_entry(id, Vec3{}, "a wooden chair");
  EXPECT_GT(token_count(serialize(m)), before);
  // Repeats do not add tokens.
  const auto after = token_count(serialize(m));
  m.update_entry(id, Vec3{}, "a red chair");
  EXPECT_EQ(token_count(serialize(m)), after);
}
