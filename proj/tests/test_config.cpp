#include <gtest/gtest.h>

#include "support.hpp"

using namespace objmem;
using namespace objmem::test;

namespace {

std::vector<std::string> problems_of(const std::string& yaml, const std::vector<std::string>& overrides = {}) {
  try {
    load_config(yaml, overrides);
  } catch (const ValidationError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
  for (const auto& p : problems) {
    if (p.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST(Config, ShippedFileEqualsBuiltInDefaults) {
  const auto cfg = load_config_file(std::string(OBJMEM_CONFIG_DIR) + "/default.yaml");
  EXPECT_EQ(to_json(cfg), to_json(RunConfig{}));
  EXPECT_EQ(cfg.episode_cap, 400);
  EXPECT_DOUBLE_EQ(cfg.exploration.alpha, 0.7);
  EXPECT_EQ(cfg.exploration.radii, (std::vector<double>{0.5, 1.0, 2.0}));
  EXPECT_EQ(cfg.exploration.candidates_per_radius, 30);
  EXPECT_EQ(cfg.exploration.viewpoints_min, 5);
  EXPECT_EQ(cfg.exploration.viewpoints_max, 20);
  EXPECT_EQ(cfg.exploration.stuck_window, 5);
  EXPECT_DOUBLE_EQ(cfg.exploration.displacement_eps, 0.15);
  EXPECT_EQ(cfg.exploration.recovery_attempts, 5);
}

TEST(Config, EmptyDocumentGivesDefaults) { EXPECT_EQ(to_json(load_config("")), to_json(RunConfig{})); }

TEST(Config, JsonRoundTrip) {
  auto cfg = load_config("policy: frontier\nseeds: [3, 4]\nexploration:\n  radii: [1.0]\npolicy_seed: 9\n");
  EXPECT_EQ(cfg.policy, PolicyKind::frontier);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{3, 4}));
  EXPECT_EQ(cfg.policy_seed, 9u);
  EXPECT_EQ(to_json(config_from_json(to_json(cfg))), to_json(cfg));
}

TEST(Config, OverridesApplyAfterFile) {
  const auto cfg = load_config("episode_cap: 50\n", {"episode_cap=80", "noise.p0=0.2", "seeds=[5,6,7]",
                                                     "association.mode=heuristic", "world.file=x.world"});
  EXPECT_EQ(cfg.episode_cap, 80);
  EXPECT_DOUBLE_EQ(cfg.noise.p0, 0.2);
  EXPECT_EQ(cfg.seeds.size(), 3u);
  EXPECT_EQ(cfg.association, AssociationMode::heuristic);
  EXPECT_EQ(cfg.world_file, "x.world");
  EXPECT_THROW(load_config("", {"episode_cap"}), ValidationError);
  EXPECT_THROW(load_config("", {"episode_cap.x=1"}), ValidationError);
}

TEST(Config, ValidationCollectsEveryProblem) {
  const auto p = problems_of("episode_cap: 0\nseeds: []\nexploration:\n  alpha: 1.5\n  bogus: 1\nnoise:\n  p_max: 2\n"
                             "policy: teleport\n");
  EXPECT_TRUE(mentions(p, "episode_cap"));
  EXPECT_TRUE(mentions(p, "seeds"));
  EXPECT_TRUE(mentions(p, "alpha"));
  EXPECT_TRUE(mentions(p, "exploration.bogus: unknown field"));
  EXPECT_TRUE(mentions(p, "p_max"));
  EXPECT_TRUE(mentions(p, "policy"));
  EXPECT_GE(p.size(), 6u);
}

TEST(Config, TypeErrors) {
  EXPECT_TRUE(mentions(problems_of("episode_cap: lots\n"), "expected an integer"));
  EXPECT_TRUE(mentions(problems_of("world: 3\n"), "world must be a mapping"));
  EXPECT_TRUE(mentions(problems_of("exploration:\n  radii: [a]\n"), "list of numbers"));
  EXPECT_TRUE(mentions(problems_of("seeds: [-1]\n"), "non-negative"));
  EXPECT_TRUE(mentions(problems_of("a: [\n"), "not valid YAML"));
  EXPECT_TRUE(mentions(problems_of("world:\n  heading_count: 6\n"), "heading_count"));
  EXPECT_TRUE(problems_of("world:\n  heading_count: 8\n").empty());
}

TEST(Config, HashIgnoresExecutionSettings) {
  RunConfig a;
  RunConfig b;
  b.seeds = {4, 5};
  b.jobs = 3;
  b.output_dir = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.noise.p0 = 0.1;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, SeedSplitting) {
  RunConfig cfg;
  EXPECT_EQ(seeds_for(cfg, 7).world_seed, 7u);
  EXPECT_EQ(seeds_for(cfg, 7).policy_seed, 7u);
  cfg.policy_seed = 2;
  EXPECT_EQ(seeds_for(cfg, 7).policy_seed, 2u);
  cfg.world_file = "w.txt";
  EXPECT_EQ(seeds_for(cfg, 7).policy_seed, 7u);
}
