#pragma once

// Episode runner: observe, caption, prompt, associate, commit, act, move. The
// per-episode data it records is exactly what the JSONL log carries, and the
// episode metrics are a pure function of that data.

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "objmem/aggregator.hpp"
#include "objmem/association.hpp"
#include "objmem/config.hpp"
#include "objmem/core.hpp"
#include "objmem/explorer.hpp"
#include "objmem/memory.hpp"
#include "objmem/metrics.hpp"
#include "objmem/oracle.hpp"
#include "objmem/protocol.hpp"
#include "objmem/world.hpp"

namespace objmem {

struct DetectionLog {
  TransientId transient_id = 0;
  TrueId true_id = 0;
  Vec3 position;
  std::vector<Cell> footprint;
  std::string caption;

  bool operator==(const DetectionLog&) const = default;
};

struct StepLog {
  int step = 0;
  AgentPose pose;  // pose the observation was taken from
  Action action = Action::stop;
  bool collided = false;
  std::vector<DetectionLog> detections;
  std::string prompt;
  std::string output;
  std::vector<AssociationRecord> records;
  std::size_t memory_tokens = 0;
  std::size_t entries = 0;
  std::size_t distinct_captions = 0;
  std::string memory_text;  // serialized memory after this step's commit

  bool operator==(const StepLog&) const = default;
};

struct EpisodeHeader {
  json config;
  std::string config_hash;
  std::string world_hash;
  std::uint64_t world_seed = 0;
  std::uint64_t policy_seed = 0;
  std::string policy;
  std::string association;
  int grid_width = 0;
  int grid_height = 0;
  double cell_size = 0.0;
  std::vector<WorldObject> objects;
  Vocabulary vocabulary;
};

struct EpisodeData {
  EpisodeHeader header;
  std::vector<StepLog> steps;
  std::string final_memory;
};

struct PseudoCaptionRow {
  PersistentId id = 0;
  std::optional<TrueId> true_id;
  std::string consensus;
  std::string baseline;
};

struct EpisodeMetrics {
  int steps = 0;
  std::size_t decisions = 0;
  std::optional<double> acc;
  std::optional<double> f1_match;
  std::optional<double> f1_new;
  std::size_t idsw = 0;
  std::size_t frag = 0;
  std::size_t entries = 0;
  std::size_t objects_discovered = 0;
  std::optional<double> cs_mean;
  std::optional<double> cs_median;
  std::optional<double> cs_iqr;
  std::optional<double> disagreement_mean;
  std::optional<double> consensus_f1;
  std::optional<double> baseline_f1;
  std::optional<double> corr_tokens_objects;
  std::optional<double> corr_tokens_suffix;
  std::optional<int> saturation_step;
  std::optional<bool> scalability_pass;
  std::vector<PseudoCaptionRow> pseudo_captions;
};

// ---------------------------------------------------------------------------
// Metrics from recorded data

// Category and modifiers named in a caption's text, modifiers canonical.
inline AttributeSet attributes_from_text(const std::string& text, const Vocabulary& vocab) {
  AttributeSet a;
  std::set<std::string> mods;
  for (const auto& w : content_words(text)) {
    const TokenKind k = vocab.kind(w);
    if (k == TokenKind::category && a.category.empty()) a.category = w;
    if (k == TokenKind::modifier) mods.insert(w);
  }
  for (const auto& m : vocab.modifiers()) {
    if (mods.count(m)) a.modifiers.push_back(m);
  }
  return a;
}

inline EpisodeMetrics compute_metrics(const EpisodeData& data) {
  EpisodeMetrics m;
  const Vocabulary& vocab = data.header.vocabulary;
  const Embedder embedder(vocab);
  EmbeddingCache cache(embedder);
  m.steps = static_cast<int>(data.steps.size());

  std::vector<AssociationRecord> records;
  std::map<PersistentId, TrueId> owner;
  std::map<PersistentId, std::vector<ViewRecord>> views;
  std::set<TrueId> seen_objects;
  for (const auto& s : data.steps) {
    for (std::size_t k = 0; k < s.records.size(); ++k) {
      const auto& r = s.records[k];
      records.push_back(r);
      seen_objects.insert(r.true_object_id);
      if (r.decision.is_new()) owner.emplace(r.predicted_persistent_id, r.true_object_id);
      const auto det = std::find_if(s.detections.begin(), s.detections.end(), [&](const DetectionLog& d) {
        return d.transient_id == r.decision.transient_id;
      });
      if (det != s.detections.end()) views[r.predicted_persistent_id].push_back({s.step, s.pose, det->footprint});
    }
  }
  m.objects_discovered = seen_objects.size();
  m.decisions = records.size();
  if (!records.empty()) {
    const auto a = evaluate_association(records);
    m.acc = a.accuracy;
    m.f1_match = a.match.f1;
    m.f1_new = a.fresh.f1;
    m.idsw = a.idsw;
    m.frag = a.frag;
  }

  const EpisodicMemory memory = parse_memory(data.final_memory);
  m.entries = memory.size();
  if (!memory.empty()) {
    const auto cs = caption_consistency(memory, cache);
    m.cs_mean = cs.mean;
    m.cs_median = cs.median;
    m.cs_iqr = cs.iqr;
    double dis = 0.0;
    double cf1 = 0.0;
    double bf1 = 0.0;
    std::size_t scored = 0;
    const double vote = data.header.config.value(json::json_pointer("/aggregator/vote_threshold"), 0.5);
    const int budget = data.header.config.value(json::json_pointer("/aggregator/view_budget"), 5);
    for (const auto& e : memory.entries()) {
      dis += object_disagreement(e, cache);
      const auto it = views.find(e.id);
      const auto selected = it == views.end() ? std::vector<ViewRecord>{} : select_informative_views(it->second, budget);
      PseudoCaptionRow row;
      row.id = e.id;
      row.consensus = consensus_caption(e, vocab, selected, vote).text;
      row.baseline = frequency_baseline(e);
      if (auto o = owner.find(e.id); o != owner.end()) {
        row.true_id = o->second;
        const auto obj = std::find_if(data.header.objects.begin(), data.header.objects.end(),
                                      [&](const WorldObject& w) { return w.true_id == o->second; });
        if (obj != data.header.objects.end()) {
          cf1 += attribute_f1(attributes_from_text(row.consensus, vocab), obj->attributes).f1;
          bf1 += attribute_f1(attributes_from_text(row.baseline, vocab), obj->attributes).f1;
          ++scored;
        }
      }
      m.pseudo_captions.push_back(std::move(row));
    }
    m.disagreement_mean = dis / static_cast<double>(memory.size());
    if (scored > 0) {
      m.consensus_f1 = cf1 / static_cast<double>(scored);
      m.baseline_f1 = bf1 / static_cast<double>(scored);
    }
  }

  if (data.steps.size() >= 10) {
    std::vector<ScalabilityPoint> series;
    for (const auto& s : data.steps) series.push_back({s.step, s.memory_tokens, s.entries, s.distinct_captions, 0.0});
    const auto sc = memory_scalability(std::move(series));
    m.corr_tokens_objects = sc.corr_tokens_objects;
    m.corr_tokens_suffix = sc.corr_tokens_suffix_step;
    m.saturation_step = sc.saturation_step;
    m.scalability_pass = sc.pass;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Runner

struct EpisodeOptions {
  // Replaces the configured policy (tests inject instrumented policies).
  Policy* policy = nullptr;
  // Post-processes each motion result; lets tests inject actuation failures.
  std::function<StepResult(const AgentPose& before, Action action, StepResult result)> motion_filter;
  bool record_text = true;  // prompt, output and memory text per step
};

struct EpisodeResult {
  EpisodeData data;
  EpisodeMetrics metrics;
  EpisodicMemory memory;
  ExploredMap explored;
  std::vector<double> step_seconds;
  std::vector<PlanEvent> plan_events;  // disagreement policy only
  int planning_rounds = 0;
};

inline std::unique_ptr<Policy> make_policy(PolicyKind kind, const ExplorationConfig& cfg, std::uint64_t seed) {
  switch (kind) {
    case PolicyKind::disagreement: return std::make_unique<DisagreementPolicy>(cfg, seed);
    case PolicyKind::frontier: return std::make_unique<FrontierPolicy>();
    case PolicyKind::random: return std::make_unique<RandomGoalPolicy>(seed);
  }
  throw Error("unknown policy");
}

inline EpisodeHeader make_header(const GridWorld& world, const RunConfig& cfg, std::uint64_t world_seed,
                                 std::uint64_t policy_seed) {
  EpisodeHeader h;
  h.config = episode_json(cfg);
  h.config_hash = config_hash(cfg);
  h.world_hash = hex64(fnv1a(world_to_string(world)));
  h.world_seed = world_seed;
  h.policy_seed = policy_seed;
  h.policy = std::string(to_string(cfg.policy));
  h.association = std::string(to_string(cfg.association));
  h.grid_width = world.grid().width();
  h.grid_height = world.grid().height();
  h.cell_size = world.grid().cell_size();
  h.objects = world.objects();
  h.vocabulary = world.vocabulary();
  return h;
}

inline EpisodeResult run_episode(const GridWorld& world, const RunConfig& cfg, std::uint64_t world_seed,
                                 std::uint64_t policy_seed, const EpisodeOptions& opts = {}) {
  using clock = std::chrono::steady_clock;
  EpisodeResult res;
  res.data.header = make_header(world, cfg, world_seed, policy_seed);
  res.memory = EpisodicMemory(cfg.memory);
  const auto& grid = world.grid();
  const Embedder embedder(world.vocabulary());
  EmbeddingCache cache(embedder);
  IdentityRegistry registry;
  Rng observe_rng(derive_seed(policy_seed, 1));
  Rng caption_rng(derive_seed(policy_seed, 2));
  std::unique_ptr<Policy> owned;
  Policy* policy = opts.policy;
  if (!policy) {
    owned = make_policy(cfg.policy, cfg.exploration, derive_seed(policy_seed, 3));
    policy = owned.get();
  }

  AgentPose pose = world.start();
  res.explored = ExploredMap(grid.width(), grid.height());
  update_explored(res.explored, grid, pose, cfg.fov);

  for (int step = 1; step <= cfg.episode_cap; ++step) {
    const auto t0 = clock::now();
    StepLog log;
    log.step = step;
    log.pose = pose;

    const Observation obs = observe(world, pose, cfg.fov, cfg.sensor, observe_rng, step);
    std::vector<Caption> captions;
    captions.reserve(obs.detections.size());
    for (const auto& d : obs.detections) {
      captions.push_back(caption_object(world.object(GroundTruth::of(d)), pose, cfg.fov, cfg.noise,
                                        world.vocabulary(), caption_rng, step));
    }
    if (opts.record_text) log.prompt = format_prompt(res.memory, obs);

    const auto decisions = cfg.association == AssociationMode::oracle
                               ? associate_oracle(obs, res.memory, registry)
                               : associate_heuristic(obs, captions, res.memory, cfg.matcher, cache);
    const auto committed = apply_matches(res.memory, decisions, obs, captions,
                                         cfg.association == AssociationMode::oracle ? &registry : nullptr);
    log.records = make_records(step, decisions, obs, committed);

    const Action action = policy->act(PolicyContext{grid, pose, res.memory, res.explored, cache, step});
    log.action = action;

    StructuredOutput out;
    out.matches = decisions;
    for (const auto& c : captions) out.captions.push_back(c.text);
    out.action = action;
    const std::string text = render_output(out);
    if (parse_output(text) != out) throw Error("structured output did not survive render/parse");
    if (opts.record_text) log.output = text;

    for (std::size_t k = 0; k < obs.detections.size(); ++k) {
      const auto& d = obs.detections[k];
      log.detections.push_back({d.transient_id, GroundTruth::of(d), d.world_position, d.footprint, captions[k].text});
    }
    const std::string memory_text = serialize(res.memory);
    log.memory_tokens = token_count(memory_text);
    log.entries = res.memory.size();
    log.distinct_captions = res.memory.distinct_caption_total();
    if (opts.record_text) log.memory_text = memory_text;

    if (action != Action::stop) {
      StepResult moved = step_agent(grid, pose, action);
      if (opts.motion_filter) moved = opts.motion_filter(pose, action, moved);
      log.collided = moved.collided;
      pose = moved.pose;
      update_explored(res.explored, grid, pose, cfg.fov);
    }
    res.data.steps.push_back(std::move(log));
    res.step_seconds.push_back(std::chrono::duration<double>(clock::now() - t0).count());
    if (action == Action::stop) break;
  }

  if (auto* dp = dynamic_cast<DisagreementPolicy*>(policy)) {
    res.plan_events = dp->events();
    res.planning_rounds = dp->planning_rounds();
  }
  res.data.final_memory = serialize(res.memory);
  res.metrics = compute_metrics(res.data);
  return res;
}

// World for one seed: generated from the world settings, or the configured world file.
struct EpisodeSeeds {
  std::uint64_t world_seed = 0;
  std::uint64_t policy_seed = 0;
};

inline EpisodeSeeds seeds_for(const RunConfig& cfg, std::uint64_t seed) {
  if (!cfg.world_file.empty()) return {0, seed};
  return {seed, cfg.policy_seed.value_or(seed)};
}

}  // namespace objmem
