// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "objmem/objmem.hpp"

using namespace objmem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string read_golden(const std::string& name) {
  std::ifstream in(std::string(OBJMEM_GOLDEN_DIR) + "/" + name, std::ios::binary);
  if (!in) throw Error("cannot read golden file " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  auto s = ss.str();
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::vector<AssociationRecord> records_of(const EpisodeData& data) {
  std::vector<AssociationRecord> out;
  for (const auto& s : data.steps) out.insert(out.end(), s.records.begin(), s.records.end());
  return out;
}

EpisodeResult run(const RunConfig& cfg, std::uint64_t seed, EpisodeOptions opts = {nullptr, {}, false}) {
  const auto world = world_for(cfg, seed);
  return run_episode(world, cfg, seed, seed, opts);
}

// 1. Reference prompt and output survive formatting and parsing exactly.
Outcome protocol_conformance() {
  const auto prompt = read_golden("reference_prompt.txt");
  const auto output = read_golden("reference_output.txt");
  const auto memory = parse_memory(prompt.substr(prompt.find("[SCENE-START]")));
  const std::vector<TransientId> ids{37, 16};
  const bool prompt_ok = format_prompt(memory, std::span<const TransientId>(ids)) == prompt;
  const auto out = parse_output(output);
  const bool matches_ok = out.matches.size() == 2 && out.matches[0] == MatchDecision{37, 12} &&
                          out.matches[1].transient_id == 16 && out.matches[1].is_new();
  const bool rest_ok = out.captions.size() == 2 && out.action == Action::move_forward;
  const bool render_ok = render_output(out) == output;
  return {prompt_ok && matches_ok && rest_ok && render_ok,
          "prompt=" + std::to_string(prompt_ok) + " matches=" + std::to_string(matches_ok) +
              " captions/action=" + std::to_string(rest_ok) + " render=" + std::to_string(render_ok)};
}

// 2. Random memories and structured outputs round-trip.
Outcome round_trips() {
  static const std::vector<std::string> words{"a", "red", "wooden", "chair", "\"quoted\"", "back\\slash", "with",
                                              "x,", "[MATCH]", "é"};
  Rng rng(2024);
  auto random_text = [&] {
    std::string t;
    const int len = static_cast<int>(rng.uniform_int(1, 6));
    for (int w = 0; w < len; ++w) t += (w ? " " : "") + words[rng.index(words.size())];
    return t;
  };
  std::size_t memory_ok = 0;
  std::size_t output_ok = 0;
  for (int k = 0; k < 1000; ++k) {
    EpisodicMemory m;
    for (int n = static_cast<int>(rng.uniform_int(0, 6)); n > 0; --n) {
      const auto id = m.insert_new(Vec3{rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(0, 2)}, random_text());
      for (int u = static_cast<int>(rng.uniform_int(0, 4)); u > 0; --u) {
        m.update_entry(id, Vec3{rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(0, 2)}, random_text());
      }
    }
    const auto text = serialize(m);
    const auto back = parse_memory(text);
    bool same = serialize(back) == text && back.size() == m.size();
    for (std::size_t i = 0; same && i < m.size(); ++i) {
      same = back.entries()[i].id == m.entries()[i].id && back.entries()[i].captions == m.entries()[i].captions &&
             discretize_position(back.entries()[i].position) == discretize_position(m.entries()[i].position);
    }
    memory_ok += same;

    StructuredOutput out;
    std::set<TransientId> used;
    for (int n = static_cast<int>(rng.uniform_int(0, 6)); n > 0; --n) {
      const auto t = static_cast<TransientId>(rng.uniform_int(0, 99));
      if (!used.insert(t).second) continue;
      MatchDecision d{t, std::nullopt};
      if (rng.bernoulli(0.6)) d.target = static_cast<PersistentId>(rng.uniform_int(1, 999));
      out.matches.push_back(d);
      out.captions.push_back(random_text());
    }
    out.action = kAllActions[rng.index(kAllActions.size())];
    const auto rendered = render_output(out);
    const auto parsed = parse_output(rendered);
    output_ok += parsed.matches == out.matches && parsed.captions == out.captions && parsed.action == out.action &&
                 render_output(parsed) == rendered;
  }
  return {memory_ok == 1000 && output_ok == 1000,
          "memories " + std::to_string(memory_ok) + "/1000, outputs " + std::to_string(output_ok) + "/1000"};
}

// 3. No noise and oracle association: perfect consistency, immediate stop.
Outcome noiseless_fixpoint() {
  RunConfig cfg;
  cfg.noise = NoiseModel::noiseless();
  cfg.association = AssociationMode::oracle;
  cfg.policy = PolicyKind::disagreement;
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = run(cfg, seed);
    const Vocabulary vocab = Vocabulary::household();
    Embedder embedder(vocab);
    EmbeddingCache cache(embedder);
    double max_dis = 0.0;
    for (const auto& e : r.memory.entries()) max_dis = std::max(max_dis, object_disagreement(e, cache));
    const bool stopped = !r.data.steps.empty() && r.data.steps.back().action == Action::stop;
    const bool seed_ok = r.memory.size() > 0 && max_dis == 0.0 && r.metrics.cs_mean == 1.0 &&
                         r.metrics.cs_iqr == 0.0 && r.planning_rounds == 1 && stopped;
    ok = ok && seed_ok;
    detail += "seed " + std::to_string(seed) + ": entries=" + std::to_string(r.memory.size()) +
              " max_dis=" + fmt(max_dis) + " cs=" + fmt(r.metrics.cs_mean.value_or(-1)) +
              " iqr=" + fmt(r.metrics.cs_iqr.value_or(-1)) + " rounds=" + std::to_string(r.planning_rounds) +
              " stop=" + std::to_string(stopped) + "; ";
  }
  return {ok, detail};
}

// 4. Hand-enumerated tape and oracle episodes.
Outcome association_oracle() {
  auto rec = [](int step, TransientId t, std::optional<PersistentId> target, PersistentId committed, TrueId truth) {
    return AssociationRecord{step, MatchDecision{t, target}, committed, truth};
  };
  const std::vector<AssociationRecord> tape{rec(1, 1, {}, 1, 100), rec(1, 2, {}, 2, 200), rec(2, 3, 1, 1, 100),
                                            rec(3, 4, 2, 2, 100),  rec(4, 5, {}, 3, 100), rec(5, 6, 2, 2, 200)};
  const auto m = evaluate_association(tape);
  const bool tape_ok = std::abs(m.accuracy - 4.0 / 6.0) < 1e-12 && m.idsw == 1 && m.frag == 1;
  bool episodes_ok = true;
  std::size_t decisions = 0;
  for (auto kind : {PolicyKind::random, PolicyKind::frontier, PolicyKind::disagreement}) {
    RunConfig cfg;
    cfg.policy = kind;
    cfg.association = AssociationMode::oracle;
    cfg.episode_cap = 150;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto em = evaluate_association(records_of(run(cfg, seed, {nullptr, {}, true}).data));
      decisions += em.total;
      episodes_ok = episodes_ok && em.accuracy == 1.0 && em.idsw == 0 && em.frag == 0;
    }
  }
  return {tape_ok && episodes_ok, "tape acc=" + fmt(m.accuracy) + " idsw=" + std::to_string(m.idsw) +
                                      " frag=" + std::to_string(m.frag) + "; 9 oracle episodes perfect=" +
                                      std::to_string(episodes_ok) + " over " + std::to_string(decisions) +
                                      " decisions"};
}

// 5. Heuristic association: perfect when objects are farther apart than the
// distance gate; more identity errors once separation drops below it.
Outcome heuristic_soundness() {
  RunConfig cfg;
  cfg.noise = NoiseModel::noiseless();
  cfg.association = AssociationMode::heuristic;
  cfg.policy = PolicyKind::frontier;  // covers the whole world
  auto errors_at = [&](double separation, double& min_acc) {
    RunConfig c = cfg;
    c.world.min_object_separation = separation;
    std::vector<double> errors;
    min_acc = 1.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto r = run(c, seed, {nullptr, {}, true});
      const auto m = evaluate_association(records_of(r.data));
      min_acc = std::min(min_acc, m.accuracy);
      errors.push_back(static_cast<double>(m.idsw + m.frag));
    }
    return median(errors);
  };
  double acc_far = 0.0;
  double acc_near = 0.0;
  const double gate = cfg.matcher.distance_gate;
  const double far = errors_at(gate + 0.25, acc_far);
  const double near = errors_at(cfg.world.cell_size, acc_near);
  return {acc_far == 1.0 && near > far, "separation " + fmt(gate + 0.25) + " m: min acc=" + fmt(acc_far) +
                                            " median idsw+frag=" + fmt(far) + "; separation " +
                                            fmt(cfg.world.cell_size) + " m: min acc=" + fmt(acc_near) +
                                            " median idsw+frag=" + fmt(near)};
}

// 6. Disagreement policy beats random-goal and frontier on matched seeds.
Outcome policy_directional() {
  RunConfig cfg;
  cfg.seeds.clear();
  for (std::uint64_t s = 1; s <= 20; ++s) cfg.seeds.push_back(s);
  const auto r = compare_policies(cfg, {PolicyKind::disagreement, PolicyKind::random, PolicyKind::frontier});
  const auto cs_random = win_count(r, 0, 1, "cs_mean", false);
  const auto cs_frontier = win_count(r, 0, 2, "cs_mean", false);
  const auto dis_random = win_count(r, 0, 1, "disagreement_mean", true);
  const auto dis_frontier = win_count(r, 0, 2, "disagreement_mean", true);
  return {cs_random >= 15 && cs_frontier >= 13 && dis_random >= 15 && dis_frontier >= 13,
          "CS wins vs random " + std::to_string(cs_random) + "/20 (need 15), vs frontier " +
              std::to_string(cs_frontier) + "/20 (need 13); disagreement wins vs random " +
              std::to_string(dis_random) + "/20, vs frontier " + std::to_string(dis_frontier) + "/20"};
}

// 7. Token count tracks object count, not elapsed steps.
Outcome memory_scalability_check() {
  RunConfig cfg;
  cfg.world.width = 16;
  cfg.world.height = 16;
  cfg.world.obstacle_density = 0.0;
  cfg.world.object_count = 6;
  cfg.noise = NoiseModel::noiseless();
  cfg.policy = PolicyKind::random;
  cfg.episode_cap = 300;
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto r = run(cfg, seed, {nullptr, {}, true});
    std::vector<ScalabilityPoint> series;
    for (const auto& s : r.data.steps) series.push_back({s.step, s.memory_tokens, s.entries, s.distinct_captions, 0.0});
    const auto sc = memory_scalability(series);
    const bool all_found = r.metrics.objects_discovered == static_cast<std::size_t>(cfg.world.object_count);
    const bool seed_ok = all_found && sc.saturation_step <= 100 && sc.suffix_constant && sc.pass;
    ok = ok && seed_ok;
    detail += "seed " + std::to_string(seed) + ": sat=" + std::to_string(sc.saturation_step) +
              " corr_obj=" + fmt(sc.corr_tokens_objects) + " corr_suffix=" + fmt(sc.corr_tokens_suffix_step) +
              (seed_ok ? "" : " FAIL") + "; ";
  }
  return {ok, detail};
}

// 8. Per-step wall time stays bounded over a full episode.
Outcome timing_bounded() {
  RunConfig cfg;
  cfg.policy = PolicyKind::disagreement;
  std::vector<std::vector<double>> repeats;
  std::size_t steps = 0;
  std::size_t entries = 0;
  for (int k = 0; k < 5; ++k) {
    const auto r = run(cfg, 1, {nullptr, {}, true});
    steps = r.data.steps.size();
    entries = r.memory.size();
    repeats.push_back(r.step_seconds);
  }
  const auto t = timing_profile(min_over_repeats(repeats));
  return {steps == 400 && t.ratio <= 10.0, std::to_string(steps) + " steps, " + std::to_string(entries) +
                                               " entries, median " + fmt(t.median * 1e3) + " ms, max " +
                                               fmt(t.max * 1e3) + " ms, ratio " + fmt(t.ratio)};
}

// 9. Consensus recovers the true caption under per-attribute corruption.
Outcome consensus_recovery() {
  const Vocabulary vocab = Vocabulary::household();
  const NoiseModel noise{0.2, 0.0, 0.0, 1.0, 0.2};
  const OccupancyGrid grid(12, 5, 0.25);
  const AgentPose pose{Cell{1, 2}, 0, 4};
  int exact = 0;
  int unanimity_violations = 0;
  int context_leaks = 0;
  for (std::uint64_t trial = 0; trial < 500; ++trial) {
    Rng rng(derive_seed(9000, trial));
    WorldObject obj;
    obj.true_id = 1;
    obj.cell = Cell{5, 2};
    obj.center = grid.center(obj.cell, 0.5);
    obj.attributes = detail::sample_attributes(vocab, rng);
    ObjectEntry entry;
    entry.id = 1;
    std::optional<std::set<std::string>> common;
    for (int k = 0; k < 20; ++k) {
      const auto cap = caption_object(obj, pose, FieldOfView{}, noise, vocab, rng, k);
      std::set<std::string> attrs(cap.attributes.modifiers.begin(), cap.attributes.modifiers.end());
      attrs.insert(cap.attributes.category);
      if (!common) {
        common = attrs;
      } else {
        std::set<std::string> both;
        std::set_intersection(common->begin(), common->end(), attrs.begin(), attrs.end(),
                              std::inserter(both, both.begin()));
        common = both;
      }
      auto it = std::find_if(entry.captions.begin(), entry.captions.end(),
                             [&](const CaptionCount& c) { return c.text == cap.text; });
      if (it == entry.captions.end()) entry.captions.push_back({cap.text, 1});
      else ++it->count;
      ++entry.observation_count;
    }
    const auto pc = consensus_caption(entry, vocab);
    exact += pc.text == render_caption(AttributeSet{obj.attributes.category, obj.attributes.modifiers, {}});
    const auto words = content_words(pc.text);
    for (const auto& a : *common) {
      if (std::find(words.begin(), words.end(), a) == words.end()) ++unanimity_violations;
    }
    for (const auto& w : words) context_leaks += vocab.kind(w) == TokenKind::context;
  }
  return {exact >= 475 && unanimity_violations == 0 && context_leaks == 0,
          "exact " + std::to_string(exact) + "/500 (need 475), unanimity violations " +
              std::to_string(unanimity_violations) + ", context tokens in output " + std::to_string(context_leaks)};
}

// 10. Dead end: stuck after exactly tau_s observations, abandon after N_rec recoveries.
Outcome recovery_behavior() {
  ExplorationConfig cfg;
  cfg.initial_scan_turns = 0;
  const OccupancyGrid grid(20, 20, 0.25);
  AgentPose pose{Cell{2, 2}, 0, 4};
  const Vocabulary vocab = Vocabulary::household();
  Embedder embedder(vocab);
  EmbeddingCache cache(embedder);
  EpisodicMemory memory;
  ObjectEntry e;
  e.id = 1;
  e.position = grid.center(Cell{12, 12}, 0.5);
  e.captions = {{"a red chair", 1}, {"a tall lamp", 1}};
  e.observation_count = 2;
  memory.restore_entry(e);
  ExploredMap explored(grid.width(), grid.height());
  update_explored(explored, grid, pose, FieldOfView{});

  // Every forward move fails: the agent can turn but never leave its cell.
  DisagreementPolicy policy(cfg, 2);
  std::vector<int> stuck_steps;
  int first_goal_step = -1;
  for (int step = 0; step < 200; ++step) {
    const auto before = policy.events().size();
    const Action a = policy.act(PolicyContext{grid, pose, memory, explored, cache, step});
    for (std::size_t i = before; i < policy.events().size(); ++i) {
      if (policy.events()[i].kind == "stuck") stuck_steps.push_back(step);
      if (policy.events()[i].kind == "goal" && first_goal_step < 0) first_goal_step = step;
    }
    if (a == Action::stop) break;
    if (a != Action::move_forward) pose = step_agent(grid, pose, a).pose;
    update_explored(explored, grid, pose, FieldOfView{});
  }
  int recovers = 0;
  int abandons = 0;
  for (const auto& ev : policy.events()) {
    recovers += ev.kind == "recover";
    abandons += ev.kind == "abandon";
  }
  // Observations 0..tau_s-1 of the first leg fill the window.
  const bool first_ok = !stuck_steps.empty() && first_goal_step == 0 && stuck_steps.front() == cfg.stuck_window - 1;
  const bool abandon_ok = recovers == cfg.recovery_attempts && abandons == 1 &&
                          stuck_steps.size() == static_cast<std::size_t>(cfg.recovery_attempts + 1);

  // A sealed pocket offers no free cell: recovery gives up after N_rec draws.
  OccupancyGrid sealed(5, 5, 0.25);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) sealed.set_obstacle(Cell{c, r}, !(r == 2 && c == 2));
  }
  Rng rng(3);
  const auto rr = recover(sealed, AgentPose{Cell{2, 2}, 0, 4}, cfg, rng);
  const bool sealed_ok = !rr.goal && rr.attempts == cfg.recovery_attempts;
  return {first_ok && abandon_ok && sealed_ok,
          "first stuck at observation " + std::to_string(stuck_steps.empty() ? -1 : stuck_steps.front() + 1) +
              " (tau_s=" + std::to_string(cfg.stuck_window) + ", eps_p=" + fmt(cfg.displacement_eps) +
              " m), recoveries " + std::to_string(recovers) + ", abandons " + std::to_string(abandons) +
              ", sealed-pocket draws " + std::to_string(rr.attempts)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"C1 protocol conformance", protocol_conformance},
      {"C2 round-trip properties", round_trips},
      {"C3 noiseless fixpoint", noiseless_fixpoint},
      {"C4 association metric oracle", association_oracle},
      {"C5 heuristic association soundness", heuristic_soundness},
      {"C6 policy directional claim", policy_directional},
      {"C7 memory scalability", memory_scalability_check},
      {"C8 timing boundedness", timing_bounded},
      {"C9 consensus aggregator", consensus_recovery},
      {"C10 recovery behavior", recovery_behavior},
  };
  // Optional filter: run only criteria whose label starts with an argument.
  std::vector<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    if (!only.empty() && std::none_of(only.begin(), only.end(), [&](const std::string& o) {
          return name.rfind(o + " ", 0) == 0;
        })) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " [" << fmt(secs) << " s] " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
