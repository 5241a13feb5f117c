#pragma once

// Disagreement-driven exploration: per-object caption disagreement projected
// onto the grid, thresholded into target regions, visited from ranked
// candidate viewpoints, with stuck detection and local recovery. Frontier and
// random-goal policies share the same interface.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "objmem/core.hpp"
#include "objmem/memory.hpp"
#include "objmem/oracle.hpp"
#include "objmem/world.hpp"

namespace objmem {

enum class OverlapRule { max, sum };

inline std::string_view to_string(OverlapRule r) { return r == OverlapRule::max ? "max" : "sum"; }

struct ExplorationConfig {
  double alpha = 0.7;                        // α
  int area_min = 3;                          // A_min, cells
  std::vector<double> radii{0.5, 1.0, 2.0};  // 𝓡, meters
  int candidates_per_radius = 30;            // N_r
  int viewpoints_min = 5;                    // N_min
  int viewpoints_max = 20;                   // N_max
  int stuck_window = 5;                      // τ_s, steps
  double displacement_eps = 0.15;            // ε_p, meters
  int recovery_attempts = 5;                 // N_rec
  double disagreement_threshold = 0.5;       // on the max-normalized map
  double safety_margin = 0.3;                // meters, viewpoint navigability
  double recovery_radius = 0.5;              // meters
  double footprint_radius = 0.25;            // meters, map projection disc
  OverlapRule overlap = OverlapRule::max;
  int initial_scan_turns = 8;

  std::vector<std::string> problems() const {
    std::vector<std::string> out;
    auto need = [&](bool ok, const char* what) {
      if (!ok) out.emplace_back(what);
    };
    need(alpha >= 0.0 && alpha <= 1.0, "exploration.alpha must lie in [0, 1]");
    need(area_min >= 1, "exploration.area_min must be >= 1");
    need(!radii.empty(), "exploration.radii must not be empty");
    for (double r : radii) need(std::isfinite(r) && r > 0.0, "exploration.radii entries must be > 0");
    need(candidates_per_radius >= 1, "exploration.candidates_per_radius must be >= 1");
    need(viewpoints_min >= 1, "exploration.viewpoints_min must be >= 1");
    need(viewpoints_max >= viewpoints_min, "exploration.viewpoints_max must be >= viewpoints_min");
    need(stuck_window >= 1, "exploration.stuck_window must be >= 1");
    need(std::isfinite(displacement_eps) && displacement_eps > 0.0, "exploration.displacement_eps must be > 0");
    need(recovery_attempts >= 1, "exploration.recovery_attempts must be >= 1");
    need(disagreement_threshold >= 0.0 && disagreement_threshold <= 1.0,
         "exploration.disagreement_threshold must lie in [0, 1]");
    need(std::isfinite(safety_margin) && safety_margin >= 0.0, "exploration.safety_margin must be >= 0");
    need(std::isfinite(recovery_radius) && recovery_radius > 0.0, "exploration.recovery_radius must be > 0");
    need(std::isfinite(footprint_radius) && footprint_radius >= 0.0, "exploration.footprint_radius must be >= 0");
    need(initial_scan_turns >= 0, "exploration.initial_scan_turns must be >= 0");
    return out;
  }
};

// ---------------------------------------------------------------------------
// Disagreement

// Mean of (1 - cos) over all unordered pairs of the count-weighted caption
// multiset. Pairs of identical captions contribute 0.
inline double object_disagreement(const ObjectEntry& entry, EmbeddingCache& cache) {
  double n = 0.0;
  for (const auto& c : entry.captions) n += c.count;
  if (n < 2.0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < entry.captions.size(); ++i) {
    for (std::size_t j = i + 1; j < entry.captions.size(); ++j) {
      const double d = 1.0 - cache.similarity(entry.captions[i].text, entry.captions[j].text);
      sum += static_cast<double>(entry.captions[i].count) * entry.captions[j].count * d;
    }
  }
  return sum / (n * (n - 1.0) / 2.0);
}

class DisagreementMap {
 public:
  DisagreementMap() = default;
  DisagreementMap(int width, int height)
      : width_(width), height_(height), values_(static_cast<std::size_t>(width) * height, 0.0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool in_bounds(Cell c) const { return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_; }
  double at(Cell c) const { return in_bounds(c) ? values_[index(c)] : 0.0; }
  void set(Cell c, double v) { values_[index(c)] = v; }
  const std::vector<double>& values() const { return values_; }
  double max_value() const { return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end()); }

  std::size_t skipped_entries = 0;  // entries whose position fell outside the grid

 private:
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.row) * width_ + c.col; }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

// Writes each entry's disagreement onto the free cells whose centers lie
// within `footprint_radius` of the entry's position estimate.
inline DisagreementMap build_disagreement_map(const EpisodicMemory& memory, const OccupancyGrid& grid,
                                              const ExplorationConfig& cfg, EmbeddingCache& cache) {
  DisagreementMap map(grid.width(), grid.height());
  const double cs = grid.cell_size();
  for (const auto& e : memory.entries()) {
    const Cell home = grid.cell_of(e.position);
    if (!grid.in_bounds(home)) {
      ++map.skipped_entries;
      continue;
    }
    const double d = object_disagreement(e, cache);
    if (d <= 0.0) continue;
    const int r = static_cast<int>(std::ceil(cfg.footprint_radius / cs)) + 1;
    for (int drow = -r; drow <= r; ++drow) {
      for (int dcol = -r; dcol <= r; ++dcol) {
        const Cell c{home.col + dcol, home.row + drow};
        if (!grid.is_free(c)) continue;
        if (planar_distance(grid.center(c), e.position) > cfg.footprint_radius + 1e-9) continue;
        const double prev = map.at(c);
        map.set(c, cfg.overlap == OverlapRule::max ? std::max(prev, d) : prev + d);
      }
    }
  }
  return map;
}

struct TargetRegion {
  std::vector<Cell> cells;
  double centroid_col = 0.0;  // mean of member cell indices
  double centroid_row = 0.0;
  double mean_disagreement = 0.0;  // raw map units
  double normalized = 0.0;         // mean of max-normalized values
  std::size_t area() const { return cells.size(); }

  Vec3 centroid(const OccupancyGrid& grid) const {
    return Vec3{(centroid_col + 0.5) * grid.cell_size(), (centroid_row + 0.5) * grid.cell_size(), 0.0};
  }
};

inline std::vector<TargetRegion> extract_targets(const DisagreementMap& map, const ExplorationConfig& cfg) {
  std::vector<TargetRegion> out;
  const double peak = map.max_value();
  if (!(peak > 0.0)) return out;
  const int w = map.width();
  const int h = map.height();
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(w) * h, 0);
  auto keep = [&](Cell c) { return map.at(c) > 0.0 && map.at(c) / peak >= cfg.disagreement_threshold; };
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const Cell start{col, row};
      const std::size_t si = static_cast<std::size_t>(row) * w + col;
      if (seen[si] || !keep(start)) continue;
      TargetRegion t;
      std::deque<Cell> queue{start};
      seen[si] = 1;
      double raw = 0.0;
      while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        t.cells.push_back(c);
        raw += map.at(c);
        for (const Cell& n : kNeighbors4) {
          const Cell next{c.col + n.col, c.row + n.row};
          if (!keep(next)) continue;
          const std::size_t ni = static_cast<std::size_t>(next.row) * w + next.col;
          if (seen[ni]) continue;
          seen[ni] = 1;
          queue.push_back(next);
        }
      }
      if (static_cast<int>(t.cells.size()) < cfg.area_min) continue;
      std::sort(t.cells.begin(), t.cells.end());
      double sc = 0.0;
      double sr = 0.0;
      for (const Cell& c : t.cells) {
        sc += c.col;
        sr += c.row;
      }
      const double n = static_cast<double>(t.cells.size());
      t.centroid_col = sc / n;
      t.centroid_row = sr / n;
      t.mean_disagreement = raw / n;
      t.normalized = t.mean_disagreement / peak;
      out.push_back(std::move(t));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const TargetRegion& a, const TargetRegion& b) {
    return a.mean_disagreement > b.mean_disagreement;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Viewpoints

struct Viewpoint {
  Cell cell;
  int heading = 0;
  double radius = 0.0;
  int angular_index = 0;  // ring-major index among the pre-filter candidates
  double target_disagreement = 0.0;  // normalized disagreement of its target
  int path_length = -1;
  double score = 0.0;
};

struct ViewpointSet {
  std::vector<Viewpoint> viewpoints;
  std::size_t pre_filter = 0;
  std::size_t survivors = 0;
  bool degraded = false;  // fewer than viewpoints_min survived the filter
};

// All ring candidates snapped to cells, deduplicated, facing the centroid and
// filtered by navigability.
inline std::vector<Viewpoint> ring_candidates(const OccupancyGrid& grid, const TargetRegion& target,
                                              const ExplorationConfig& cfg, int heading_count,
                                              std::size_t* pre_filter = nullptr) {
  const Vec3 c = target.centroid(grid);
  std::vector<Viewpoint> out;
  std::set<Cell> taken;
  std::size_t total = 0;
  int index = 0;
  for (double radius : cfg.radii) {
    for (int k = 0; k < cfg.candidates_per_radius; ++k, ++index) {
      const double a = 2.0 * kPi * k / cfg.candidates_per_radius;
      const Cell cell = grid.cell_of(Vec3{c.x + radius * std::cos(a), c.y + radius * std::sin(a), 0.0});
      ++total;
      if (!taken.insert(cell).second) continue;
      if (!is_navigable(grid, cell, cfg.safety_margin)) continue;
      Viewpoint v;
      v.cell = cell;
      v.heading = heading_toward(target.centroid_col - cell.col, target.centroid_row - cell.row, heading_count);
      v.radius = radius;
      v.angular_index = index;
      v.target_disagreement = target.normalized;
      out.push_back(v);
    }
  }
  if (pre_filter) *pre_filter = total;
  return out;
}

inline ViewpointSet candidate_viewpoints(const OccupancyGrid& grid, const TargetRegion& target,
                                         const ExplorationConfig& cfg, Rng& rng, int heading_count = 4) {
  ViewpointSet set;
  auto survivors = ring_candidates(grid, target, cfg, heading_count, &set.pre_filter);
  set.survivors = survivors.size();
  if (static_cast<int>(survivors.size()) < cfg.viewpoints_min) {
    set.degraded = true;
    set.viewpoints = std::move(survivors);
    return set;
  }
  const int hi = std::min<int>(cfg.viewpoints_max, static_cast<int>(survivors.size()));
  const auto count = static_cast<std::size_t>(rng.uniform_int(cfg.viewpoints_min, hi));
  set.viewpoints = rng.sample(std::move(survivors), count);
  std::sort(set.viewpoints.begin(), set.viewpoints.end(),
            [](const Viewpoint& a, const Viewpoint& b) { return a.angular_index < b.angular_index; });
  return set;
}

// score = α·d_norm − (1−α)·cost_norm with cost_norm the min-max normalized
// path length over the batch. Unreachable viewpoints are dropped. Descending
// score, then shorter path, then lower angular index.
inline std::vector<Viewpoint> rank_viewpoints(std::vector<Viewpoint> viewpoints, const AgentPose& pose,
                                              const ExplorationConfig& cfg, const OccupancyGrid& grid) {
  const auto dist = distance_field(grid, pose.cell);
  std::vector<Viewpoint> reachable;
  for (auto& v : viewpoints) {
    if (!grid.in_bounds(v.cell)) continue;
    const int d = dist[grid.index(v.cell)];
    if (d < 0) continue;
    v.path_length = d;
    reachable.push_back(v);
  }
  if (reachable.empty()) return reachable;
  const auto [lo, hi] = std::minmax_element(reachable.begin(), reachable.end(), [](const Viewpoint& a, const Viewpoint& b) {
    return a.path_length < b.path_length;
  });
  const double cmin = lo->path_length;
  const double span = hi->path_length - cmin;
  for (auto& v : reachable) {
    const double cost_norm = span > 0.0 ? (v.path_length - cmin) / span : 0.0;
    v.score = cfg.alpha * v.target_disagreement - (1.0 - cfg.alpha) * cost_norm;
  }
  std::sort(reachable.begin(), reachable.end(), [](const Viewpoint& a, const Viewpoint& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.path_length != b.path_length) return a.path_length < b.path_length;
    return a.angular_index < b.angular_index;
  });
  return reachable;
}

// ---------------------------------------------------------------------------
// Stuck detection and recovery

// True when the history holds at least τ_s positions and every one of the
// last τ_s lies within ε_p of the first of them.
inline bool detect_stuck(const std::vector<Vec3>& history, const ExplorationConfig& cfg) {
  const auto window = static_cast<std::size_t>(cfg.stuck_window);
  if (history.size() < window) return false;
  const Vec3& origin = history[history.size() - window];
  for (std::size_t k = history.size() - window; k < history.size(); ++k) {
    if (planar_distance(history[k], origin) >= cfg.displacement_eps) return false;
  }
  return true;
}

struct RecoveryResult {
  std::optional<Cell> goal;  // nullopt: abandon the current target
  int attempts = 0;
};

// Up to N_rec uniform draws of a cell within the recovery radius; the first
// free, reachable cell other than the current one becomes the goal.
inline RecoveryResult recover(const OccupancyGrid& grid, const AgentPose& pose, const ExplorationConfig& cfg,
                              Rng& rng) {
  RecoveryResult res;
  const int r = std::max(1, static_cast<int>(std::lround(cfg.recovery_radius / grid.cell_size())));
  std::vector<Cell> disc;
  for (int drow = -r; drow <= r; ++drow) {
    for (int dcol = -r; dcol <= r; ++dcol) {
      if ((dcol != 0 || drow != 0) && dcol * dcol + drow * drow <= r * r) disc.push_back(Cell{dcol, drow});
    }
  }
  for (int k = 0; k < cfg.recovery_attempts; ++k) {
    ++res.attempts;
    const Cell off = disc[rng.index(disc.size())];
    const Cell cand{pose.cell.col + off.col, pose.cell.row + off.row};
    if (!grid.is_free(cand)) continue;
    if (!shortest_path(grid, pose.cell, cand)) continue;
    res.goal = cand;
    return res;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Policies

struct PolicyContext {
  const OccupancyGrid& grid;
  AgentPose pose;
  const EpisodicMemory& memory;
  const ExploredMap& explored;
  EmbeddingCache& cache;
  int step = 0;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action act(const PolicyContext& ctx) = 0;
  virtual std::string_view name() const = 0;
};

// Next action along a 4-connected path toward its last cell, ending with a
// turn to `final_heading` when given. nullopt once there (or off the path).
inline std::optional<Action> follow_path(const std::vector<Cell>& path, const AgentPose& pose,
                                         std::optional<int> final_heading = std::nullopt) {
  auto it = std::find(path.begin(), path.end(), pose.cell);
  if (it == path.end()) return std::nullopt;
  if (std::next(it) == path.end()) {
    if (final_heading && *final_heading != pose.heading) {
      return turn_toward(pose.heading, *final_heading, pose.heading_count);
    }
    return std::nullopt;
  }
  const Cell next = *std::next(it);
  const int want = heading_toward(next.col - pose.cell.col, next.row - pose.cell.row, pose.heading_count);
  if (want == pose.heading) return Action::move_forward;
  return turn_toward(pose.heading, want, pose.heading_count);
}

// One navigation leg: a goal, its path, and the pose history used by the
// stuck detector.
struct Leg {
  Cell goal;
  std::optional<int> final_heading;
  std::vector<Cell> path;
  std::vector<Vec3> history;
  bool recovery = false;
};

struct PlanEvent {
  int step = 0;
  std::string kind;  // "plan", "goal", "stuck", "recover", "abandon", "stop"
  Cell cell;
};

// Nearest explored free cell bordering an unexplored free cell; on arrival the
// agent faces the unexplored neighbor. Stops when no reachable frontier is left.
class FrontierPolicy final : public Policy {
 public:
  std::string_view name() const override { return "frontier"; }

  static bool is_frontier(const OccupancyGrid& grid, const ExploredMap& explored, Cell c) {
    if (!grid.is_free(c) || !explored.explored(c)) return false;
    for (const Cell& n : kNeighbors4) {
      const Cell next{c.col + n.col, c.row + n.row};
      if (grid.is_free(next) && !explored.explored(next)) return true;
    }
    return false;
  }

  Action act(const PolicyContext& ctx) override {
    for (int guard = 0; guard < 4; ++guard) {
      if (goal_ && is_frontier(ctx.grid, ctx.explored, *goal_)) {
        if (auto a = follow_path(path_, ctx.pose, facing_)) return *a;
      }
      if (!replan(ctx)) return Action::stop;
    }
    return Action::stop;
  }

 private:
  bool replan(const PolicyContext& ctx) {
    goal_.reset();
    const auto dist = distance_field(ctx.grid, ctx.pose.cell);
    int best = std::numeric_limits<int>::max();
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      if (dist[i] < 0 || dist[i] >= best) continue;
      if (!is_frontier(ctx.grid, ctx.explored, ctx.grid.cell_at(i))) continue;
      best = dist[i];
      best_idx = i;
    }
    if (best == std::numeric_limits<int>::max()) return false;
    const Cell goal = ctx.grid.cell_at(best_idx);
    auto path = shortest_path(ctx.grid, ctx.pose.cell, goal);
    if (!path) return false;
    facing_.reset();
    for (const Cell& n : kNeighbors4) {
      const Cell next{goal.col + n.col, goal.row + n.row};
      if (ctx.grid.is_free(next) && !ctx.explored.explored(next)) {
        facing_ = heading_toward(n.col, n.row, ctx.pose.heading_count);
        break;
      }
    }
    goal_ = goal;
    path_ = std::move(*path);
    return true;
  }

  std::optional<Cell> goal_;
  std::optional<int> facing_;
  std::vector<Cell> path_;
};

class DisagreementPolicy final : public Policy {
 public:
  DisagreementPolicy(ExplorationConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)), rng_(seed) {}

  std::string_view name() const override { return "disagreement"; }

  Action act(const PolicyContext& ctx) override {
    if (stopped_) return Action::stop;
    if (scan_done_ < cfg_.initial_scan_turns) {
      ++scan_done_;
      return Action::turn_left;
    }
    // Nothing recorded yet, so there is no disagreement to act on: walk
    // frontiers until the first object enters memory.
    if (ctx.memory.entries().empty()) {
      const Action a = bootstrap_.act(ctx);
      if (a == Action::stop) stopped_ = true;
      return a;
    }
    // Bounded so a degenerate plan can never spin without emitting an action.
    for (int guard = 0; guard < 10000; ++guard) {
      if (leg_) {
        if (auto a = advance_leg(ctx)) return *a;
        continue;
      }
      if (!viewpoints_.empty()) {
        start_viewpoint_leg(ctx);
        continue;
      }
      if (!targets_.empty()) {
        start_target(ctx);
        continue;
      }
      ++planning_rounds_;
      targets_ = plan_targets(ctx);
      log(ctx, "plan", ctx.pose.cell);
      if (targets_.empty()) {
        stopped_ = true;
        log(ctx, "stop", ctx.pose.cell);
        return Action::stop;
      }
    }
    stopped_ = true;
    return Action::stop;
  }

  int planning_rounds() const { return planning_rounds_; }
  const std::vector<PlanEvent>& events() const { return events_; }
  const std::optional<Leg>& leg() const { return leg_; }
  const std::set<Cell>& abandoned_cells() const { return abandoned_; }

 private:
  void log(const PolicyContext& ctx, const char* kind, Cell c) { events_.push_back({ctx.step, kind, c}); }

  std::deque<TargetRegion> plan_targets(const PolicyContext& ctx) {
    const auto map = build_disagreement_map(ctx.memory, ctx.grid, cfg_, ctx.cache);
    std::deque<TargetRegion> out;
    for (auto& t : extract_targets(map, cfg_)) {
      const bool dropped = std::any_of(t.cells.begin(), t.cells.end(), [&](const Cell& c) { return abandoned_.count(c); });
      if (!dropped) out.push_back(std::move(t));
    }
    return out;
  }

  void start_target(const PolicyContext& ctx) {
    current_ = std::move(targets_.front());
    targets_.pop_front();
    recoveries_ = 0;
    const auto set = candidate_viewpoints(ctx.grid, *current_, cfg_, rng_, ctx.pose.heading_count);
    auto ranked = rank_viewpoints(set.viewpoints, ctx.pose, cfg_, ctx.grid);
    if (ranked.empty()) {
      abandon(ctx);
      return;
    }
    viewpoints_.assign(ranked.begin(), ranked.end());
  }

  void start_viewpoint_leg(const PolicyContext& ctx) {
    const Viewpoint v = viewpoints_.front();
    viewpoints_.pop_front();
    auto path = shortest_path(ctx.grid, ctx.pose.cell, v.cell);
    if (!path) return;
    leg_ = Leg{v.cell, v.heading, std::move(*path), {}, false};
    log(ctx, "goal", v.cell);
  }

  void abandon(const PolicyContext& ctx) {
    if (current_) {
      for (const Cell& c : current_->cells) abandoned_.insert(c);
    }
    log(ctx, "abandon", ctx.pose.cell);
    viewpoints_.clear();
    leg_.reset();
    current_.reset();
  }

  // Action for the active leg, or nullopt when the leg finished this call.
  std::optional<Action> advance_leg(const PolicyContext& ctx) {
    Leg& leg = *leg_;
    leg.history.push_back(ctx.pose.position(ctx.grid));
    auto action = follow_path(leg.path, ctx.pose, leg.final_heading);
    if (!action) {
      if (ctx.pose.cell != leg.goal) {
        // Knocked off the path: replan from here.
        auto path = shortest_path(ctx.grid, ctx.pose.cell, leg.goal);
        if (path) {
          leg.path = std::move(*path);
          action = follow_path(leg.path, ctx.pose, leg.final_heading);
        }
        if (!action) {
          leg_.reset();
          return std::nullopt;
        }
      } else {
        // Arrived and oriented; this step's observation was the dwell.
        leg_.reset();
        return std::nullopt;
      }
    }
    if (detect_stuck(leg.history, cfg_)) {
      log(ctx, "stuck", ctx.pose.cell);
      if (recoveries_ >= cfg_.recovery_attempts) {
        abandon(ctx);
        return std::nullopt;
      }
      ++recoveries_;
      const auto rec = recover(ctx.grid, ctx.pose, cfg_, rng_);
      if (!rec.goal) {
        abandon(ctx);
        return std::nullopt;
      }
      log(ctx, "recover", *rec.goal);
      auto path = shortest_path(ctx.grid, ctx.pose.cell, *rec.goal);
      if (!path) {
        abandon(ctx);
        return std::nullopt;
      }
      // The interrupted viewpoint is retried after the recovery leg.
      if (!leg.recovery) {
        Viewpoint retry;
        retry.cell = leg.goal;
        retry.heading = leg.final_heading.value_or(ctx.pose.heading);
        viewpoints_.push_front(retry);
      }
      leg_ = Leg{*rec.goal, std::nullopt, std::move(*path), {}, true};
      return follow_path(leg_->path, ctx.pose);
    }
    return action;
  }

  ExplorationConfig cfg_;
  Rng rng_;
  FrontierPolicy bootstrap_;
  int scan_done_ = 0;
  bool stopped_ = false;
  int planning_rounds_ = 0;
  int recoveries_ = 0;
  std::deque<TargetRegion> targets_;
  std::optional<TargetRegion> current_;
  std::deque<Viewpoint> viewpoints_;
  std::optional<Leg> leg_;
  std::set<Cell> abandoned_;
  std::vector<PlanEvent> events_;
};


// Uniformly random reachable free goals, resampled on arrival.
class RandomGoalPolicy final : public Policy {
 public:
  explicit RandomGoalPolicy(std::uint64_t seed) : rng_(seed) {}

  std::string_view name() const override { return "random"; }

  Action act(const PolicyContext& ctx) override {
    for (int guard = 0; guard < 4; ++guard) {
      if (goal_) {
        if (auto a = follow_path(path_, ctx.pose)) return *a;
      }
      if (!sample_goal(ctx)) return Action::stop;
    }
    return Action::stop;
  }

  const std::vector<Cell>& goals() const { return goals_; }

 private:
  bool sample_goal(const PolicyContext& ctx) {
    goal_.reset();
    const auto dist = distance_field(ctx.grid, ctx.pose.cell);
    std::vector<Cell> pool;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      if (dist[i] > 0) pool.push_back(ctx.grid.cell_at(i));
    }
    if (pool.empty()) return false;
    const Cell goal = pool[rng_.index(pool.size())];
    auto path = shortest_path(ctx.grid, ctx.pose.cell, goal);
    if (!path) return false;
    goal_ = goal;
    path_ = std::move(*path);
    goals_.push_back(goal);
    return true;
  }

  Rng rng_;
  std::optional<Cell> goal_;
  std::vector<Cell> path_;
  std::vector<Cell> goals_;
};

}  // namespace objmem
