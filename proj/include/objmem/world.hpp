#pragma once

// Seeded synthetic grid world: occupancy, objects, agent motion, visibility,
// detections with per-frame transient IDs, shortest paths and the explored map.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "objmem/attributes.hpp"
#include "objmem/core.hpp"
#include "objmem/vocabulary.hpp"

namespace objmem {

// ---------------------------------------------------------------------------
// Number formatting shared by the text formats

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// ---------------------------------------------------------------------------
// Occupancy

class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double cell_size)
      : width_(width), height_(height), cell_size_(cell_size),
        cells_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0) {
    if (width <= 0 || height <= 0) throw Error("grid dimensions must be positive");
    if (!(cell_size > 0.0)) throw Error("cell size must be positive");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }
  std::size_t cell_count() const { return cells_.size(); }

  bool in_bounds(Cell c) const {
    return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_;
  }
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.col);
  }
  Cell cell_at(std::size_t idx) const {
    return Cell{static_cast<int>(idx % static_cast<std::size_t>(width_)),
                static_cast<int>(idx / static_cast<std::size_t>(width_))};
  }

  // Out-of-bounds cells count as obstacles.
  bool is_free(Cell c) const { return in_bounds(c) && cells_[index(c)] == 0; }
  bool is_obstacle(Cell c) const { return !is_free(c); }

  void set_obstacle(Cell c, bool obstacle) { cells_[index(c)] = obstacle ? 1 : 0; }

  Vec3 center(Cell c, double z = 0.0) const {
    return Vec3{(c.col + 0.5) * cell_size_, (c.row + 0.5) * cell_size_, z};
  }
  Cell cell_of(const Vec3& p) const {
    return Cell{static_cast<int>(std::floor(p.x / cell_size_)),
                static_cast<int>(std::floor(p.y / cell_size_))};
  }

  std::size_t free_count() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 0));
  }

  bool operator==(const OccupancyGrid&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  double cell_size_ = 1.0;
  std::vector<std::uint8_t> cells_;
};

// ---------------------------------------------------------------------------
// Agent pose and headings

// Heading h of n points at angle 2*pi*h/n in the (col, row) frame; turn_left
// increments h.
struct AgentPose {
  Cell cell;
  int heading = 0;
  int heading_count = 4;

  bool operator==(const AgentPose&) const = default;

  double heading_angle() const { return 2.0 * kPi * heading / heading_count; }
  Vec3 position(const OccupancyGrid& grid) const { return grid.center(cell); }
};

inline Cell forward_offset(int heading, int heading_count) {
  const double a = 2.0 * kPi * heading / heading_count;
  return Cell{static_cast<int>(std::lround(std::cos(a))), static_cast<int>(std::lround(std::sin(a)))};
}

// Discrete heading closest to the direction (dcol, drow); 0 for a null vector.
inline int heading_toward(double dcol, double drow, int heading_count) {
  if (dcol == 0.0 && drow == 0.0) return 0;
  double a = std::atan2(drow, dcol);
  if (a < 0) a += 2.0 * kPi;
  const double step = 2.0 * kPi / heading_count;
  return static_cast<int>(std::lround(a / step)) % heading_count;
}

// The single turn that brings `from` closer to `to`; ties turn left.
inline Action turn_toward(int from, int to, int heading_count) {
  const int left = ((to - from) % heading_count + heading_count) % heading_count;
  const int right = heading_count - left;
  return left <= right ? Action::turn_left : Action::turn_right;
}

// ---------------------------------------------------------------------------
// Objects and detections

struct WorldObject {
  TrueId true_id = 0;
  Cell cell;
  Vec3 center;
  double footprint_radius = 0.0;
  AttributeSet attributes;

  bool operator==(const WorldObject&) const = default;
};

struct GroundTruth;

// One per-frame detection. The true object identity is stored for evaluation
// and oracle association only; it is readable exclusively through
// GroundTruth::of, and policies never receive detections.
class Detection {
 public:
  Detection(TransientId transient_id, Vec3 world_position, std::vector<Cell> footprint,
            TrueId true_id)
      : transient_id(transient_id),
        world_position(world_position),
        footprint(std::move(footprint)),
        true_id_(true_id) {}

  TransientId transient_id;
  Vec3 world_position;
  std::vector<Cell> footprint;

 private:
  TrueId true_id_;
  friend struct GroundTruth;
};

struct GroundTruth {
  static TrueId of(const Detection& d) { return d.true_id_; }
};

struct Observation {
  int step = 0;
  std::vector<Detection> detections;
  AgentPose agent_pose;

  std::vector<TransientId> transient_ids() const {
    std::vector<TransientId> ids;
    ids.reserve(detections.size());
    for (const auto& d : detections) ids.push_back(d.transient_id);
    return ids;
  }
};

struct FieldOfView {
  double fov_deg = 90.0;
  double max_range_cells = 8.0;

  double half_angle() const { return fov_deg * kPi / 360.0; }
};

struct ObservationConfig {
  int transient_id_min = 0;
  int transient_id_max = 99;
  double position_noise = 0.0;  // meters, radius of the uniform disc
};

// ---------------------------------------------------------------------------
// World

class GridWorld {
 public:
  GridWorld() = default;
  GridWorld(OccupancyGrid grid, std::vector<WorldObject> objects, AgentPose start,
            Vocabulary vocabulary, std::uint64_t seed)
      : grid_(std::move(grid)),
        objects_(std::move(objects)),
        start_(start),
        vocabulary_(std::move(vocabulary)),
        seed_(seed) {
    validate();
  }

  const OccupancyGrid& grid() const { return grid_; }
  const std::vector<WorldObject>& objects() const { return objects_; }
  const AgentPose& start() const { return start_; }
  const Vocabulary& vocabulary() const { return vocabulary_; }
  std::uint64_t seed() const { return seed_; }

  const WorldObject& object(TrueId id) const {
    for (const auto& o : objects_) {
      if (o.true_id == id) return o;
    }
    throw Error("unknown object id " + std::to_string(id));
  }

  bool operator==(const GridWorld&) const = default;

 private:
  void validate() const {
    if (!grid_.is_free(start_.cell)) throw GenerationError("agent start is not a free cell");
    std::set<TrueId> ids;
    for (const auto& o : objects_) {
      if (!grid_.is_free(o.cell)) {
        throw GenerationError("object " + std::to_string(o.true_id) + " is not on a free cell");
      }
      if (!ids.insert(o.true_id).second) {
        throw GenerationError("duplicate object id " + std::to_string(o.true_id));
      }
      if (o.attributes.category.empty()) {
        throw GenerationError("object " + std::to_string(o.true_id) + " has no category");
      }
    }
  }

  OccupancyGrid grid_;
  std::vector<WorldObject> objects_;
  AgentPose start_;
  Vocabulary vocabulary_;
  std::uint64_t seed_ = 0;
};

// ---------------------------------------------------------------------------
// Visibility

// True when no obstacle lies strictly between the centers of `from` and `to`.
// Exact integer traversal of the cells the segment passes through; a segment
// through a cell corner steps diagonally.
inline bool line_of_sight(const OccupancyGrid& grid, Cell from, Cell to) {
  const int dx = to.col - from.col;
  const int dy = to.row - from.row;
  const int sx = dx > 0 ? 1 : -1;
  const int sy = dy > 0 ? 1 : -1;
  const long ax = std::abs(dx);
  const long ay = std::abs(dy);
  long i = 0;
  long j = 0;
  Cell cur = from;
  while (i < ax || j < ay) {
    if (i >= ax) {
      cur.row += sy;
      ++j;
    } else if (j >= ay) {
      cur.col += sx;
      ++i;
    } else {
      const long tx = (2 * i + 1) * ay;
      const long ty = (2 * j + 1) * ax;
      if (tx < ty) {
        cur.col += sx;
        ++i;
      } else if (ty < tx) {
        cur.row += sy;
        ++j;
      } else {
        cur.col += sx;
        cur.row += sy;
        ++i;
        ++j;
      }
    }
    if (cur == to) break;
    if (grid.is_obstacle(cur)) return false;
  }
  return true;
}

// Signed angle (radians) of `target` relative to the pose heading.
inline double relative_bearing(const AgentPose& pose, Cell target) {
  const double dcol = target.col - pose.cell.col;
  const double drow = target.row - pose.cell.row;
  if (dcol == 0.0 && drow == 0.0) return 0.0;
  const double h = pose.heading_angle();
  const double hx = std::cos(h);
  const double hy = std::sin(h);
  return std::atan2(hx * drow - hy * dcol, hx * dcol + hy * drow);
}

inline double cell_distance(Cell a, Cell b) {
  return std::hypot(static_cast<double>(a.col - b.col), static_cast<double>(a.row - b.row));
}

// Range, field-of-view cone and line-of-sight test for a target cell.
inline bool in_view(const OccupancyGrid& grid, const AgentPose& pose, const FieldOfView& fov,
                    Cell target) {
  if (!grid.in_bounds(target)) return false;
  if (cell_distance(pose.cell, target) > fov.max_range_cells + 1e-9) return false;
  if (std::fabs(relative_bearing(pose, target)) > fov.half_angle() + 1e-9) return false;
  return line_of_sight(grid, pose.cell, target);
}

inline std::vector<Cell> visible_cells(const OccupancyGrid& grid, const AgentPose& pose,
                                       const FieldOfView& fov) {
  std::vector<Cell> out;
  const int r = static_cast<int>(std::ceil(fov.max_range_cells));
  for (int row = pose.cell.row - r; row <= pose.cell.row + r; ++row) {
    for (int col = pose.cell.col - r; col <= pose.cell.col + r; ++col) {
      const Cell c{col, row};
      if (in_view(grid, pose, fov, c)) out.push_back(c);
    }
  }
  return out;
}

// Footprint cells of an object facing the agent and in its line of sight.
inline std::vector<Cell> visible_footprint(const OccupancyGrid& grid, const WorldObject& object,
                                           const AgentPose& pose) {
  std::vector<Cell> out;
  const double radius_cells = object.footprint_radius / grid.cell_size();
  const int r = static_cast<int>(std::floor(radius_cells + 1e-9));
  const double ax = pose.cell.col - object.cell.col;
  const double ay = pose.cell.row - object.cell.row;
  for (int drow = -r; drow <= r; ++drow) {
    for (int dcol = -r; dcol <= r; ++dcol) {
      if (std::hypot(dcol, drow) > radius_cells + 1e-9) continue;
      const Cell c{object.cell.col + dcol, object.cell.row + drow};
      if (!grid.in_bounds(c)) continue;
      if (dcol * ax + drow * ay < 0) continue;
      if (c != object.cell && !line_of_sight(grid, pose.cell, c)) continue;
      out.push_back(c);
    }
  }
  return out;
}

inline Observation observe(const GridWorld& world, const AgentPose& pose, const FieldOfView& fov,
                           const ObservationConfig& cfg, Rng& rng, int step = 0) {
  const auto& grid = world.grid();
  struct Visible {
    const WorldObject* object;
    double bearing;
    double range;
  };
  std::vector<Visible> visible;
  for (const auto& o : world.objects()) {
    if (in_view(grid, pose, fov, o.cell)) {
      visible.push_back({&o, relative_bearing(pose, o.cell), cell_distance(pose.cell, o.cell)});
    }
  }
  // Image order: left to right, then near to far.
  std::sort(visible.begin(), visible.end(), [](const Visible& a, const Visible& b) {
    if (a.bearing != b.bearing) return a.bearing > b.bearing;
    if (a.range != b.range) return a.range < b.range;
    return a.object->true_id < b.object->true_id;
  });

  std::vector<TransientId> pool;
  for (int id = cfg.transient_id_min; id <= cfg.transient_id_max; ++id) pool.push_back(id);
  if (visible.size() > pool.size()) {
    throw Error("transient id range too small for " + std::to_string(visible.size()) +
                " detections");
  }
  const auto ids = rng.sample(pool, visible.size());

  Observation obs;
  obs.step = step;
  obs.agent_pose = pose;
  for (std::size_t k = 0; k < visible.size(); ++k) {
    const WorldObject& o = *visible[k].object;
    Vec3 p = o.center;
    if (cfg.position_noise > 0.0) {
      double u = 0.0;
      double v = 0.0;
      do {
        u = rng.uniform(-1.0, 1.0);
        v = rng.uniform(-1.0, 1.0);
      } while (u * u + v * v > 1.0);
      p.x += u * cfg.position_noise;
      p.y += v * cfg.position_noise;
    }
    obs.detections.emplace_back(ids[k], p, visible_footprint(grid, o, pose), o.true_id);
  }
  return obs;
}

// ---------------------------------------------------------------------------
// Motion

struct StepResult {
  AgentPose pose;
  bool collided = false;
};

inline StepResult step_agent(const OccupancyGrid& grid, const AgentPose& pose, Action action) {
  StepResult res{pose, false};
  switch (action) {
    case Action::stop:
      break;
    case Action::turn_left:
      res.pose.heading = (pose.heading + 1) % pose.heading_count;
      break;
    case Action::turn_right:
      res.pose.heading = (pose.heading + pose.heading_count - 1) % pose.heading_count;
      break;
    case Action::move_forward: {
      const Cell d = forward_offset(pose.heading, pose.heading_count);
      const Cell target{pose.cell.col + d.col, pose.cell.row + d.row};
      bool blocked = grid.is_obstacle(target);
      // Diagonal moves may not cut obstacle corners.
      if (!blocked && d.col != 0 && d.row != 0) {
        blocked = grid.is_obstacle(Cell{pose.cell.col + d.col, pose.cell.row}) ||
                  grid.is_obstacle(Cell{pose.cell.col, pose.cell.row + d.row});
      }
      if (blocked) {
        res.collided = true;
      } else {
        res.pose.cell = target;
      }
      break;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Planning

inline constexpr std::array<Cell, 4> kNeighbors4{Cell{1, 0}, Cell{0, 1}, Cell{-1, 0}, Cell{0, -1}};

// Breadth-first 4-connected distances from `from`; -1 marks unreachable cells.
inline std::vector<int> distance_field(const OccupancyGrid& grid, Cell from) {
  std::vector<int> dist(grid.cell_count(), -1);
  if (!grid.is_free(from)) return dist;
  std::deque<Cell> queue{from};
  dist[grid.index(from)] = 0;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    const int d = dist[grid.index(c)];
    for (const Cell& n : kNeighbors4) {
      const Cell next{c.col + n.col, c.row + n.row};
      if (!grid.is_free(next) || dist[grid.index(next)] >= 0) continue;
      dist[grid.index(next)] = d + 1;
      queue.push_back(next);
    }
  }
  return dist;
}

// Minimal-length 4-connected free-cell path including both endpoints, or
// nullopt when `to` cannot be reached.
inline std::optional<std::vector<Cell>> shortest_path(const OccupancyGrid& grid, Cell from,
                                                      Cell to) {
  if (!grid.is_free(from) || !grid.is_free(to)) return std::nullopt;
  if (from == to) return std::vector<Cell>{from};
  std::vector<int> parent(grid.cell_count(), -1);
  std::vector<bool> seen(grid.cell_count(), false);
  std::deque<Cell> queue{from};
  seen[grid.index(from)] = true;
  bool found = false;
  while (!queue.empty() && !found) {
    const Cell c = queue.front();
    queue.pop_front();
    for (const Cell& n : kNeighbors4) {
      const Cell next{c.col + n.col, c.row + n.row};
      if (!grid.is_free(next) || seen[grid.index(next)]) continue;
      seen[grid.index(next)] = true;
      parent[grid.index(next)] = static_cast<int>(grid.index(c));
      if (next == to) {
        found = true;
        break;
      }
      queue.push_back(next);
    }
  }
  if (!found) return std::nullopt;
  std::vector<Cell> path{to};
  std::size_t idx = grid.index(to);
  while (parent[idx] >= 0) {
    idx = static_cast<std::size_t>(parent[idx]);
    path.push_back(grid.cell_at(idx));
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// Free cell with no obstacle (or grid edge) whose center lies closer than
// `safety_margin` meters.
inline bool is_navigable(const OccupancyGrid& grid, Cell c, double safety_margin) {
  if (!grid.is_free(c)) return false;
  if (safety_margin <= 0.0) return true;
  const double cs = grid.cell_size();
  const int r = static_cast<int>(std::ceil(safety_margin / cs));
  for (int drow = -r; drow <= r; ++drow) {
    for (int dcol = -r; dcol <= r; ++dcol) {
      if (dcol == 0 && drow == 0) continue;
      if (std::hypot(dcol, drow) * cs >= safety_margin) continue;
      if (grid.is_obstacle(Cell{c.col + dcol, c.row + drow})) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Explored map

class ExploredMap {
 public:
  ExploredMap() = default;
  ExploredMap(int width, int height)
      : width_(width),
        height_(height),
        explored_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0) {}

  bool explored(Cell c) const {
    return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_ &&
           explored_[static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
                     static_cast<std::size_t>(c.col)] != 0;
  }
  void mark(Cell c) {
    if (c.col < 0 || c.row < 0 || c.col >= width_ || c.row >= height_) return;
    explored_[static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
              static_cast<std::size_t>(c.col)] = 1;
  }
  std::size_t explored_count() const {
    return static_cast<std::size_t>(std::count(explored_.begin(), explored_.end(), 1));
  }
  const std::vector<std::uint8_t>& mask() const { return explored_; }

  Cell agent;
  std::vector<Cell> fov_cells;

  bool operator==(const ExploredMap&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> explored_;
};

inline ExploredMap& update_explored(ExploredMap& map, const OccupancyGrid& grid,
                                    const AgentPose& pose, const FieldOfView& fov) {
  map.fov_cells = visible_cells(grid, pose, fov);
  for (const Cell& c : map.fov_cells) map.mark(c);
  map.mark(pose.cell);
  map.agent = pose.cell;
  return map;
}

// Explored fraction of the free cells reachable from `from`.
inline double explored_coverage(const ExploredMap& map, const OccupancyGrid& grid, Cell from) {
  const auto dist = distance_field(grid, from);
  std::size_t total = 0;
  std::size_t seen = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] < 0) continue;
    ++total;
    if (map.explored(grid.cell_at(i))) ++seen;
  }
  return total == 0 ? 0.0 : static_cast<double>(seen) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Generation

struct WorldSpec {
  int width = 30;
  int height = 30;
  double cell_size = 0.25;
  double obstacle_density = 0.15;
  int object_count = 12;
  double min_object_separation = 0.75;  // meters between object centers
  double object_height = 0.5;           // fixed z of every object center
  double footprint_radius_min = 0.25;
  double footprint_radius_max = 0.5;
  int heading_count = 4;
  int max_attempts = 200;
};

namespace detail {

inline AttributeSet sample_attributes(const Vocabulary& vocab, Rng& rng) {
  AttributeSet a;
  a.category = vocab.categories()[rng.index(vocab.categories().size())];
  const std::size_t want = std::min<std::size_t>(vocab.modifiers().size(), 2 + (rng.bernoulli(0.5) ? 1 : 0));
  a.modifiers = rng.sample(vocab.modifiers(), want);
  std::sort(a.modifiers.begin(), a.modifiers.end(), [&](const std::string& x, const std::string& y) {
    return vocab.modifier_rank(x) < vocab.modifier_rank(y);
  });
  return a;
}

inline void place_wall_segments(OccupancyGrid& grid, double density, Rng& rng) {
  const auto target = static_cast<std::size_t>(std::llround(density * static_cast<double>(grid.cell_count())));
  const int max_len = std::max(2, std::min(grid.width(), grid.height()) / 3);
  std::size_t obstacles = 0;
  for (int guard = 0; obstacles < target && guard < 100000; ++guard) {
    const bool horizontal = rng.bernoulli(0.5);
    const int len = static_cast<int>(rng.uniform_int(2, max_len));
    const int col = static_cast<int>(rng.uniform_int(0, grid.width() - 1));
    const int row = static_cast<int>(rng.uniform_int(0, grid.height() - 1));
    for (int k = 0; k < len && obstacles < target; ++k) {
      const Cell c = horizontal ? Cell{col + k, row} : Cell{col, row + k};
      if (!grid.in_bounds(c) || grid.is_obstacle(c)) continue;
      grid.set_obstacle(c, true);
      ++obstacles;
    }
  }
}

}  // namespace detail

// Reproducible world for a fixed (spec, vocabulary, seed). Every object sits on
// a free cell reachable from the agent start.
inline GridWorld generate_world(const WorldSpec& spec, const Vocabulary& vocab, std::uint64_t seed) {
  if (spec.object_count < 0) throw GenerationError("object_count must be >= 0");
  if (!(spec.obstacle_density >= 0.0 && spec.obstacle_density < 1.0)) {
    throw GenerationError("obstacle_density must lie in [0, 1)");
  }
  if (vocab.empty()) throw GenerationError("vocabulary is empty");
  if (spec.heading_count != 4 && spec.heading_count != 8) {
    throw GenerationError("heading_count must be 4 or 8");
  }

  for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    OccupancyGrid grid(spec.width, spec.height, spec.cell_size);
    detail::place_wall_segments(grid, spec.obstacle_density, rng);

    std::vector<Cell> free_cells;
    for (std::size_t i = 0; i < grid.cell_count(); ++i) {
      if (grid.is_free(grid.cell_at(i))) free_cells.push_back(grid.cell_at(i));
    }
    if (free_cells.empty()) continue;

    AgentPose start;
    start.cell = free_cells[rng.index(free_cells.size())];
    start.heading_count = spec.heading_count;
    start.heading = static_cast<int>(rng.uniform_int(0, spec.heading_count - 1));

    const auto dist = distance_field(grid, start.cell);
    std::vector<Cell> candidates;
    for (const Cell& c : free_cells) {
      if (c != start.cell && dist[grid.index(c)] >= 0) candidates.push_back(c);
    }
    rng.shuffle(candidates);

    std::vector<Cell> chosen;
    for (const Cell& c : candidates) {
      if (static_cast<int>(chosen.size()) == spec.object_count) break;
      bool far_enough = true;
      for (const Cell& o : chosen) {
        if (cell_distance(c, o) * spec.cell_size < spec.min_object_separation) {
          far_enough = false;
          break;
        }
      }
      if (far_enough) chosen.push_back(c);
    }
    if (static_cast<int>(chosen.size()) < spec.object_count) continue;

    std::vector<WorldObject> objects;
    for (std::size_t k = 0; k < chosen.size(); ++k) {
      WorldObject o;
      o.true_id = static_cast<TrueId>(k + 1);
      o.cell = chosen[k];
      o.center = grid.center(chosen[k], spec.object_height);
      o.footprint_radius = rng.uniform(spec.footprint_radius_min, spec.footprint_radius_max);
      o.attributes = detail::sample_attributes(vocab, rng);
      objects.push_back(std::move(o));
    }
    return GridWorld(std::move(grid), std::move(objects), start, vocab, seed);
  }
  throw GenerationError("could not place " + std::to_string(spec.object_count) + " objects after " +
                        std::to_string(spec.max_attempts) + " attempts");
}

// ---------------------------------------------------------------------------
// Text format
//
//   objmem-world 1
//   size <width> <height>
//   cell_size <meters>
//   heading_count <4|8>
//   seed <integer>
//   start <col> <row> <heading>
//   grid
//   <one row per line, '.' free, '#' obstacle>
//   objects <count>
//   <true_id> <col> <row> <z> <footprint_radius> <category> <modifier,modifier,...>
//   vocabulary
//   categories <tokens...>
//   modifiers <tokens...>
//   context <tokens...>
//   confusable <tokens...>        (zero or more lines)
//   end

inline constexpr std::string_view kWorldFormatTag = "objmem-world";
inline constexpr int kWorldFormatVersion = 1;

inline void write_world(std::ostream& out, const GridWorld& world) {
  const auto& g = world.grid();
  out << kWorldFormatTag << ' ' << kWorldFormatVersion << '\n';
  out << "size " << g.width() << ' ' << g.height() << '\n';
  out << "cell_size " << format_double(g.cell_size()) << '\n';
  out << "heading_count " << world.start().heading_count << '\n';
  out << "seed " << world.seed() << '\n';
  out << "start " << world.start().cell.col << ' ' << world.start().cell.row << ' '
      << world.start().heading << '\n';
  out << "grid\n";
  for (int row = 0; row < g.height(); ++row) {
    for (int col = 0; col < g.width(); ++col) out << (g.is_free(Cell{col, row}) ? '.' : '#');
    out << '\n';
  }
  out << "objects " << world.objects().size() << '\n';
  for (const auto& o : world.objects()) {
    out << o.true_id << ' ' << o.cell.col << ' ' << o.cell.row << ' ' << format_double(o.center.z)
        << ' ' << format_double(o.footprint_radius) << ' ' << o.attributes.category << ' '
        << (o.attributes.modifiers.empty() ? std::string("-") : join(o.attributes.modifiers, ","))
        << '\n';
  }
  const auto& v = world.vocabulary();
  out << "vocabulary\n";
  out << "categories " << join(v.categories(), " ") << '\n';
  out << "modifiers " << join(v.modifiers(), " ") << '\n';
  out << "context " << join(v.context(), " ") << '\n';
  for (const auto& group : v.confusable_groups()) out << "confusable " << join(group, " ") << '\n';
  out << "end\n";
}

inline std::string world_to_string(const GridWorld& world) {
  std::ostringstream os;
  write_world(os, world);
  return os.str();
}

inline GridWorld read_world(std::istream& in) {
  int line_no = 0;
  auto fail = [&](const std::string& what) -> GenerationError {
    return GenerationError("world file line " + std::to_string(line_no) + ": " + what);
  };
  std::string line;
  auto next = [&]() -> std::vector<std::string> {
    if (!std::getline(in, line)) throw fail("unexpected end of file");
    ++line_no;
    return split_whitespace(line);
  };
  auto expect_int = [&](const std::string& s) -> int {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw fail("expected integer, got '" + s + "'");
    return v;
  };
  auto expect_double = [&](const std::string& s) -> double {
    auto v = parse_double(s);
    if (!v) throw fail("expected number, got '" + s + "'");
    return *v;
  };
  auto keyed = [&](std::string_view key, std::size_t argc) {
    auto t = next();
    if (t.empty() || t[0] != key || t.size() != argc + 1) throw fail("expected '" + std::string(key) + "'");
    return t;
  };

  auto header = next();
  if (header.size() != 2 || header[0] != kWorldFormatTag) throw fail("missing world header");
  if (expect_int(header[1]) != kWorldFormatVersion) throw fail("unsupported version " + header[1]);
  auto size = keyed("size", 2);
  const int width = expect_int(size[1]);
  const int height = expect_int(size[2]);
  const double cell_size = expect_double(keyed("cell_size", 1)[1]);
  const int heading_count = expect_int(keyed("heading_count", 1)[1]);
  const auto seed_tok = keyed("seed", 1)[1];
  std::uint64_t seed = 0;
  {
    auto res = std::from_chars(seed_tok.data(), seed_tok.data() + seed_tok.size(), seed);
    if (res.ec != std::errc()) throw fail("bad seed");
  }
  auto start_tok = keyed("start", 3);
  AgentPose start{Cell{expect_int(start_tok[1]), expect_int(start_tok[2])}, expect_int(start_tok[3]),
                  heading_count};
  keyed("grid", 0);
  OccupancyGrid grid(width, height, cell_size);
  for (int row = 0; row < height; ++row) {
    if (!std::getline(in, line)) throw fail("grid truncated");
    ++line_no;
    std::string_view row_text = trim_right(line);
    if (static_cast<int>(row_text.size()) != width) throw fail("grid row has wrong width");
    for (int col = 0; col < width; ++col) {
      const char c = row_text[static_cast<std::size_t>(col)];
      if (c != '.' && c != '#') throw fail("grid cell must be '.' or '#'");
      grid.set_obstacle(Cell{col, row}, c == '#');
    }
  }
  const int count = expect_int(keyed("objects", 1)[1]);
  struct RawObject {
    TrueId id;
    Cell cell;
    double z;
    double radius;
    std::string category;
    std::vector<std::string> modifiers;
  };
  std::vector<RawObject> raw;
  for (int k = 0; k < count; ++k) {
    auto t = next();
    if (t.size() != 7) throw fail("object line needs 7 fields");
    RawObject r{expect_int(t[0]), Cell{expect_int(t[1]), expect_int(t[2])}, expect_double(t[3]),
                expect_double(t[4]), t[5], {}};
    if (t[6] != "-") {
      std::string_view mods = t[6];
      std::size_t pos = 0;
      while (pos <= mods.size()) {
        std::size_t comma = mods.find(',', pos);
        if (comma == std::string_view::npos) comma = mods.size();
        r.modifiers.emplace_back(mods.substr(pos, comma - pos));
        pos = comma + 1;
      }
    }
    raw.push_back(std::move(r));
  }
  keyed("vocabulary", 0);
  auto cats = next();
  auto mods = next();
  auto ctx = next();
  if (cats.empty() || cats[0] != "categories") throw fail("expected 'categories'");
  if (mods.empty() || mods[0] != "modifiers") throw fail("expected 'modifiers'");
  if (ctx.empty() || ctx[0] != "context") throw fail("expected 'context'");
  std::vector<std::vector<std::string>> groups;
  for (;;) {
    auto t = next();
    if (t.size() == 1 && t[0] == "end") break;
    if (t.empty() || t[0] != "confusable") throw fail("expected 'confusable' or 'end'");
    groups.emplace_back(t.begin() + 1, t.end());
  }
  Vocabulary vocab(std::vector<std::string>(cats.begin() + 1, cats.end()),
                   std::vector<std::string>(mods.begin() + 1, mods.end()),
                   std::vector<std::string>(ctx.begin() + 1, ctx.end()), std::move(groups));

  std::vector<WorldObject> objects;
  for (auto& r : raw) {
    if (vocab.kind(r.category) != TokenKind::category) throw fail("unknown category " + r.category);
    for (const auto& m : r.modifiers) {
      if (vocab.kind(m) != TokenKind::modifier) throw fail("unknown modifier " + m);
    }
    WorldObject o;
    o.true_id = r.id;
    o.cell = r.cell;
    o.center = grid.center(r.cell, r.z);
    o.footprint_radius = r.radius;
    o.attributes.category = r.category;
    o.attributes.modifiers = r.modifiers;
    objects.push_back(std::move(o));
  }
  return GridWorld(std::move(grid), std::move(objects), start, std::move(vocab), seed);
}

inline GridWorld world_from_string(const std::string& text) {
  std::istringstream is(text);
  return read_world(is);
}

}  // namespace objmem
