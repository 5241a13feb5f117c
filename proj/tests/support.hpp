#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "objmem/objmem.hpp"

namespace objmem::test {

// Grid from rows of '.' (free) and '#' (obstacle).
inline OccupancyGrid grid_from(const std::vector<std::string>& rows, double cell_size = 0.25) {
  OccupancyGrid g(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()), cell_size);
  for (int r = 0; r < g.height(); ++r) {
    for (int c = 0; c < g.width(); ++c) g.set_obstacle(Cell{c, r}, rows[r][c] == '#');
  }
  return g;
}

inline OccupancyGrid open_grid(int w, int h, double cell_size = 0.25) { return OccupancyGrid(w, h, cell_size); }

inline WorldObject make_object(TrueId id, Cell cell, const OccupancyGrid& grid, std::string category,
                               std::vector<std::string> modifiers, double footprint = 0.25) {
  WorldObject o;
  o.true_id = id;
  o.cell = cell;
  o.center = grid.center(cell, 0.5);
  o.footprint_radius = footprint;
  o.attributes = AttributeSet{std::move(category), std::move(modifiers), {}};
  return o;
}

inline GridWorld make_world(OccupancyGrid grid, std::vector<WorldObject> objects, AgentPose start,
                            std::uint64_t seed = 1) {
  return GridWorld(std::move(grid), std::move(objects), start, Vocabulary::household(), seed);
}

inline Detection detection(TransientId tid, Vec3 p, TrueId true_id) { return Detection(tid, p, {}, true_id); }

inline Caption caption(std::string text) {
  Caption c;
  c.text = std::move(text);
  return c;
}

inline Observation frame(std::vector<Detection> dets, int step = 1) {
  Observation o;
  o.step = step;
  o.detections = std::move(dets);
  return o;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fast configuration used by episode-level tests.
inline RunConfig small_config() {
  RunConfig cfg;
  cfg.world.width = 16;
  cfg.world.height = 16;
  cfg.world.object_count = 5;
  cfg.episode_cap = 60;
  return cfg;
}

}  // namespace objmem::test
