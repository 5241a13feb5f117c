#pragma once

// Run configuration: defaults, YAML/JSON loading, dotted-path overrides and
// strict validation that reports every offending field at once.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "objmem/aggregator.hpp"
#include "objmem/association.hpp"
#include "objmem/core.hpp"
#include "objmem/explorer.hpp"
#include "objmem/memory.hpp"
#include "objmem/oracle.hpp"
#include "objmem/world.hpp"

namespace objmem {

using json = nlohmann::json;

enum class PolicyKind { disagreement, frontier, random };
enum class AssociationMode { oracle, heuristic };

inline std::string_view to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::disagreement: return "disagreement";
    case PolicyKind::frontier: return "frontier";
    case PolicyKind::random: return "random";
  }
  return "unknown";
}

inline std::optional<PolicyKind> policy_from_string(std::string_view s) {
  for (PolicyKind p : {PolicyKind::disagreement, PolicyKind::frontier, PolicyKind::random}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

inline std::string_view to_string(AssociationMode a) { return a == AssociationMode::oracle ? "oracle" : "heuristic"; }

inline std::optional<AssociationMode> association_from_string(std::string_view s) {
  if (s == "oracle") return AssociationMode::oracle;
  if (s == "heuristic") return AssociationMode::heuristic;
  return std::nullopt;
}

struct RunConfig {
  WorldSpec world;
  std::string world_file;  // when set, the world is loaded and seeds become policy seeds
  PolicyKind policy = PolicyKind::disagreement;
  AssociationMode association = AssociationMode::oracle;
  AssociationConfig matcher;
  int episode_cap = 400;
  std::vector<std::uint64_t> seeds{1};
  std::optional<std::uint64_t> policy_seed;
  FieldOfView fov;
  ObservationConfig sensor;
  NoiseModel noise{0.05, 0.35, 0.25, 0.6, 0.05};
  MemoryConfig memory;
  ExplorationConfig exploration;
  AggregatorConfig aggregator;
  std::string output_dir = "runs";
  int jobs = 1;
};

// ---------------------------------------------------------------------------
// JSON form

inline json to_json(const RunConfig& c) {
  json j;
  j["world"] = {{"file", c.world_file},
                {"width", c.world.width},
                {"height", c.world.height},
                {"cell_size", c.world.cell_size},
                {"obstacle_density", c.world.obstacle_density},
                {"object_count", c.world.object_count},
                {"min_object_separation", c.world.min_object_separation},
                {"object_height", c.world.object_height},
                {"footprint_radius_min", c.world.footprint_radius_min},
                {"footprint_radius_max", c.world.footprint_radius_max},
                {"heading_count", c.world.heading_count},
                {"max_attempts", c.world.max_attempts}};
  j["policy"] = std::string(to_string(c.policy));
  j["association"] = {{"mode", std::string(to_string(c.association))},
                      {"distance_gate", c.matcher.distance_gate},
                      {"caption_similarity_gate", c.matcher.caption_similarity_gate},
                      {"weight_spatial", c.matcher.weight_spatial}};
  j["episode_cap"] = c.episode_cap;
  j["seeds"] = c.seeds;
  j["policy_seed"] = c.policy_seed ? json(*c.policy_seed) : json(nullptr);
  j["sensor"] = {{"fov_deg", c.fov.fov_deg},
                 {"max_range_cells", c.fov.max_range_cells},
                 {"transient_id_min", c.sensor.transient_id_min},
                 {"transient_id_max", c.sensor.transient_id_max},
                 {"position_noise", c.sensor.position_noise}};
  j["noise"] = {{"p0", c.noise.p0},
                {"k_d", c.noise.k_d},
                {"k_a", c.noise.k_a},
                {"p_max", c.noise.p_max},
                {"p_cat", c.noise.p_cat}};
  j["memory"] = {{"caption_cap", c.memory.caption_cap}};
  const auto& e = c.exploration;
  j["exploration"] = {{"alpha", e.alpha},
                      {"area_min", e.area_min},
                      {"radii", e.radii},
                      {"candidates_per_radius", e.candidates_per_radius},
                      {"viewpoints_min", e.viewpoints_min},
                      {"viewpoints_max", e.viewpoints_max},
                      {"stuck_window", e.stuck_window},
                      {"displacement_eps", e.displacement_eps},
                      {"recovery_attempts", e.recovery_attempts},
                      {"disagreement_threshold", e.disagreement_threshold},
                      {"safety_margin", e.safety_margin},
                      {"recovery_radius", e.recovery_radius},
                      {"footprint_radius", e.footprint_radius},
                      {"overlap", std::string(to_string(e.overlap))},
                      {"initial_scan_turns", e.initial_scan_turns}};
  j["aggregator"] = {{"vote_threshold", c.aggregator.vote_threshold},
                     {"view_budget", c.aggregator.view_budget}};
  j["output_dir"] = c.output_dir;
  j["jobs"] = c.jobs;
  return j;
}

namespace detail {

// Reads fields of one JSON object, collecting type problems and unknown keys.
class FieldReader {
 public:
  FieldReader(const json& obj, std::string path, std::vector<std::string>& problems)
      : obj_(obj), path_(std::move(path)), problems_(problems) {
    if (!obj_.is_object()) problems_.push_back(where("") + " must be a mapping");
  }

  ~FieldReader() {
    if (!obj_.is_object()) return;
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (std::find(known_.begin(), known_.end(), it.key()) == known_.end()) {
        problems_.push_back(where(it.key()) + ": unknown field");
      }
    }
  }

  const json* field(const std::string& key) {
    known_.push_back(key);
    if (!obj_.is_object()) return nullptr;
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = field(key)) {
      if (v->is_number()) out = v->get<double>();
      else problems_.push_back(where(key) + ": expected a number");
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = field(key)) {
      if (v->is_number_integer() && v->get<std::int64_t>() >= INT32_MIN && v->get<std::int64_t>() <= INT32_MAX) {
        out = v->get<int>();
      } else {
        problems_.push_back(where(key) + ": expected an integer");
      }
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const json* v = field(key)) {
      if (v->is_string()) out = v->get<std::string>();
      else problems_.push_back(where(key) + ": expected a string");
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = field(key)) {
      if (!v->is_array()) {
        problems_.push_back(where(key) + ": expected a list of numbers");
        return;
      }
      std::vector<double> tmp;
      for (const auto& x : *v) {
        if (!x.is_number()) {
          problems_.push_back(where(key) + ": expected a list of numbers");
          return;
        }
        tmp.push_back(x.get<double>());
      }
      out = std::move(tmp);
    }
  }

  void seeds(const std::string& key, std::vector<std::uint64_t>& out) {
    if (const json* v = field(key)) {
      if (!v->is_array()) {
        problems_.push_back(where(key) + ": expected a list of non-negative integers");
        return;
      }
      std::vector<std::uint64_t> tmp;
      for (const auto& x : *v) {
        if (!x.is_number_unsigned() && !(x.is_number_integer() && x.get<std::int64_t>() >= 0)) {
          problems_.push_back(where(key) + ": expected a list of non-negative integers");
          return;
        }
        tmp.push_back(x.get<std::uint64_t>());
      }
      out = std::move(tmp);
    }
  }

  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string>& problems_;
  std::vector<std::string> known_;
};

}  // namespace detail

// Strict conversion: every unknown key, type error and out-of-range value is
// collected before a single ValidationError is raised.
inline RunConfig config_from_json(const json& j) {
  RunConfig c;
  std::vector<std::string> problems;
  {
    detail::FieldReader root(j, "", problems);
    if (const json* w = root.field("world")) {
      detail::FieldReader r(*w, "world", problems);
      r.text("file", c.world_file);
      r.integer("width", c.world.width);
      r.integer("height", c.world.height);
      r.number("cell_size", c.world.cell_size);
      r.number("obstacle_density", c.world.obstacle_density);
      r.integer("object_count", c.world.object_count);
      r.number("min_object_separation", c.world.min_object_separation);
      r.number("object_height", c.world.object_height);
      r.number("footprint_radius_min", c.world.footprint_radius_min);
      r.number("footprint_radius_max", c.world.footprint_radius_max);
      r.integer("heading_count", c.world.heading_count);
      r.integer("max_attempts", c.world.max_attempts);
    }
    std::string policy(to_string(c.policy));
    root.text("policy", policy);
    if (auto p = policy_from_string(policy)) c.policy = *p;
    else problems.push_back("policy: expected one of disagreement, frontier, random");
    if (const json* a = root.field("association")) {
      detail::FieldReader r(*a, "association", problems);
      std::string mode(to_string(c.association));
      r.text("mode", mode);
      if (auto m = association_from_string(mode)) c.association = *m;
      else problems.push_back("association.mode: expected oracle or heuristic");
      r.number("distance_gate", c.matcher.distance_gate);
      r.number("caption_similarity_gate", c.matcher.caption_similarity_gate);
      r.number("weight_spatial", c.matcher.weight_spatial);
    }
    root.integer("episode_cap", c.episode_cap);
    root.seeds("seeds", c.seeds);
    if (const json* ps = root.field("policy_seed")) {
      if (ps->is_null()) c.policy_seed.reset();
      else if (ps->is_number_unsigned() || (ps->is_number_integer() && ps->get<std::int64_t>() >= 0)) {
        c.policy_seed = ps->get<std::uint64_t>();
      } else {
        problems.push_back("policy_seed: expected a non-negative integer or null");
      }
    }
    if (const json* s = root.field("sensor")) {
      detail::FieldReader r(*s, "sensor", problems);
      r.number("fov_deg", c.fov.fov_deg);
      r.number("max_range_cells", c.fov.max_range_cells);
      r.integer("transient_id_min", c.sensor.transient_id_min);
      r.integer("transient_id_max", c.sensor.transient_id_max);
      r.number("position_noise", c.sensor.position_noise);
    }
    if (const json* n = root.field("noise")) {
      detail::FieldReader r(*n, "noise", problems);
      r.number("p0", c.noise.p0);
      r.number("k_d", c.noise.k_d);
      r.number("k_a", c.noise.k_a);
      r.number("p_max", c.noise.p_max);
      r.number("p_cat", c.noise.p_cat);
    }
    if (const json* m = root.field("memory")) {
      detail::FieldReader r(*m, "memory", problems);
      r.integer("caption_cap", c.memory.caption_cap);
    }
    if (const json* x = root.field("exploration")) {
      auto& e = c.exploration;
      detail::FieldReader r(*x, "exploration", problems);
      r.number("alpha", e.alpha);
      r.integer("area_min", e.area_min);
      r.numbers("radii", e.radii);
      r.integer("candidates_per_radius", e.candidates_per_radius);
      r.integer("viewpoints_min", e.viewpoints_min);
      r.integer("viewpoints_max", e.viewpoints_max);
      r.integer("stuck_window", e.stuck_window);
      r.number("displacement_eps", e.displacement_eps);
      r.integer("recovery_attempts", e.recovery_attempts);
      r.number("disagreement_threshold", e.disagreement_threshold);
      r.number("safety_margin", e.safety_margin);
      r.number("recovery_radius", e.recovery_radius);
      r.number("footprint_radius", e.footprint_radius);
      std::string overlap(to_string(e.overlap));
      r.text("overlap", overlap);
      if (overlap == "max") e.overlap = OverlapRule::max;
      else if (overlap == "sum") e.overlap = OverlapRule::sum;
      else problems.push_back("exploration.overlap: expected max or sum");
      r.integer("initial_scan_turns", e.initial_scan_turns);
    }
    if (const json* g = root.field("aggregator")) {
      detail::FieldReader r(*g, "aggregator", problems);
      r.number("vote_threshold", c.aggregator.vote_threshold);
      r.integer("view_budget", c.aggregator.view_budget);
    }
    root.text("output_dir", c.output_dir);
    root.integer("jobs", c.jobs);
  }

  auto need = [&](bool ok, const char* what) {
    if (!ok) problems.emplace_back(what);
  };
  const auto& w = c.world;
  need(w.width >= 2 && w.height >= 2, "world.width and world.height must be >= 2");
  need(w.cell_size > 0.0 && std::isfinite(w.cell_size), "world.cell_size must be > 0");
  need(w.obstacle_density >= 0.0 && w.obstacle_density < 1.0, "world.obstacle_density must lie in [0, 1)");
  need(w.object_count >= 0, "world.object_count must be >= 0");
  need(w.min_object_separation >= 0.0, "world.min_object_separation must be >= 0");
  need(w.footprint_radius_min >= 0.0 && w.footprint_radius_max >= w.footprint_radius_min,
       "world.footprint_radius_min/max must satisfy 0 <= min <= max");
  need(w.heading_count == 4 || w.heading_count == 8, "world.heading_count must be 4 or 8");
  need(w.max_attempts >= 1, "world.max_attempts must be >= 1");
  need(c.episode_cap >= 1, "episode_cap must be >= 1");
  need(!c.seeds.empty(), "seeds must list at least one seed");
  need(c.fov.fov_deg > 0.0 && c.fov.fov_deg <= 360.0, "sensor.fov_deg must lie in (0, 360]");
  need(c.fov.max_range_cells > 0.0, "sensor.max_range_cells must be > 0");
  need(c.sensor.transient_id_min >= 0 && c.sensor.transient_id_max >= c.sensor.transient_id_min,
       "sensor.transient_id_min/max must satisfy 0 <= min <= max");
  need(c.sensor.position_noise >= 0.0, "sensor.position_noise must be >= 0");
  for (double v : {c.noise.p0, c.noise.k_d, c.noise.k_a, c.noise.p_cat}) {
    need(v >= 0.0 && std::isfinite(v), "noise.p0, k_d, k_a and p_cat must be finite and >= 0");
  }
  need(c.noise.p_max >= 0.0 && c.noise.p_max <= 1.0, "noise.p_max must lie in [0, 1]");
  need(c.memory.caption_cap >= 0, "memory.caption_cap must be >= 0");
  need(c.jobs >= 1, "jobs must be >= 1");
  for (auto& p : c.matcher.problems()) problems.push_back(std::move(p));
  for (auto& p : c.exploration.problems()) problems.push_back(std::move(p));
  for (auto& p : c.aggregator.problems()) problems.push_back(std::move(p));
  if (!problems.empty()) throw ValidationError(problems);
  return c;
}

// ---------------------------------------------------------------------------
// YAML and overrides

// Plain scalars become null, bool, integer, float or string; quoted scalars
// stay strings.
inline json scalar_to_json(const std::string& value, bool quoted) {
  if (quoted) return value;
  if (value.empty() || value == "~" || value == "null") return nullptr;
  if (value == "true") return true;
  if (value == "false") return false;
  std::int64_t i = 0;
  auto ri = std::from_chars(value.data(), value.data() + value.size(), i);
  if (ri.ec == std::errc() && ri.ptr == value.data() + value.size()) return i;
  if (auto d = parse_double(value)) return *d;
  return value;
}

inline json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(node.Scalar(), node.Tag() == "!");
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
  }
  return nullptr;
}

inline json parse_yaml(const std::string& text) {
  try {
    return yaml_to_json(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ValidationError({std::string("config is not valid YAML: ") + e.what()});
  }
}

// Applies "a.b.c=value"; the value is read as a YAML scalar or flow sequence.
inline void apply_override(json& doc, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError({"override '" + assignment + "' must look like key.path=value"});
  }
  const std::string path = assignment.substr(0, eq);
  const json value = parse_yaml(assignment.substr(eq + 1));
  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ValidationError({"override '" + assignment + "' has an empty key"});
    if (!node->is_object()) throw ValidationError({"override '" + assignment + "' descends into a non-mapping"});
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

inline RunConfig load_config(const std::string& yaml_text, const std::vector<std::string>& overrides = {}) {
  json doc = to_json(RunConfig{});
  const json user = parse_yaml(yaml_text);
  if (!user.is_null()) {
    if (!user.is_object()) throw ValidationError({"config must be a mapping"});
    doc.merge_patch(user);
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return config_from_json(doc);
}

inline RunConfig load_config_file(const std::string& path, const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"cannot read config file " + path});
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str(), overrides);
}

// The configuration that determines one episode: execution settings (seed
// list, output directory, worker count) are dropped so a log does not depend
// on how the batch was run.
inline json episode_json(const RunConfig& c) {
  json j = to_json(c);
  j.erase("seeds");
  j.erase("output_dir");
  j.erase("jobs");
  return j;
}

inline std::string config_hash(const RunConfig& c) { return hex64(fnv1a(episode_json(c).dump())); }

}  // namespace objmem
