#pragma once

// Episode logs as JSON lines: one header record, one record per step, one
// footer record. Everything the metrics need travels in the log, so
// evaluation never needs the world file.

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "objmem/episode.hpp"

namespace objmem {

inline constexpr std::string_view kLogFormat = "objmem-episode";
inline constexpr int kLogVersion = 1;

// Malformed log; `step` is the step index being read (0 for header/footer).
class LogError : public Error {
 public:
  LogError(std::size_t line, int step, const std::string& what)
      : Error("log line " + std::to_string(line) + " (step " + std::to_string(step) + "): " + what),
        line_(line),
        step_(step) {}

  std::size_t line() const { return line_; }
  int step() const { return step_; }

 private:
  std::size_t line_;
  int step_;
};

namespace detail {

inline json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
inline json cell_json(const Cell& c) { return json::array({c.col, c.row}); }

inline Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error("expected [x, y, z]");
  return Vec3{j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

inline Cell cell_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error("expected [col, row]");
  return Cell{j.at(0).get<int>(), j.at(1).get<int>()};
}

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace detail

inline json header_json(const EpisodeHeader& h) {
  json objects = json::array();
  for (const auto& o : h.objects) {
    objects.push_back({{"true_id", o.true_id},
                       {"cell", detail::cell_json(o.cell)},
                       {"center", detail::vec3_json(o.center)},
                       {"footprint_radius", o.footprint_radius},
                       {"category", o.attributes.category},
                       {"modifiers", o.attributes.modifiers}});
  }
  const auto& v = h.vocabulary;
  return {{"type", "header"},
          {"format", kLogFormat},
          {"version", kLogVersion},
          {"config", h.config},
          {"config_hash", h.config_hash},
          {"world_hash", h.world_hash},
          {"world_seed", h.world_seed},
          {"policy_seed", h.policy_seed},
          {"policy", h.policy},
          {"association", h.association},
          {"grid", {{"width", h.grid_width}, {"height", h.grid_height}, {"cell_size", h.cell_size}}},
          {"objects", objects},
          {"vocabulary",
           {{"categories", v.categories()},
            {"modifiers", v.modifiers()},
            {"context", v.context()},
            {"confusable", v.confusable_groups()}}}};
}

inline json step_json(const StepLog& s) {
  json dets = json::array();
  for (const auto& d : s.detections) {
    json fp = json::array();
    for (const Cell& c : d.footprint) fp.push_back(detail::cell_json(c));
    dets.push_back({{"transient_id", d.transient_id},
                    {"true_id", d.true_id},
                    {"position", detail::vec3_json(d.position)},
                    {"footprint", fp},
                    {"caption", d.caption}});
  }
  json recs = json::array();
  for (const auto& r : s.records) {
    recs.push_back({{"transient_id", r.decision.transient_id},
                    {"decision", r.decision.target ? json(*r.decision.target) : json(kNewIdLiteral)},
                    {"persistent_id", r.predicted_persistent_id},
                    {"true_id", r.true_object_id}});
  }
  return {{"type", "step"},
          {"step", s.step},
          {"pose", {s.pose.cell.col, s.pose.cell.row, s.pose.heading, s.pose.heading_count}},
          {"action", std::string(to_string(s.action))},
          {"collided", s.collided},
          {"detections", dets},
          {"prompt", s.prompt},
          {"output", s.output},
          {"records", recs},
          {"memory_tokens", s.memory_tokens},
          {"entries", s.entries},
          {"distinct_captions", s.distinct_captions},
          {"memory", s.memory_text}};
}

inline json metrics_json(const EpisodeMetrics& m) {
  auto opt_int = [](const std::optional<int>& v) { return v ? json(*v) : json(nullptr); };
  auto opt_bool = [](const std::optional<bool>& v) { return v ? json(*v) : json(nullptr); };
  return {{"steps", m.steps},
          {"decisions", m.decisions},
          {"acc", detail::optional_json(m.acc)},
          {"f1_match", detail::optional_json(m.f1_match)},
          {"f1_new", detail::optional_json(m.f1_new)},
          {"idsw", m.idsw},
          {"frag", m.frag},
          {"entries", m.entries},
          {"objects_discovered", m.objects_discovered},
          {"cs_mean", detail::optional_json(m.cs_mean)},
          {"cs_median", detail::optional_json(m.cs_median)},
          {"cs_iqr", detail::optional_json(m.cs_iqr)},
          {"disagreement_mean", detail::optional_json(m.disagreement_mean)},
          {"consensus_f1", detail::optional_json(m.consensus_f1)},
          {"baseline_f1", detail::optional_json(m.baseline_f1)},
          {"corr_tokens_objects", detail::optional_json(m.corr_tokens_objects)},
          {"corr_tokens_suffix", detail::optional_json(m.corr_tokens_suffix)},
          {"saturation_step", opt_int(m.saturation_step)},
          {"scalability_pass", opt_bool(m.scalability_pass)}};
}

inline json footer_json(const EpisodeData& data, const EpisodeMetrics& m) {
  json pcs = json::array();
  for (const auto& p : m.pseudo_captions) {
    pcs.push_back({{"id", p.id},
                   {"true_id", p.true_id ? json(*p.true_id) : json(nullptr)},
                   {"consensus", p.consensus},
                   {"baseline", p.baseline}});
  }
  return {{"type", "footer"},
          {"steps", data.steps.size()},
          {"final_memory", data.final_memory},
          {"pseudo_captions", pcs},
          {"metrics", metrics_json(m)}};
}

inline void write_log(std::ostream& out, const EpisodeData& data, const EpisodeMetrics& metrics) {
  out << header_json(data.header).dump() << '\n';
  for (const auto& s : data.steps) out << step_json(s).dump() << '\n';
  out << footer_json(data, metrics).dump() << '\n';
}

inline std::string log_to_string(const EpisodeData& data, const EpisodeMetrics& metrics) {
  std::ostringstream out;
  write_log(out, data, metrics);
  return out.str();
}

struct LoadedLog {
  EpisodeData data;
  json footer;
};

inline LoadedLog read_log(std::istream& in) {
  LoadedLog log;
  std::string line;
  std::size_t line_no = 0;
  int step = 0;
  bool have_header = false;
  bool have_footer = false;
  auto fail = [&](const std::string& what) { return LogError(line_no, step, what); };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (have_footer) throw fail("content after footer");
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw fail(std::string("invalid JSON: ") + e.what());
    }
    try {
      const std::string type = j.at("type").get<std::string>();
      if (!have_header) {
        if (type != "header") throw fail("first record must be the header");
        if (j.at("format").get<std::string>() != kLogFormat || j.at("version").get<int>() != kLogVersion) {
          throw fail("unsupported log format");
        }
        auto& h = log.data.header;
        h.config = j.at("config");
        h.config_hash = j.at("config_hash").get<std::string>();
        h.world_hash = j.at("world_hash").get<std::string>();
        h.world_seed = j.at("world_seed").get<std::uint64_t>();
        h.policy_seed = j.at("policy_seed").get<std::uint64_t>();
        h.policy = j.at("policy").get<std::string>();
        h.association = j.at("association").get<std::string>();
        h.grid_width = j.at("grid").at("width").get<int>();
        h.grid_height = j.at("grid").at("height").get<int>();
        h.cell_size = j.at("grid").at("cell_size").get<double>();
        const auto& v = j.at("vocabulary");
        h.vocabulary = Vocabulary(v.at("categories").get<std::vector<std::string>>(),
                                  v.at("modifiers").get<std::vector<std::string>>(),
                                  v.at("context").get<std::vector<std::string>>(),
                                  v.at("confusable").get<std::vector<std::vector<std::string>>>());
        for (const auto& o : j.at("objects")) {
          WorldObject w;
          w.true_id = o.at("true_id").get<int>();
          w.cell = detail::cell_from(o.at("cell"));
          w.center = detail::vec3_from(o.at("center"));
          w.footprint_radius = o.at("footprint_radius").get<double>();
          w.attributes.category = o.at("category").get<std::string>();
          w.attributes.modifiers = o.at("modifiers").get<std::vector<std::string>>();
          h.objects.push_back(std::move(w));
        }
        have_header = true;
        continue;
      }
      if (type == "step") {
        ++step;
        StepLog s;
        s.step = j.at("step").get<int>();
        if (s.step != step) throw fail("step records must be contiguous from 1");
        const auto& p = j.at("pose");
        s.pose = AgentPose{Cell{p.at(0).get<int>(), p.at(1).get<int>()}, p.at(2).get<int>(), p.at(3).get<int>()};
        const auto action = action_from_string(j.at("action").get<std::string>());
        if (!action) throw fail("unknown action");
        s.action = *action;
        s.collided = j.at("collided").get<bool>();
        for (const auto& d : j.at("detections")) {
          DetectionLog dl;
          dl.transient_id = d.at("transient_id").get<int>();
          dl.true_id = d.at("true_id").get<int>();
          dl.position = detail::vec3_from(d.at("position"));
          for (const auto& c : d.at("footprint")) dl.footprint.push_back(detail::cell_from(c));
          dl.caption = d.at("caption").get<std::string>();
          s.detections.push_back(std::move(dl));
        }
        for (const auto& r : j.at("records")) {
          AssociationRecord rec;
          rec.step = s.step;
          rec.decision.transient_id = r.at("transient_id").get<int>();
          const auto& dec = r.at("decision");
          if (dec.is_string()) {
            if (dec.get<std::string>() != kNewIdLiteral) throw fail("decision must be an id or NEW_ID");
          } else {
            rec.decision.target = dec.get<PersistentId>();
          }
          rec.predicted_persistent_id = r.at("persistent_id").get<PersistentId>();
          rec.true_object_id = r.at("true_id").get<int>();
          s.records.push_back(rec);
        }
        s.prompt = j.at("prompt").get<std::string>();
        s.output = j.at("output").get<std::string>();
        s.memory_tokens = j.at("memory_tokens").get<std::size_t>();
        s.entries = j.at("entries").get<std::size_t>();
        s.distinct_captions = j.at("distinct_captions").get<std::size_t>();
        s.memory_text = j.at("memory").get<std::string>();
        log.data.steps.push_back(std::move(s));
      } else if (type == "footer") {
        step = 0;
        if (j.at("steps").get<std::size_t>() != log.data.steps.size()) throw fail("footer step count mismatch");
        log.data.final_memory = j.at("final_memory").get<std::string>();
        log.footer = j;
        have_footer = true;
      } else {
        throw fail("unknown record type '" + type + "'");
      }
    } catch (const LogError&) {
      throw;
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
  }
  if (!have_header) throw fail("missing header");
  if (!have_footer) throw fail("missing footer");
  return log;
}

inline LoadedLog log_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_log(in);
}

}  // namespace objmem
