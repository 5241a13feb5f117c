#pragma once

// Episodic object memory: persistent entries with a running-mean position and
// a first-seen-ordered caption histogram, plus the structured text
// serialization injected into the prompt and its token accounting.

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "objmem/core.hpp"
#include "objmem/oracle.hpp"
#include "objmem/world.hpp"

namespace objmem {

// ---------------------------------------------------------------------------
// Position discretization

// Position in integer hundredths of a meter.
struct DiscretizedPosition {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;

  bool operator==(const DiscretizedPosition&) const = default;
};

// Rounds half away from zero to two decimals, applied to the shortest decimal
// representation of `v` (so 1.005 rounds to 1.01 even though the nearest
// double is slightly below 1.005).
inline std::int64_t round_hundredths(double v) {
  if (!std::isfinite(v) || std::fabs(v) >= 1e15) throw Error("position out of range");
  char buf[400];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed);
  std::string_view s(buf, static_cast<std::size_t>(res.ptr - buf));
  bool negative = false;
  if (!s.empty() && s.front() == '-') {
    negative = true;
    s.remove_prefix(1);
  }
  const std::size_t dot = s.find('.');
  std::string_view int_part = s.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  std::int64_t value = 0;
  for (char c : int_part) value = value * 10 + (c - '0');
  for (std::size_t k = 0; k < 2; ++k) value = value * 10 + (k < frac.size() ? frac[k] - '0' : 0);
  if (frac.size() > 2 && frac[2] >= '5') value += 1;
  return negative ? -value : value;
}

inline DiscretizedPosition discretize_position(const Vec3& p) {
  return DiscretizedPosition{round_hundredths(p.x), round_hundredths(p.y), round_hundredths(p.z)};
}

inline std::string format_hundredths(std::int64_t v) {
  std::string out = v < 0 ? "-" : "";
  const std::int64_t a = v < 0 ? -v : v;
  out += std::to_string(a / 100);
  out += '.';
  const std::int64_t frac = a % 100;
  if (frac < 10) out += '0';
  out += std::to_string(frac);
  return out;
}

inline Vec3 to_meters(const DiscretizedPosition& d) {
  return Vec3{static_cast<double>(d.x) / 100.0, static_cast<double>(d.y) / 100.0,
              static_cast<double>(d.z) / 100.0};
}

// ---------------------------------------------------------------------------
// Entries

struct CaptionCount {
  std::string text;
  int count = 0;

  bool operator==(const CaptionCount&) const = default;
};

struct ObjectEntry {
  PersistentId id = 0;
  Vec3 position;
  std::vector<CaptionCount> captions;  // first-seen order
  int observation_count = 0;

  std::size_t distinct_captions() const { return captions.size(); }

  int count_of(const std::string& text) const {
    for (const auto& c : captions) {
      if (c.text == text) return c.count;
    }
    return 0;
  }
};

struct MemoryConfig {
  PersistentId base_id = 1;
  int caption_cap = 0;  // max distinct captions per entry; 0 = unlimited
};

class EpisodicMemory {
 public:
  EpisodicMemory() = default;
  explicit EpisodicMemory(MemoryConfig cfg) : cfg_(cfg), next_id_(cfg.base_id) {}

  // Creates an entry initialized from one observation; IDs are sequential.
  PersistentId insert_new(const Vec3& position, const std::string& caption) {
    ObjectEntry e;
    e.id = next_id_++;
    e.position = position;
    e.captions.push_back({caption, 1});
    e.observation_count = 1;
    index_.emplace(e.id, entries_.size());
    sums_.push_back(position);
    entries_.push_back(std::move(e));
    return entries_.back().id;
  }

  PersistentId insert_new(const Detection& detection, const Caption& caption) {
    return insert_new(detection.world_position, caption.text);
  }

  // Folds one more observation into an entry: running-mean position, caption
  // count incremented or appended.
  void update_entry(PersistentId id, const Vec3& position, const std::string& caption) {
    auto it = index_.find(id);
    if (it == index_.end()) {
      throw AssociationError("update of unknown persistent id " + std::to_string(id));
    }
    ObjectEntry& e = entries_[it->second];
    Vec3& sum = sums_[it->second];
    sum.x += position.x;
    sum.y += position.y;
    sum.z += position.z;
    e.observation_count += 1;
    const double n = static_cast<double>(e.observation_count);
    e.position = Vec3{sum.x / n, sum.y / n, sum.z / n};

    auto c = std::find_if(e.captions.begin(), e.captions.end(),
                          [&](const CaptionCount& cc) { return cc.text == caption; });
    if (c != e.captions.end()) {
      c->count += 1;
      return;
    }
    e.captions.push_back({caption, 1});
    if (cfg_.caption_cap > 0 && static_cast<int>(e.captions.size()) > cfg_.caption_cap) {
      // Evict the least frequent caption (earliest on ties), never the new one.
      auto victim = std::min_element(e.captions.begin(), e.captions.end() - 1,
                                     [](const CaptionCount& a, const CaptionCount& b) {
                                       return a.count < b.count;
                                     });
      e.observation_count -= victim->count;
      e.captions.erase(victim);
    }
  }

  void update_entry(PersistentId id, const Detection& detection, const Caption& caption) {
    update_entry(id, detection.world_position, caption.text);
  }

  // Re-creates an entry verbatim (used when parsing a serialized memory).
  void restore_entry(ObjectEntry entry) {
    if (index_.count(entry.id)) {
      throw AssociationError("duplicate persistent id " + std::to_string(entry.id));
    }
    index_.emplace(entry.id, entries_.size());
    const double n = static_cast<double>(entry.observation_count);
    sums_.push_back(Vec3{entry.position.x * n, entry.position.y * n, entry.position.z * n});
    next_id_ = std::max(next_id_, entry.id + 1);
    entries_.push_back(std::move(entry));
  }

  bool contains(PersistentId id) const { return index_.count(id) != 0; }

  const ObjectEntry* find(PersistentId id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &entries_[it->second];
  }

  const ObjectEntry& at(PersistentId id) const {
    const ObjectEntry* e = find(id);
    if (!e) throw AssociationError("unknown persistent id " + std::to_string(id));
    return *e;
  }

  const std::vector<ObjectEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  PersistentId next_id() const { return next_id_; }
  const MemoryConfig& config() const { return cfg_; }

  std::size_t distinct_caption_total() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.captions.size();
    return n;
  }

 private:
  MemoryConfig cfg_;
  PersistentId next_id_ = 1;
  std::vector<ObjectEntry> entries_;
  std::vector<Vec3> sums_;
  std::unordered_map<PersistentId, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Serialization

inline std::string quote_caption(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

inline std::string format_position(const DiscretizedPosition& p) {
  return "[" + format_hundredths(p.x) + ", " + format_hundredths(p.y) + ", " +
         format_hundredths(p.z) + "]";
}

inline std::string serialize_entry(const ObjectEntry& e) {
  std::string out = "[OBJ-ID] " + std::to_string(e.id) + "\n[CAPTION-HISTORY]\n";
  for (const auto& c : e.captions) {
    out += "  " + std::to_string(c.count) + ": " + quote_caption(c.text) + "\n";
  }
  out += "[POSITION] " + format_position(discretize_position(e.position));
  return out;
}

// Scene block: [SCENE-START], object blocks separated by one blank line,
// [SCENE-END]. No trailing newline.
inline std::string serialize(const EpisodicMemory& memory) {
  std::string out = "[SCENE-START]\n";
  bool first = true;
  for (const auto& e : memory.entries()) {
    if (!first) out += "\n";
    out += serialize_entry(e);
    out += "\n";
    first = false;
  }
  out += "[SCENE-END]";
  return out;
}

// Token count under a fixed rule: whitespace splitting, then each chunk is cut
// into bracketed special tokens ("[OBJ-ID]"), maximal alphanumeric/underscore
// runs, and single punctuation characters.
inline std::size_t token_count(std::string_view text) {
  std::size_t count = 0;
  for (const auto& chunk : split_whitespace(text)) {
    std::size_t i = 0;
    while (i < chunk.size()) {
      const char c = chunk[i];
      if (c == '[') {
        std::size_t j = i + 1;
        while (j < chunk.size() &&
               (std::isupper(static_cast<unsigned char>(chunk[j])) || chunk[j] == '-' || chunk[j] == '_')) {
          ++j;
        }
        if (j > i + 1 && j < chunk.size() && chunk[j] == ']') {
          ++count;
          i = j + 1;
          continue;
        }
        ++count;
        ++i;
      } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
        while (i < chunk.size() &&
               (std::isalnum(static_cast<unsigned char>(chunk[i])) || chunk[i] == '_')) {
          ++i;
        }
        ++count;
      } else {
        ++count;
        ++i;
      }
    }
  }
  return count;
}

}  // namespace objmem
