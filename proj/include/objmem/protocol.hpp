#pragma once

// Prompt serializer and strict parsers for the structured model turn:
//
//   [MATCH] <transient> : <persistent|NEW_ID>     one per detection, frame order
//   [CAPTION] "<text>"                            one per match, same order
//   [ACTION] <move_forward|stop|turn_left|turn_right>
//
// and for the serialized scene block produced by memory.hpp. See
// docs/protocol.ebnf for the full grammar.

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "objmem/core.hpp"
#include "objmem/memory.hpp"

namespace objmem {

enum class ParseErrorKind {
  missing_action,
  duplicate_action,
  unknown_action,
  duplicate_transient_id,
  non_integer_id,
  caption_count_mismatch,
  malformed_match,
  malformed_caption,
  unexpected_line,
  malformed_block,
  duplicate_object_id,
  non_positive_count,
};

inline std::string_view to_string(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::missing_action: return "missing_action";
    case ParseErrorKind::duplicate_action: return "duplicate_action";
    case ParseErrorKind::unknown_action: return "unknown_action";
    case ParseErrorKind::duplicate_transient_id: return "duplicate_transient_id";
    case ParseErrorKind::non_integer_id: return "non_integer_id";
    case ParseErrorKind::caption_count_mismatch: return "caption_count_mismatch";
    case ParseErrorKind::malformed_match: return "malformed_match";
    case ParseErrorKind::malformed_caption: return "malformed_caption";
    case ParseErrorKind::unexpected_line: return "unexpected_line";
    case ParseErrorKind::malformed_block: return "malformed_block";
    case ParseErrorKind::duplicate_object_id: return "duplicate_object_id";
    case ParseErrorKind::non_positive_count: return "non_positive_count";
  }
  return "unknown";
}

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, std::size_t line, const std::string& detail)
      : Error(std::string(to_string(kind)) + " at line " + std::to_string(line) + ": " + detail),
        kind_(kind),
        line_(line) {}

  ParseErrorKind kind() const { return kind_; }
  std::size_t line() const { return line_; }  // 1-based; 0 when not line specific

 private:
  ParseErrorKind kind_;
  std::size_t line_;
};

inline constexpr std::string_view kNewIdLiteral = "NEW_ID";

struct MatchDecision {
  TransientId transient_id = 0;
  std::optional<PersistentId> target;  // nullopt means NEW_ID

  bool is_new() const { return !target.has_value(); }
  bool operator==(const MatchDecision&) const = default;
};

struct StructuredOutput {
  std::vector<MatchDecision> matches;
  std::vector<std::string> captions;  // aligned with matches
  Action action = Action::stop;

  bool operator==(const StructuredOutput&) const = default;
};

// ---------------------------------------------------------------------------
// Prompt

// Instruction text with two placeholders, {FRAME_IDS} and {MEMORY}, each
// occurring exactly once.
struct PromptTemplate {
  std::string text;

  static PromptTemplate standard() {
    return PromptTemplate{
        "[TASK-START]\n"
        "Your task is object linking and action prediction.\n"
        "\n"
        "You are given:\n"
        " - A MEMORY of previously seen objects, each with a fixed OBJ-ID.\n"
        " - A FRAME with current objects, each having a temporary OBJ-ID\n"
        "   (a random ID drawn over the image).\n"
        "\n"
        "For each object in the FRAME, decide whether it corresponds\n"
        "to one MEMORY object.\n"
        "If it matches, output:\n"
        "  [MATCH] <frame_random_id> : <memory_obj_id>\n"
        "If it is a new object, output:\n"
        "  [MATCH] <frame_random_id> : NEW_ID\n"
        "\n"
        "After matching all objects, predict the action to take:\n"
        "  [ACTION] [ACTION]\n"
        "Available actions are:\n"
        "  move_forward, stop, turn_left, turn_right\n"
        "\n"
        "Below are the FRAME objects and their random IDs:\n"
        "{FRAME_IDS}\n"
        "\n"
        "{MEMORY}"};
  }
};

inline constexpr std::string_view kFramePlaceholder = "{FRAME_IDS}";
inline constexpr std::string_view kMemoryPlaceholder = "{MEMORY}";

struct PromptDocument {
  PromptTemplate instructions;
  std::vector<TransientId> frame_ids;
  std::string memory_block;

  // The frame line is "  id, id, ..." or empty for an empty frame.
  std::string frame_line() const {
    if (frame_ids.empty()) return "";
    std::string out = "  ";
    for (std::size_t k = 0; k < frame_ids.size(); ++k) {
      if (k) out += ", ";
      out += std::to_string(frame_ids[k]);
    }
    return out;
  }

  std::string text() const {
    const std::string& t = instructions.text;
    const std::size_t f = t.find(kFramePlaceholder);
    const std::size_t m = t.find(kMemoryPlaceholder);
    if (f == std::string::npos || m == std::string::npos ||
        t.find(kFramePlaceholder, f + 1) != std::string::npos ||
        t.find(kMemoryPlaceholder, m + 1) != std::string::npos) {
      throw RenderError("prompt template needs exactly one {FRAME_IDS} and one {MEMORY}");
    }
    std::string out;
    if (f < m) {
      out = t.substr(0, f) + frame_line() + t.substr(f + kFramePlaceholder.size(), m - f - kFramePlaceholder.size()) +
            memory_block + t.substr(m + kMemoryPlaceholder.size());
    } else {
      out = t.substr(0, m) + memory_block + t.substr(m + kMemoryPlaceholder.size(), f - m - kMemoryPlaceholder.size()) +
            frame_line() + t.substr(f + kFramePlaceholder.size());
    }
    return out;
  }
};

inline std::string format_prompt(const EpisodicMemory& memory, std::span<const TransientId> frame_ids,
                                 const PromptTemplate& instructions = PromptTemplate::standard()) {
  PromptDocument doc{instructions, std::vector<TransientId>(frame_ids.begin(), frame_ids.end()),
                     serialize(memory)};
  return doc.text();
}

inline std::string format_prompt(const EpisodicMemory& memory, const Observation& observation,
                                 const PromptTemplate& instructions = PromptTemplate::standard()) {
  const auto ids = observation.transient_ids();
  return format_prompt(memory, std::span<const TransientId>(ids), instructions);
}

// ---------------------------------------------------------------------------
// Quoted strings

namespace detail {

// Parses a double-quoted string spanning all of `s`; nullopt when malformed.
inline std::optional<std::string> unquote(std::string_view s) {
  if (s.size() < 2 || s.front() != '"') return std::nullopt;
  std::string out;
  std::size_t i = 1;
  while (i < s.size()) {
    const char c = s[i];
    if (c == '\\') {
      if (i + 1 >= s.size()) return std::nullopt;
      const char e = s[i + 1];
      if (e == '"') out += '"';
      else if (e == '\\') out += '\\';
      else if (e == 'n') out += '\n';
      else return std::nullopt;
      i += 2;
    } else if (c == '"') {
      if (i + 1 != s.size()) return std::nullopt;
      return out;
    } else {
      out += c;
      ++i;
    }
  }
  return std::nullopt;
}

inline bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

// Lines with trailing whitespace removed and trailing blank lines dropped.
inline std::vector<std::string_view> content_lines(std::string_view text) {
  auto lines = split_lines(text);
  for (auto& l : lines) l = trim_right(l);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Structured output

inline StructuredOutput parse_output(std::string_view text) {
  StructuredOutput out;
  std::set<TransientId> seen;
  bool have_action = false;
  int phase = 0;  // 0 matches, 1 captions, 2 after action
  const auto lines = detail::content_lines(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const std::string_view line = lines[k];
    const std::size_t line_no = k + 1;
    if (detail::starts_with(line, "[MATCH] ")) {
      if (phase != 0) throw ParseError(ParseErrorKind::unexpected_line, line_no, "[MATCH] after captions or action");
      const std::string_view body = line.substr(8);
      const std::size_t sep = body.find(" : ");
      if (sep == std::string_view::npos || body.find(" : ", sep + 1) != std::string_view::npos) {
        throw ParseError(ParseErrorKind::malformed_match, line_no, "expected '<id> : <id|NEW_ID>'");
      }
      const auto transient = parse_non_negative(body.substr(0, sep));
      if (!transient || *transient > INT32_MAX) {
        throw ParseError(ParseErrorKind::non_integer_id, line_no, "transient id is not an integer");
      }
      MatchDecision d;
      d.transient_id = static_cast<TransientId>(*transient);
      const std::string_view target = body.substr(sep + 3);
      if (target != kNewIdLiteral) {
        const auto persistent = parse_non_negative(target);
        if (!persistent) throw ParseError(ParseErrorKind::non_integer_id, line_no, "memory id is not an integer");
        d.target = *persistent;
      }
      if (!seen.insert(d.transient_id).second) {
        throw ParseError(ParseErrorKind::duplicate_transient_id, line_no,
                         "transient id " + std::to_string(d.transient_id) + " matched twice");
      }
      out.matches.push_back(d);
    } else if (detail::starts_with(line, "[CAPTION] ")) {
      if (phase > 1) throw ParseError(ParseErrorKind::unexpected_line, line_no, "[CAPTION] after action");
      phase = 1;
      auto caption = detail::unquote(line.substr(10));
      if (!caption) throw ParseError(ParseErrorKind::malformed_caption, line_no, "caption must be one quoted string");
      out.captions.push_back(std::move(*caption));
    } else if (detail::starts_with(line, "[ACTION] ")) {
      if (have_action) throw ParseError(ParseErrorKind::duplicate_action, line_no, "more than one [ACTION]");
      auto action = action_from_string(line.substr(9));
      if (!action) {
        throw ParseError(ParseErrorKind::unknown_action, line_no, "unknown action '" + std::string(line.substr(9)) + "'");
      }
      out.action = *action;
      have_action = true;
      phase = 2;
    } else {
      throw ParseError(ParseErrorKind::unexpected_line, line_no, "unrecognized line '" + std::string(line) + "'");
    }
  }
  if (!have_action) throw ParseError(ParseErrorKind::missing_action, 0, "no [ACTION] line");
  if (out.captions.size() != out.matches.size()) {
    throw ParseError(ParseErrorKind::caption_count_mismatch, 0,
                     std::to_string(out.matches.size()) + " matches but " + std::to_string(out.captions.size()) +
                         " captions");
  }
  return out;
}

inline std::string render_output(const StructuredOutput& out) {
  if (out.captions.size() != out.matches.size()) {
    throw RenderError("render_output: caption count differs from match count");
  }
  std::set<TransientId> seen;
  std::string text;
  for (const auto& m : out.matches) {
    if (m.transient_id < 0 || (m.target && *m.target < 0)) throw RenderError("render_output: negative id");
    if (!seen.insert(m.transient_id).second) throw RenderError("render_output: duplicate transient id");
    text += "[MATCH] " + std::to_string(m.transient_id) + " : " +
            (m.target ? std::to_string(*m.target) : std::string(kNewIdLiteral)) + "\n";
  }
  for (const auto& c : out.captions) text += "[CAPTION] " + quote_caption(c) + "\n";
  text += "[ACTION] ";
  text += to_string(out.action);
  return text;
}

// ---------------------------------------------------------------------------
// Memory block

namespace detail {

inline std::optional<std::int64_t> parse_hundredths(std::string_view s) {
  bool negative = false;
  if (!s.empty() && s.front() == '-') {
    negative = true;
    s.remove_prefix(1);
  }
  const std::size_t dot = s.find('.');
  if (dot == std::string_view::npos || dot == 0 || s.size() != dot + 3) return std::nullopt;
  if (dot > 1 && s[0] == '0') return std::nullopt;
  const auto whole = parse_non_negative(s.substr(0, dot));
  const auto frac = parse_non_negative(s.substr(dot + 1));
  if (!whole || !frac) return std::nullopt;
  const std::int64_t v = *whole * 100 + *frac;
  if (negative && v == 0) return std::nullopt;
  return negative ? -v : v;
}

inline std::optional<DiscretizedPosition> parse_position(std::string_view s) {
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') return std::nullopt;
  s = s.substr(1, s.size() - 2);
  const std::size_t c1 = s.find(", ");
  if (c1 == std::string_view::npos) return std::nullopt;
  const std::size_t c2 = s.find(", ", c1 + 2);
  if (c2 == std::string_view::npos || s.find(", ", c2 + 2) != std::string_view::npos) return std::nullopt;
  const auto x = parse_hundredths(s.substr(0, c1));
  const auto y = parse_hundredths(s.substr(c1 + 2, c2 - c1 - 2));
  const auto z = parse_hundredths(s.substr(c2 + 2));
  if (!x || !y || !z) return std::nullopt;
  return DiscretizedPosition{*x, *y, *z};
}

}  // namespace detail

inline EpisodicMemory parse_memory(std::string_view text, MemoryConfig cfg = {}) {
  const auto lines = detail::content_lines(text);
  auto fail = [](ParseErrorKind kind, std::size_t k, const std::string& what) {
    return ParseError(kind, k + 1, what);
  };
  if (lines.empty() || lines.front() != "[SCENE-START]") {
    throw fail(ParseErrorKind::malformed_block, 0, "expected [SCENE-START]");
  }
  EpisodicMemory memory(cfg);
  std::set<PersistentId> ids;
  std::size_t k = 1;
  bool expect_separator = false;
  for (;;) {
    if (k >= lines.size()) throw fail(ParseErrorKind::malformed_block, k, "missing [SCENE-END]");
    if (lines[k] == "[SCENE-END]") {
      if (k + 1 != lines.size()) throw fail(ParseErrorKind::malformed_block, k + 1, "content after [SCENE-END]");
      break;
    }
    if (expect_separator) {
      if (!lines[k].empty()) throw fail(ParseErrorKind::malformed_block, k, "expected blank line between objects");
      ++k;
      if (k >= lines.size()) throw fail(ParseErrorKind::malformed_block, k, "missing [SCENE-END]");
    }
    if (!detail::starts_with(lines[k], "[OBJ-ID] ")) {
      throw fail(ParseErrorKind::malformed_block, k, "expected [OBJ-ID]");
    }
    const auto id = parse_non_negative(lines[k].substr(9));
    if (!id) throw fail(ParseErrorKind::malformed_block, k, "object id is not an integer");
    if (!ids.insert(*id).second) {
      throw fail(ParseErrorKind::duplicate_object_id, k, "object id " + std::to_string(*id) + " repeated");
    }
    ++k;
    if (k >= lines.size() || lines[k] != "[CAPTION-HISTORY]") {
      throw fail(ParseErrorKind::malformed_block, k, "expected [CAPTION-HISTORY]");
    }
    ++k;
    ObjectEntry entry;
    entry.id = *id;
    while (k < lines.size() && detail::starts_with(lines[k], "  ")) {
      const std::string_view body = lines[k].substr(2);
      const std::size_t colon = body.find(": ");
      if (colon == std::string_view::npos) throw fail(ParseErrorKind::malformed_block, k, "expected '<count>: \"caption\"'");
      std::string_view count_text = body.substr(0, colon);
      bool negative = false;
      if (!count_text.empty() && count_text.front() == '-') {
        negative = true;
        count_text.remove_prefix(1);
      }
      const auto count = parse_non_negative(count_text);
      if (!count) throw fail(ParseErrorKind::malformed_block, k, "caption count is not an integer");
      if (negative || *count < 1) throw fail(ParseErrorKind::non_positive_count, k, "caption count below 1");
      if (*count > INT32_MAX) throw fail(ParseErrorKind::malformed_block, k, "caption count too large");
      auto caption = detail::unquote(body.substr(colon + 2));
      if (!caption) throw fail(ParseErrorKind::malformed_block, k, "caption must be one quoted string");
      if (entry.count_of(*caption) > 0) throw fail(ParseErrorKind::malformed_block, k, "caption repeated in history");
      entry.captions.push_back({std::move(*caption), static_cast<int>(*count)});
      entry.observation_count += static_cast<int>(*count);
      ++k;
    }
    if (entry.captions.empty()) throw fail(ParseErrorKind::malformed_block, k, "empty caption history");
    if (k >= lines.size() || !detail::starts_with(lines[k], "[POSITION] ")) {
      throw fail(ParseErrorKind::malformed_block, k, "expected [POSITION]");
    }
    const auto pos = detail::parse_position(lines[k].substr(11));
    if (!pos) throw fail(ParseErrorKind::malformed_block, k, "position must be [x.xx, y.yy, z.zz]");
    entry.position = to_meters(*pos);
    ++k;
    memory.restore_entry(std::move(entry));
    expect_separator = true;
  }
  return memory;
}

}  // namespace objmem
