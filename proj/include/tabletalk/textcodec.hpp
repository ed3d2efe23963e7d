#pragma once

// Text codec between domain values and the decorated-sentence grammar used in
// conversation data.
//
// Decorators:
//   <b>(x, y)</b>                a point
//   <b>(x, y), {w, h}</b>        a bounding box (center, width, height)
//   <r>[r]</r>                   a clockwise rotation in integer degrees
//   <p>name</p>                  an object name
//   <d>(x, y)</d>                a per-axis center distance
//   <e>v</e>                     a euclidean center distance
//   <scene>...</scene>           a list of "name at bbox." clauses
//
// Numbers inside decorators are printed with exactly three decimals, rounded
// half away from zero. Parsing recovers full float precision from the digits;
// values are never re-rounded on the way in.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tabletalk/core.hpp"

namespace tabletalk {

// ---------------------------------------------------------------------------
// number and span formatting

// Three decimals, half away from zero. -0 is normalized to "0.000".
inline std::string format_decimal3(double v) {
  long long scaled = std::llround(v * 1000.0);
  std::string out;
  if (scaled < 0) {
    out.push_back('-');
    scaled = -scaled;
  }
  out += std::to_string(scaled / 1000);
  out.push_back('.');
  std::string frac = std::to_string(scaled % 1000);
  out += std::string(3 - frac.size(), '0');
  out += frac;
  return out;
}

inline std::string format_point(const NormPoint& p) {
  return "(" + format_decimal3(p.x) + ", " + format_decimal3(p.y) + ")";
}

inline std::string format_bbox(const BBox& b) {
  return format_point(b.center) + ", {" + format_decimal3(b.w) + ", " +
         format_decimal3(b.h) + "}";
}

inline std::string point_span(const NormPoint& p) { return "<b>" + format_point(p) + "</b>"; }
inline std::string bbox_span(const BBox& b) { return "<b>" + format_bbox(b) + "</b>"; }
inline std::string rotation_span(int deg) { return "<r>[" + std::to_string(deg) + "]</r>"; }
inline std::string name_span(const std::string& name) { return "<p>" + name + "</p>"; }

// "<p>name</p> at <b>(x, y), {w, h}</b>" without a trailing period.
inline std::string format_object_clause(const ObjectInstance& obj) {
  return name_span(obj.name) + " at " + bbox_span(obj.bbox);
}

// ---------------------------------------------------------------------------
// action text

struct ActionTextOptions {
  bool step_prefix = true;      // "Step N: ", emitted when step_index is set
  bool object_name = true;      // "<p>name</p>" when known, else "object"
  bool sentence_period = true;  // trailing "."
  bool lowercase_lead = false;  // "pick up" for mid-sentence embedding
};

inline std::string encode_action(const Action& a, const ActionTextOptions& opts = {}) {
  std::string out;
  if (opts.step_prefix && a.step_index)
    out += "Step " + std::to_string(*a.step_index) + ": ";
  out += opts.lowercase_lead ? "pick up the " : "Pick up the ";
  if (opts.object_name && a.picked_object_name)
    out += name_span(*a.picked_object_name);
  else
    out += "object";
  out += " at " + point_span(a.pick);
  out += ", rotate " + rotation_span(a.rotation_deg) + " degrees";
  out += ", and drop it at " + point_span(a.place);
  if (opts.sentence_period) out += ".";
  return out;
}

// ---------------------------------------------------------------------------
// parsing

struct ParseIssue {
  std::size_t offset = 0;  // byte offset into the input text
  std::string message;
  bool operator==(const ParseIssue&) const = default;
};

struct ActionParseResult {
  std::vector<Action> actions;   // in order of appearance
  std::vector<ParseIssue> issues;
};

struct SceneParseResult {
  std::optional<SceneState> scene;
  std::vector<ParseIssue> issues;
  bool ok() const { return scene.has_value(); }
};

namespace detail {

inline char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

inline bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// Scanning cursor over immutable text. All match_* helpers advance only on
// success.
struct Cursor {
  std::string_view s;
  std::size_t pos = 0;

  bool done() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }

  void skip_ws() {
    while (pos < s.size() && is_ws(s[pos])) ++pos;
  }

  bool match(std::string_view lit) {
    if (s.substr(pos, lit.size()) != lit) return false;
    pos += lit.size();
    return true;
  }

  // Case-insensitive literal where any whitespace in `lit` matches a
  // whitespace run in the text.
  bool match_ci_words(std::string_view lit) {
    std::size_t p = pos;
    std::size_t i = 0;
    while (i < lit.size()) {
      if (lit[i] == ' ') {
        if (p >= s.size() || !is_ws(s[p])) return false;
        while (p < s.size() && is_ws(s[p])) ++p;
        ++i;
      } else {
        if (p >= s.size() || lower(s[p]) != lower(lit[i])) return false;
        ++p;
        ++i;
      }
    }
    pos = p;
    return true;
  }

  // Parses a decimal number (optional sign, digits, optional fraction).
  bool parse_number(double& out) {
    std::size_t p = pos;
    if (p < s.size() && (s[p] == '-' || s[p] == '+')) ++p;
    std::size_t digits_from = p;
    while (p < s.size() && s[p] >= '0' && s[p] <= '9') ++p;
    if (p < s.size() && s[p] == '.') {
      ++p;
      while (p < s.size() && s[p] >= '0' && s[p] <= '9') ++p;
    }
    if (p == digits_from) return false;
    auto res = std::from_chars(s.data() + pos, s.data() + p, out);
    if (res.ec != std::errc() || res.ptr != s.data() + p) return false;
    pos = p;
    return true;
  }

  bool parse_int(long long& out) {
    std::size_t p = pos;
    if (p < s.size() && (s[p] == '-' || s[p] == '+')) ++p;
    std::size_t digits_from = p;
    while (p < s.size() && s[p] >= '0' && s[p] <= '9') ++p;
    if (p == digits_from) return false;
    std::string_view body = s.substr(pos, p - pos);
    const char* first = body.data() + (body[0] == '+' ? 1 : 0);
    auto res = std::from_chars(first, body.data() + body.size(), out);
    if (res.ec != std::errc() || res.ptr != body.data() + body.size()) return false;
    pos = p;
    return true;
  }
};

inline std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from) {
  if (needle.empty() || hay.size() < needle.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    std::size_t j = 0;
    while (j < needle.size() && lower(hay[i + j]) == lower(needle[j])) ++j;
    if (j == needle.size()) return i;
  }
  return std::string_view::npos;
}

// "<b>(x, y)</b>" with flexible whitespace. Once the <b> decorator has
// opened, any failure inside is reported as an issue with its byte offset.
inline bool parse_point_span(Cursor& c, NormPoint& out, std::vector<ParseIssue>* issues) {
  if (!c.match("<b>")) return false;
  auto report = [&](const char* msg) {
    if (issues) issues->push_back({c.pos, msg});
    return false;
  };
  c.skip_ws();
  if (!c.match("(")) return report("expected '(' in <b> point");
  c.skip_ws();
  if (!c.parse_number(out.x)) return report("malformed number in <b> point");
  c.skip_ws();
  if (!c.match(",")) return report("malformed number in <b> point");
  c.skip_ws();
  if (!c.parse_number(out.y)) return report("malformed number in <b> point");
  c.skip_ws();
  if (!c.match(")")) return report("expected ')' in <b> point");
  c.skip_ws();
  if (!c.match("</b>")) return report("unterminated <b> decorator");
  return true;
}

// "<p>name</p>"; name may not contain a nested tag opener.
inline bool parse_name_span(Cursor& c, std::string& out) {
  if (!c.match("<p>")) return false;
  std::size_t end = c.s.find("</p>", c.pos);
  if (end == std::string_view::npos) return false;
  out.assign(c.s.substr(c.pos, end - c.pos));
  if (out.empty()) return false;
  c.pos = end + 4;
  return true;
}

}  // namespace detail

// Extracts every action sentence in the text, in order. Text around and
// between actions is ignored. A matched decorator with a malformed number
// yields an issue (with byte offset) instead of an action; scanning resumes
// after it.
inline ActionParseResult parse_actions(std::string_view text) {
  ActionParseResult result;
  std::size_t scan = 0;
  while (true) {
    std::size_t hit = detail::find_ci(text, "pick up the", scan);
    if (hit == std::string_view::npos) break;

    detail::Cursor c{text, hit};
    Action action;
    bool issue_logged_before = false;

    // Optional "Step N:" immediately before, scanned backwards.
    {
      std::size_t j = hit;
      while (j > 0 && detail::is_ws(text[j - 1])) --j;
      if (j > 0 && text[j - 1] == ':') {
        std::size_t colon = j - 1;
        std::size_t d_end = colon;
        while (d_end > 0 && detail::is_ws(text[d_end - 1])) --d_end;
        std::size_t d_begin = d_end;
        while (d_begin > 0 && text[d_begin - 1] >= '0' && text[d_begin - 1] <= '9') --d_begin;
        if (d_begin < d_end) {
          std::size_t w_end = d_begin;
          while (w_end > 0 && detail::is_ws(text[w_end - 1])) --w_end;
          if (w_end >= 4 && detail::find_ci(text.substr(w_end - 4, 4), "step", 0) == 0) {
            long long idx = 0;
            std::from_chars(text.data() + d_begin, text.data() + d_end, idx);
            if (idx >= 1) action.step_index = static_cast<int>(idx);
          }
        }
      }
    }

    auto fail = [&](bool structural) {
      // Structural mismatch: not an action sentence, move past the anchor.
      (void)structural;
      scan = hit + 1;
    };

    c.match_ci_words("pick up the");
    std::size_t after_verb = c.pos;
    c.skip_ws();

    std::string name;
    if (c.pos < text.size() && text[c.pos] == '<') {
      if (!detail::parse_name_span(c, name)) {
        fail(true);
        continue;
      }
      action.picked_object_name = name;
      c.skip_ws();
    } else {
      // A bare noun phrase ("object", "red thing"): consume up to " at <b>".
      // The noun never spans lines.
      std::size_t at = detail::find_ci(text, "at <b>", c.pos);
      std::size_t limit = c.pos + 80;
      if (at == std::string_view::npos || at > limit) {
        fail(true);
        continue;
      }
      std::string_view noun = text.substr(after_verb, at - after_verb);
      if (noun.find('\n') != std::string_view::npos || noun.find('<') != std::string_view::npos) {
        fail(true);
        continue;
      }
      c.pos = at;
    }

    std::size_t issues_before = result.issues.size();
    if (!c.match_ci_words("at ")) { fail(true); continue; }
    c.skip_ws();
    if (!detail::parse_point_span(c, action.pick, &result.issues)) {
      issue_logged_before = result.issues.size() > issues_before;
      if (issue_logged_before) scan = c.pos; else fail(true);
      continue;
    }
    c.skip_ws();
    if (!c.match(",")) { fail(true); continue; }
    if (!c.match_ci_words(" rotate ")) { fail(true); continue; }
    if (!c.match("<r>")) { fail(true); continue; }
    c.skip_ws();
    if (!c.match("[")) { fail(true); continue; }
    c.skip_ws();
    long long rot = 0;
    if (!c.parse_int(rot)) {
      result.issues.push_back({c.pos, "malformed number in <r> rotation"});
      scan = c.pos;
      continue;
    }
    c.skip_ws();
    if (!c.match("]")) {
      result.issues.push_back({c.pos, "malformed number in <r> rotation"});
      scan = c.pos;
      continue;
    }
    c.skip_ws();
    if (!c.match("</r>")) { fail(true); continue; }
    if (!c.match_ci_words(" degrees")) { fail(true); continue; }
    c.skip_ws();
    if (!c.match(",")) { fail(true); continue; }
    if (!c.match_ci_words(" and drop it at ")) { fail(true); continue; }
    c.skip_ws();
    if (!detail::parse_point_span(c, action.place, &result.issues)) {
      issue_logged_before = result.issues.size() > issues_before;
      if (issue_logged_before) scan = c.pos; else fail(true);
      continue;
    }

    action.rotation_deg = static_cast<int>(rot);
    if (action.pick.x < 0 || action.pick.x > 1 || action.pick.y < 0 || action.pick.y > 1 ||
        action.place.x < 0 || action.place.x > 1 || action.place.y < 0 || action.place.y > 1) {
      result.issues.push_back({hit, "coordinate out of [0,1]"});
      scan = c.pos;
      continue;
    }
    if (rot < kRotationMinDeg || rot > kRotationMaxDeg) {
      result.issues.push_back({hit, "rotation out of [-359,359]"});
      scan = c.pos;
      continue;
    }

    result.actions.push_back(std::move(action));
    scan = c.pos;
  }
  return result;
}

// ---------------------------------------------------------------------------
// scene text

// "<scene>" + space-joined "name at bbox." clauses + "</scene>".
// Object rotation is not part of the grammar and does not survive a
// round-trip through text.
inline std::string encode_scene(const SceneState& scene) {
  std::string out = "<scene>";
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    if (i > 0) out += " ";
    out += format_object_clause(scene.objects[i]);
    out += ".";
  }
  out += "</scene>";
  return out;
}

namespace detail {

// One "name at bbox." clause. Returns false without issue when the cursor is
// not at a clause; reports an issue on a malformed clause body.
inline bool parse_object_clause(Cursor& c, ObjectInstance& out, std::vector<ParseIssue>& issues) {
  std::string name;
  if (!parse_name_span(c, name)) return false;
  out.name = std::move(name);
  if (!c.match_ci_words(" at ")) {
    issues.push_back({c.pos, "expected ' at ' after object name"});
    return false;
  }
  c.skip_ws();
  if (!c.match("<b>")) {
    issues.push_back({c.pos, "expected <b> bounding box"});
    return false;
  }
  c.skip_ws();
  auto num = [&](double& v, const char* what) {
    if (!c.parse_number(v)) {
      issues.push_back({c.pos, std::string("malformed number in ") + what});
      return false;
    }
    return true;
  };
  if (!c.match("(")) { issues.push_back({c.pos, "expected '(' in bounding box"}); return false; }
  c.skip_ws();
  if (!num(out.bbox.center.x, "bounding box center")) return false;
  c.skip_ws();
  if (!c.match(",")) { issues.push_back({c.pos, "expected ',' in bounding box"}); return false; }
  c.skip_ws();
  if (!num(out.bbox.center.y, "bounding box center")) return false;
  c.skip_ws();
  if (!c.match(")")) { issues.push_back({c.pos, "expected ')' in bounding box"}); return false; }
  c.skip_ws();
  if (!c.match(",")) { issues.push_back({c.pos, "expected ',' before {w, h}"}); return false; }
  c.skip_ws();
  if (!c.match("{")) { issues.push_back({c.pos, "expected '{' in bounding box"}); return false; }
  c.skip_ws();
  if (!num(out.bbox.w, "bounding box size")) return false;
  c.skip_ws();
  if (!c.match(",")) { issues.push_back({c.pos, "expected ',' in {w, h}"}); return false; }
  c.skip_ws();
  if (!num(out.bbox.h, "bounding box size")) return false;
  c.skip_ws();
  if (!c.match("}")) { issues.push_back({c.pos, "expected '}' in bounding box"}); return false; }
  c.skip_ws();
  if (!c.match("</b>")) { issues.push_back({c.pos, "unterminated <b> decorator"}); return false; }
  c.skip_ws();
  if (!c.match(".")) { issues.push_back({c.pos, "expected '.' after clause"}); return false; }
  return true;
}

}  // namespace detail

// Parses bare "name at bbox." clauses (a localization answer is one clause).
inline SceneParseResult parse_object_clauses(std::string_view text) {
  SceneParseResult result;
  SceneState scene;
  detail::Cursor c{text, 0};
  c.skip_ws();
  while (!c.done()) {
    ObjectInstance obj;
    if (!detail::parse_object_clause(c, obj, result.issues)) {
      return result;  // issues already carry the offset
    }
    scene.objects.push_back(std::move(obj));
    c.skip_ws();
  }
  if (scene.objects.empty()) {
    result.issues.push_back({0, "no object clause found"});
    return result;
  }
  result.scene = std::move(scene);
  return result;
}

// Parses the first "<scene>...</scene>" block in the text.
inline SceneParseResult parse_scene(std::string_view text) {
  SceneParseResult result;
  std::size_t open = text.find("<scene>");
  if (open == std::string_view::npos) {
    result.issues.push_back({0, "no <scene> block found"});
    return result;
  }
  std::size_t close = text.find("</scene>", open);
  if (close == std::string_view::npos) {
    result.issues.push_back({open, "unterminated <scene> block"});
    return result;
  }

  SceneState scene;
  detail::Cursor c{text, open + 7};
  c.skip_ws();
  while (c.pos < close) {
    ObjectInstance obj;
    if (!detail::parse_object_clause(c, obj, result.issues)) return result;
    scene.objects.push_back(std::move(obj));
    c.skip_ws();
  }
  result.scene = std::move(scene);
  return result;
}

// Every <scene> block in the text, in order. Blocks that fail to parse
// surface through `issues` of the per-block result.
inline std::vector<SceneParseResult> parse_all_scenes(std::string_view text) {
  std::vector<SceneParseResult> out;
  std::size_t from = 0;
  while (true) {
    std::size_t open = text.find("<scene>", from);
    if (open == std::string_view::npos) break;
    out.push_back(parse_scene(text.substr(open)));
    std::size_t close = text.find("</scene>", open);
    if (close == std::string_view::npos) break;
    from = close + 8;
  }
  return out;
}

// ---------------------------------------------------------------------------
// relation sentences

struct RelationText {
  std::string text;
  double dx = 0.0;   // unrounded payload
  double dy = 0.0;
  double euclid = 0.0;
  std::string d_span;  // exactly as embedded, e.g. "<d>(-0.246, 0.000)</d>"
  std::string e_span;  // e.g. "<e>0.246</e>"
};

namespace detail {

inline std::string distance_span(double dx, double dy) {
  return "<d>(" + format_decimal3(dx) + ", " + format_decimal3(dy) + ")</d>";
}

inline std::string euclid_span(double e) { return "<e>" + format_decimal3(e) + "</e>"; }

// Direction words from the unrounded signs; exact zero omits the axis word.
inline std::string direction_words(double dx, double dy) {
  std::string x_word = dx < 0 ? "left" : (dx > 0 ? "right" : "");
  std::string y_word = dy < 0 ? "top" : (dy > 0 ? "bottom" : "");
  if (!x_word.empty() && !y_word.empty()) return x_word + " and " + y_word;
  if (!x_word.empty()) return x_word;
  if (!y_word.empty()) return y_word;
  return "at the same position";
}

}  // namespace detail

// Where `ego` sits relative to `ref`, with center distances. d = ego - ref.
inline RelationText encode_spatial_relation(const ObjectInstance& ego,
                                            const ObjectInstance& ref) {
  RelationText r;
  r.dx = ego.bbox.center.x - ref.bbox.center.x;
  r.dy = ego.bbox.center.y - ref.bbox.center.y;
  r.euclid = std::hypot(r.dx, r.dy);
  r.d_span = detail::distance_span(r.dx, r.dy);
  r.e_span = detail::euclid_span(r.euclid);
  r.text = name_span(ego.name) + " is " + detail::direction_words(r.dx, r.dy) + " from " +
           name_span(ref.name) + " with 2d center distance (x,y) of " + r.d_span +
           " and euclidean center distance of " + r.e_span + ".";
  return r;
}

// How the ego-ref distance changes between two timestamps. The payload is the
// per-axis change of (ego - ref) and the change of the euclidean distance.
inline RelationText encode_temporal_relation(const ObjectInstance& ego0,
                                             const ObjectInstance& ref0,
                                             const ObjectInstance& ego1,
                                             const ObjectInstance& ref1) {
  double d0x = ego0.bbox.center.x - ref0.bbox.center.x;
  double d0y = ego0.bbox.center.y - ref0.bbox.center.y;
  double d1x = ego1.bbox.center.x - ref1.bbox.center.x;
  double d1y = ego1.bbox.center.y - ref1.bbox.center.y;

  RelationText r;
  r.dx = d1x - d0x;
  r.dy = d1y - d0y;
  r.euclid = std::hypot(d1x, d1y) - std::hypot(d0x, d0y);
  r.d_span = detail::distance_span(r.dx, r.dy);
  r.e_span = detail::euclid_span(r.euclid);

  long long rounded = std::llround(r.euclid * 1000.0);
  const char* verb = rounded > 0 ? "moves far away from"
                   : rounded < 0 ? "gets closer to"
                                 : "stays the same distance from";

  r.text = name_span(ref1.name) + " " + verb + " " + name_span(ego1.name) +
           ". 2d center distance (x,y) of " + name_span(ego1.name) + " from " +
           name_span(ref1.name) + " changes by " + r.d_span +
           " and Euclidean center distance between them " + r.e_span + ".";
  return r;
}

enum class RelationKind { spatial, temporal };

struct RelationRecord {
  RelationKind kind = RelationKind::spatial;
  std::string ego_name;
  std::string ref_name;
  double dx = 0.0;  // as printed (three decimals)
  double dy = 0.0;
  double euclid = 0.0;
  std::string descriptor;  // direction words (spatial) or verb phrase (temporal)
};

struct RelationParseResult {
  std::optional<RelationRecord> relation;
  std::vector<ParseIssue> issues;
  bool ok() const { return relation.has_value(); }
};

// Parses one relation sentence of either kind.
inline RelationParseResult parse_relation(std::string_view text) {
  RelationParseResult result;
  auto fail = [&](std::size_t off, std::string msg) {
    result.issues.push_back({off, std::move(msg)});
    return result;
  };

  std::size_t d_open = text.find("<d>(");
  if (d_open == std::string_view::npos) return fail(0, "no <d> span found");
  std::size_t e_open = text.find("<e>");
  if (e_open == std::string_view::npos) return fail(0, "no <e> span found");

  RelationRecord rec;
  {
    detail::Cursor c{text, d_open + 4};
    c.skip_ws();
    if (!c.parse_number(rec.dx)) return fail(c.pos, "malformed number in <d> span");
    c.skip_ws();
    if (!c.match(",")) return fail(c.pos, "expected ',' in <d> span");
    c.skip_ws();
    if (!c.parse_number(rec.dy)) return fail(c.pos, "malformed number in <d> span");
    c.skip_ws();
    if (!c.match(")")) return fail(c.pos, "expected ')' in <d> span");
    c.skip_ws();
    if (!c.match("</d>")) return fail(c.pos, "unterminated <d> span");
  }
  {
    detail::Cursor c{text, e_open + 3};
    c.skip_ws();
    if (!c.parse_number(rec.euclid)) return fail(c.pos, "malformed number in <e> span");
    c.skip_ws();
    if (!c.match("</e>")) return fail(c.pos, "unterminated <e> span");
  }

  bool temporal = text.find("changes by") != std::string_view::npos;
  rec.kind = temporal ? RelationKind::temporal : RelationKind::spatial;

  // The sentence is located by its leading <p> span. A <p> that does not
  // continue as a relation sentence is skipped, so the sentence may sit
  // inside a larger turn.
  for (std::size_t anchor = 0;; anchor += 3) {
    anchor = text.find("<p>", anchor);
    if (anchor == std::string_view::npos || anchor > d_open)
      return fail(0, "expected leading <p> name");

    detail::Cursor c{text, anchor};
    std::string first;
    if (!detail::parse_name_span(c, first)) continue;

    if (temporal) {
      // "<p>ref</p> VERB <p>ego</p>. 2d center distance (x,y) of ..."
      std::size_t verb_from = c.pos;
      std::size_t ego_at = text.find("<p>", c.pos);
      if (ego_at == std::string_view::npos || ego_at > d_open) continue;
      std::string_view verb = text.substr(verb_from, ego_at - verb_from);
      while (!verb.empty() && detail::is_ws(verb.front())) verb.remove_prefix(1);
      while (!verb.empty() && detail::is_ws(verb.back())) verb.remove_suffix(1);
      if (verb.empty() || verb.find('<') != std::string_view::npos) continue;
      detail::Cursor after{text, ego_at};
      std::string ego;
      if (!detail::parse_name_span(after, ego)) continue;
      after.skip_ws();
      if (!after.match(".")) continue;
      if (!after.match_ci_words(" 2d center distance")) continue;
      rec.ref_name = std::move(first);
      rec.ego_name = std::move(ego);
      rec.descriptor.assign(verb);
      break;
    }

    // "<p>ego</p> is WORDS from <p>ref</p> with ..."
    if (!c.match_ci_words(" is ")) continue;
    std::size_t words_from = c.pos;
    std::size_t from_at = detail::find_ci(text, " from <p>", c.pos);
    if (from_at == std::string_view::npos || from_at > d_open) continue;
    std::string_view words = text.substr(words_from, from_at - words_from);
    if (words.find('<') != std::string_view::npos) continue;
    detail::Cursor after{text, from_at + 6};
    std::string ref;
    if (!detail::parse_name_span(after, ref)) continue;
    if (!after.match_ci_words(" with 2d center distance")) continue;
    rec.ego_name = std::move(first);
    rec.ref_name = std::move(ref);
    rec.descriptor.assign(words);
    break;
  }

  result.relation = std::move(rec);
  return result;
}

// ---------------------------------------------------------------------------
// discrete action tokens

// Actions can alternatively be rendered as five discrete tokens: each element
// of (pick.x, pick.y, rotation, place.x, place.y) is normalized to [0, 1],
// quantized into 256 bins, and mapped to token ids 31000..31255. Rotation
// normalizes via (r + 359) / 718.
constexpr int kTokenBase = 31000;
constexpr int kTokenBins = 256;

struct TokenAction {
  std::array<int, 5> tokens{};
  bool operator==(const TokenAction&) const = default;
};

inline int quantize_unit(double v) {
  int bin = static_cast<int>(std::floor(v * kTokenBins));
  if (bin < 0) bin = 0;
  if (bin > kTokenBins - 1) bin = kTokenBins - 1;
  return kTokenBase + bin;
}

inline double dequantize_unit(int token) {
  if (token < kTokenBase || token > kTokenBase + kTokenBins - 1)
    throw std::out_of_range("action token " + std::to_string(token) + " outside [31000,31255]");
  return (static_cast<double>(token - kTokenBase) + 0.5) / kTokenBins;
}

inline TokenAction rt2_encode(const Action& a) {
  TokenAction t;
  t.tokens[0] = quantize_unit(a.pick.x);
  t.tokens[1] = quantize_unit(a.pick.y);
  t.tokens[2] = quantize_unit((a.rotation_deg + 359.0) / 718.0);
  t.tokens[3] = quantize_unit(a.place.x);
  t.tokens[4] = quantize_unit(a.place.y);
  return t;
}

// Decodes to bin centers; rotation lands on the nearest integer degree.
inline Action rt2_decode(const TokenAction& t) {
  Action a;
  a.pick.x = dequantize_unit(t.tokens[0]);
  a.pick.y = dequantize_unit(t.tokens[1]);
  a.rotation_deg = static_cast<int>(std::llround(dequantize_unit(t.tokens[2]) * 718.0 - 359.0));
  a.place.x = dequantize_unit(t.tokens[3]);
  a.place.y = dequantize_unit(t.tokens[4]);
  return a;
}

// Textual surrogate for one token: "⟨act_31000⟩". Tokens of an action are
// concatenated without separators.
inline std::string render_token(int token) {
  return "⟨act_" + std::to_string(token) + "⟩";
}

inline std::string rt2_render(const TokenAction& t) {
  std::string out;
  for (int tok : t.tokens) out += render_token(tok);
  return out;
}

struct TokenParseResult {
  std::vector<TokenAction> actions;
  std::vector<ParseIssue> issues;
};

// Collects ⟨act_N⟩ surrogates in order and groups them in fives.
inline TokenParseResult parse_rt2_surrogates(std::string_view text) {
  TokenParseResult result;
  std::vector<int> ids;
  std::size_t from = 0;
  const std::string_view open = "⟨act_";
  while (true) {
    std::size_t hit = text.find(open, from);
    if (hit == std::string_view::npos) break;
    detail::Cursor c{text, hit + open.size()};
    long long id = 0;
    if (!c.parse_int(id) || !c.match("⟩")) {
      result.issues.push_back({hit, "malformed action token"});
      from = hit + open.size();
      continue;
    }
    if (id < kTokenBase || id > kTokenBase + kTokenBins - 1) {
      result.issues.push_back({hit, "action token outside [31000,31255]"});
      from = c.pos;
      continue;
    }
    ids.push_back(static_cast<int>(id));
    from = c.pos;
  }
  std::size_t full = ids.size() / 5;
  for (std::size_t g = 0; g < full; ++g) {
    TokenAction t;
    for (std::size_t k = 0; k < 5; ++k) t.tokens[k] = ids[g * 5 + k];
    result.actions.push_back(t);
  }
  if (ids.size() % 5 != 0)
    result.issues.push_back({text.size(), "trailing action token group of size " +
                                              std::to_string(ids.size() % 5)});
  return result;
}

}  // namespace tabletalk
