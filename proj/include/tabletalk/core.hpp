#pragma once

// Domain model for tabletop manipulation trajectories and the conversation
// records distilled from them. Coordinates are image-normalized: x and y in
// [0, 1], origin at the top left corner. Full float precision is kept
// everywhere in memory; rounding happens only when values are rendered to
// text (see textcodec.hpp).

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tabletalk {

constexpr int kRotationMinDeg = -359;
constexpr int kRotationMaxDeg = 359;

struct NormPoint {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const NormPoint&) const = default;
};

// Axis-aligned box given by its center plus full width and height.
struct BBox {
  NormPoint center;
  double w = 0.0;
  double h = 0.0;
  bool operator==(const BBox&) const = default;

  double x_min() const { return center.x - w / 2.0; }
  double x_max() const { return center.x + w / 2.0; }
  double y_min() const { return center.y - h / 2.0; }
  double y_max() const { return center.y + h / 2.0; }
  double area() const { return w * h; }
};

inline double overlap_area(const BBox& a, const BBox& b) {
  double ox = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  double oy = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (ox <= 0.0 || oy <= 0.0) return 0.0;
  return ox * oy;
}

struct ObjectInstance {
  std::string name;  // "texture shape", e.g. "rainbow letter V"
  BBox bbox;
  int rotation_deg = 0;  // clockwise, in [-359, 359]
  bool operator==(const ObjectInstance&) const = default;
};

struct SceneState {
  std::vector<ObjectInstance> objects;  // order is meaningful and preserved
  bool operator==(const SceneState&) const = default;
};

// One pick-rotate-place motion. pick/place are image coordinates of the
// suction point; rotation is a clockwise angle in degrees.
struct Action {
  NormPoint pick;
  NormPoint place;
  int rotation_deg = 0;
  std::optional<std::string> picked_object_name;
  std::optional<int> step_index;  // 1-based position within the episode
  bool operator==(const Action&) const = default;
};

enum class FrameKind { single_object, multi_object_scene };

// A task-referenced frame: either a crop of one object or a full scene
// snapshot. Frames are how task text points at concrete objects.
struct RefFrame {
  std::string frame_id;
  FrameKind kind = FrameKind::single_object;
  SceneState content;
  bool operator==(const RefFrame&) const = default;
};

enum class TaskKind { place_into, rotate, put_on_top, stack_order, other };

// Task text as alternating literal text and frame slots. Rendering a slot is
// recipe-dependent (caption, caption + box, literal token, or scene block).
struct TaskSegment {
  enum class Kind { text, frame };
  Kind kind = Kind::text;
  std::string value;  // literal text, or the frame_id for frame slots
  bool operator==(const TaskSegment&) const = default;

  static TaskSegment text(std::string v) { return {Kind::text, std::move(v)}; }
  static TaskSegment frame(std::string id) { return {Kind::frame, std::move(id)}; }
};

struct TaskSpec {
  std::vector<TaskSegment> segments;
  TaskKind task_kind = TaskKind::other;
  bool operator==(const TaskSpec&) const = default;
};

struct Observation {
  std::string image_ref;  // path or content-addressed reference, never empty
  SceneState scene;
  int timestamp = 0;  // step index within the episode
  bool operator==(const Observation&) const = default;
};

struct TrajectoryStep {
  Observation observation;
  Action action;
  bool operator==(const TrajectoryStep&) const = default;
};

struct Trajectory {
  std::string id;
  TaskSpec task;
  std::map<std::string, RefFrame> ref_frames;
  std::vector<TrajectoryStep> steps;
  std::optional<Observation> final_observation;
  bool operator==(const Trajectory&) const = default;
};

// Single-image, single-turn instruction sample.
struct Conversation {
  std::string id;
  std::string image_ref;
  std::string human;      // starts with the image placeholder line
  std::string assistant;
  bool operator==(const Conversation&) const = default;
};

inline constexpr const char* kImagePlaceholder = "<image>";

inline const char* to_string(TaskKind k) {
  switch (k) {
    case TaskKind::place_into: return "place_into";
    case TaskKind::rotate: return "rotate";
    case TaskKind::put_on_top: return "put_on_top";
    case TaskKind::stack_order: return "stack_order";
    case TaskKind::other: return "other";
  }
  return "other";
}

inline TaskKind task_kind_from_string(const std::string& s) {
  if (s == "place_into") return TaskKind::place_into;
  if (s == "rotate") return TaskKind::rotate;
  if (s == "put_on_top") return TaskKind::put_on_top;
  if (s == "stack_order") return TaskKind::stack_order;
  if (s == "other") return TaskKind::other;
  throw std::invalid_argument("unknown task kind: " + s);
}

inline const char* to_string(FrameKind k) {
  return k == FrameKind::single_object ? "single_object" : "multi_object_scene";
}

inline FrameKind frame_kind_from_string(const std::string& s) {
  if (s == "single_object") return FrameKind::single_object;
  if (s == "multi_object_scene") return FrameKind::multi_object_scene;
  throw std::invalid_argument("unknown frame kind: " + s);
}

namespace detail {

inline bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

inline void check_point(const NormPoint& p, const std::string& where,
                        std::vector<std::string>& out) {
  if (!in_unit(p.x) || !in_unit(p.y)) out.push_back(where + " out of [0,1]");
}

inline void check_bbox(const BBox& b, const std::string& where,
                       std::vector<std::string>& out) {
  check_point(b.center, where + ".center", out);
  if (!in_unit(b.w)) out.push_back(where + ".w out of [0,1]");
  if (!in_unit(b.h)) out.push_back(where + ".h out of [0,1]");
}

inline void check_scene(const SceneState& s, const std::string& where,
                        std::vector<std::string>& out) {
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const ObjectInstance& obj = s.objects[i];
    std::string at = where + ".objects[" + std::to_string(i) + "]";
    if (obj.name.empty()) out.push_back(at + ".name empty");
    check_bbox(obj.bbox, at + ".bbox", out);
    if (obj.rotation_deg < kRotationMinDeg || obj.rotation_deg > kRotationMaxDeg)
      out.push_back(at + ".rotation_deg out of [-359,359]");
  }
}

}  // namespace detail

// Structural validation. Returns one message per violation; empty means valid.
// Messages name the offending field and the rule it breaks.
inline std::vector<std::string> validate_trajectory(const Trajectory& t) {
  std::vector<std::string> out;
  if (t.id.empty()) out.push_back("id empty");
  if (t.steps.empty()) out.push_back("steps empty");

  bool has_text = false;
  for (std::size_t i = 0; i < t.task.segments.size(); ++i) {
    const TaskSegment& seg = t.task.segments[i];
    std::string at = "task.segments[" + std::to_string(i) + "]";
    if (seg.kind == TaskSegment::Kind::text) {
      has_text = true;
    } else if (!t.ref_frames.count(seg.value)) {
      out.push_back(at + " references missing ref_frame \"" + seg.value + "\"");
    }
  }
  if (!has_text) out.push_back("task.segments has no text segment");

  for (const auto& [id, frame] : t.ref_frames) {
    std::string at = "ref_frames[\"" + id + "\"]";
    if (frame.frame_id != id) out.push_back(at + ".frame_id does not match its key");
    if (frame.kind == FrameKind::single_object && frame.content.objects.size() != 1)
      out.push_back(at + " single_object frame must hold exactly one object");
    detail::check_scene(frame.content, at + ".content", out);
  }

  int prev_ts = -1;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const TrajectoryStep& step = t.steps[i];
    std::string at = "steps[" + std::to_string(i) + "]";
    if (step.observation.image_ref.empty()) out.push_back(at + ".observation.image_ref empty");
    detail::check_scene(step.observation.scene, at + ".observation.scene", out);
    if (step.observation.timestamp <= prev_ts)
      out.push_back(at + ".observation.timestamp not strictly increasing");
    prev_ts = step.observation.timestamp;

    detail::check_point(step.action.pick, at + ".action.pick", out);
    detail::check_point(step.action.place, at + ".action.place", out);
    if (step.action.rotation_deg < kRotationMinDeg || step.action.rotation_deg > kRotationMaxDeg)
      out.push_back(at + ".action.rotation_deg out of [-359,359]");
    if (step.action.step_index && *step.action.step_index < 1)
      out.push_back(at + ".action.step_index must be >= 1");
  }

  if (t.final_observation) {
    if (t.final_observation->image_ref.empty()) out.push_back("final_observation.image_ref empty");
    detail::check_scene(t.final_observation->scene, "final_observation.scene", out);
    if (t.final_observation->timestamp <= prev_ts)
      out.push_back("final_observation.timestamp not strictly increasing");
  }
  return out;
}

// Actions completed strictly before step `upto` (0-based). upto may equal
// steps.size(); anything larger is a caller bug.
inline std::vector<Action> action_history(const Trajectory& t, std::size_t upto) {
  if (upto > t.steps.size())
    throw std::out_of_range("action_history: upto " + std::to_string(upto) +
                            " exceeds step count " + std::to_string(t.steps.size()));
  std::vector<Action> out;
  out.reserve(upto);
  for (std::size_t i = 0; i < upto; ++i) out.push_back(t.steps[i].action);
  return out;
}

}  // namespace tabletalk
