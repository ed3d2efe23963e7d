#pragma once

// JSON encoding of the domain model plus JSONL file helpers.
//
// Wire conventions: snake_case field names matching the struct fields,
// NormPoint as a [x, y] array, BBox as {"center": [x, y], "w": w, "h": h}.
// Optional fields are omitted when absent. Emission uses insertion-ordered
// objects so files are byte-stable across runs.

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabletalk/core.hpp"

namespace tabletalk {

using Json = nlohmann::ordered_json;

// --- encoding ---------------------------------------------------------------

inline Json to_json(const NormPoint& p) { return Json::array({p.x, p.y}); }

inline Json to_json(const BBox& b) {
  return Json{{"center", to_json(b.center)}, {"w", b.w}, {"h", b.h}};
}

inline Json to_json(const ObjectInstance& o) {
  return Json{{"name", o.name}, {"bbox", to_json(o.bbox)}, {"rotation_deg", o.rotation_deg}};
}

inline Json to_json(const SceneState& s) {
  Json objs = Json::array();
  for (const ObjectInstance& o : s.objects) objs.push_back(to_json(o));
  return Json{{"objects", std::move(objs)}};
}

inline Json to_json(const Action& a) {
  Json j{{"pick", to_json(a.pick)},
         {"place", to_json(a.place)},
         {"rotation_deg", a.rotation_deg}};
  if (a.picked_object_name) j["picked_object_name"] = *a.picked_object_name;
  if (a.step_index) j["step_index"] = *a.step_index;
  return j;
}

inline Json to_json(const RefFrame& f) {
  return Json{{"frame_id", f.frame_id},
              {"kind", to_string(f.kind)},
              {"content", to_json(f.content)}};
}

inline Json to_json(const TaskSegment& s) {
  if (s.kind == TaskSegment::Kind::text) return Json{{"text", s.value}};
  return Json{{"frame", s.value}};
}

inline Json to_json(const TaskSpec& t) {
  Json segs = Json::array();
  for (const TaskSegment& s : t.segments) segs.push_back(to_json(s));
  return Json{{"segments", std::move(segs)}, {"task_kind", to_string(t.task_kind)}};
}

inline Json to_json(const Observation& o) {
  return Json{{"image_ref", o.image_ref},
              {"scene", to_json(o.scene)},
              {"timestamp", o.timestamp}};
}

inline Json to_json(const TrajectoryStep& s) {
  return Json{{"observation", to_json(s.observation)}, {"action", to_json(s.action)}};
}

inline Json to_json(const Trajectory& t) {
  Json frames = Json::object();
  for (const auto& [id, frame] : t.ref_frames) frames[id] = to_json(frame);
  Json steps = Json::array();
  for (const TrajectoryStep& s : t.steps) steps.push_back(to_json(s));
  Json j{{"id", t.id},
         {"task", to_json(t.task)},
         {"ref_frames", std::move(frames)},
         {"steps", std::move(steps)}};
  if (t.final_observation) j["final_observation"] = to_json(*t.final_observation);
  return j;
}

inline Json to_json(const Conversation& c) {
  return Json{{"id", c.id},
              {"image", c.image_ref},
              {"conversations",
               Json::array({Json{{"from", "human"}, {"value", c.human}},
                            Json{{"from", "gpt"}, {"value", c.assistant}}})}};
}

// --- decoding ---------------------------------------------------------------

namespace detail {

inline const Json& require(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw std::invalid_argument(std::string("missing field \"") + key + "\"");
  return *it;
}

}  // namespace detail

inline NormPoint point_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2)
    throw std::invalid_argument("point must be a [x, y] array");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline BBox bbox_from_json(const Json& j) {
  BBox b;
  b.center = point_from_json(detail::require(j, "center"));
  b.w = detail::require(j, "w").get<double>();
  b.h = detail::require(j, "h").get<double>();
  return b;
}

inline ObjectInstance object_from_json(const Json& j) {
  ObjectInstance o;
  o.name = detail::require(j, "name").get<std::string>();
  o.bbox = bbox_from_json(detail::require(j, "bbox"));
  o.rotation_deg = detail::require(j, "rotation_deg").get<int>();
  return o;
}

inline SceneState scene_from_json(const Json& j) {
  SceneState s;
  for (const Json& o : detail::require(j, "objects")) s.objects.push_back(object_from_json(o));
  return s;
}

inline Action action_from_json(const Json& j) {
  Action a;
  a.pick = point_from_json(detail::require(j, "pick"));
  a.place = point_from_json(detail::require(j, "place"));
  a.rotation_deg = detail::require(j, "rotation_deg").get<int>();
  if (j.contains("picked_object_name"))
    a.picked_object_name = j["picked_object_name"].get<std::string>();
  if (j.contains("step_index")) a.step_index = j["step_index"].get<int>();
  return a;
}

inline RefFrame frame_from_json(const Json& j) {
  RefFrame f;
  f.frame_id = detail::require(j, "frame_id").get<std::string>();
  f.kind = frame_kind_from_string(detail::require(j, "kind").get<std::string>());
  f.content = scene_from_json(detail::require(j, "content"));
  return f;
}

inline TaskSegment segment_from_json(const Json& j) {
  if (j.contains("text")) return TaskSegment::text(j["text"].get<std::string>());
  if (j.contains("frame")) return TaskSegment::frame(j["frame"].get<std::string>());
  throw std::invalid_argument("task segment needs \"text\" or \"frame\"");
}

inline TaskSpec task_from_json(const Json& j) {
  TaskSpec t;
  for (const Json& s : detail::require(j, "segments")) t.segments.push_back(segment_from_json(s));
  t.task_kind = task_kind_from_string(detail::require(j, "task_kind").get<std::string>());
  return t;
}

inline Observation observation_from_json(const Json& j) {
  Observation o;
  o.image_ref = detail::require(j, "image_ref").get<std::string>();
  o.scene = scene_from_json(detail::require(j, "scene"));
  o.timestamp = detail::require(j, "timestamp").get<int>();
  return o;
}

inline TrajectoryStep step_from_json(const Json& j) {
  TrajectoryStep s;
  s.observation = observation_from_json(detail::require(j, "observation"));
  s.action = action_from_json(detail::require(j, "action"));
  return s;
}

inline Trajectory trajectory_from_json(const Json& j) {
  Trajectory t;
  t.id = detail::require(j, "id").get<std::string>();
  t.task = task_from_json(detail::require(j, "task"));
  for (const auto& [key, value] : detail::require(j, "ref_frames").items())
    t.ref_frames[key] = frame_from_json(value);
  for (const Json& s : detail::require(j, "steps")) t.steps.push_back(step_from_json(s));
  if (j.contains("final_observation"))
    t.final_observation = observation_from_json(j["final_observation"]);
  return t;
}

inline Conversation conversation_from_json(const Json& j) {
  Conversation c;
  c.id = detail::require(j, "id").get<std::string>();
  c.image_ref = detail::require(j, "image").get<std::string>();
  const Json& turns = detail::require(j, "conversations");
  if (!turns.is_array() || turns.size() != 2)
    throw std::invalid_argument("conversations must hold exactly two turns");
  for (const Json& turn : turns) {
    std::string from = detail::require(turn, "from").get<std::string>();
    std::string value = detail::require(turn, "value").get<std::string>();
    if (from == "human")
      c.human = value;
    else if (from == "gpt")
      c.assistant = value;
    else
      throw std::invalid_argument("unknown turn source \"" + from + "\"");
  }
  return c;
}

// --- JSONL files ------------------------------------------------------------

struct JsonlError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

template <typename T, typename FromJson>
std::vector<T> read_jsonl(std::istream& in, FromJson&& from_json,
                          std::vector<JsonlError>* errors) {
  std::vector<T> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      Json j = Json::parse(line);
      out.push_back(from_json(j));
    } catch (const std::exception& e) {
      if (!errors) throw;
      errors->push_back({lineno, e.what()});
    }
  }
  return out;
}

inline std::vector<Trajectory> read_trajectories(const std::string& path,
                                                 std::vector<JsonlError>* errors = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_jsonl<Trajectory>(in, [](const Json& j) { return trajectory_from_json(j); },
                                errors);
}

inline std::vector<Conversation> read_conversations(const std::string& path,
                                                    std::vector<JsonlError>* errors = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_jsonl<Conversation>(in, [](const Json& j) { return conversation_from_json(j); },
                                  errors);
}

template <typename T>
void write_jsonl(std::ostream& out, const std::vector<T>& items) {
  for (const T& item : items) out << to_json(item).dump() << "\n";
}

template <typename T>
void write_jsonl_file(const std::string& path, const std::vector<T>& items) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_jsonl(out, items);
}

}  // namespace tabletalk
