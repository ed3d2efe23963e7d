#pragma once

// Deterministic tabletop simulator: seeded task generation, teleport-kinematic
// step dynamics, success judges, an expert policy, and trajectory recording.
// No physics; an action moves the picked object so its center equals the place
// point. That keeps expert rollouts provably successful and replayable.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tabletalk/core.hpp"
#include "tabletalk/pixmap.hpp"
#include "tabletalk/rng.hpp"

namespace tabletalk {

struct CatalogEntry {
  std::string name;
  double w = 0.1;
  double h = 0.1;
};

// Movables are pickable; containers serve as placement destinations and are
// large enough to fully contain any movable.
struct ObjectCatalog {
  std::vector<CatalogEntry> movables;
  std::vector<CatalogEntry> containers;
};

inline const ObjectCatalog& default_catalog() {
  static const ObjectCatalog catalog = {
      {
          {"red letter V", 0.094, 0.156},
          {"green paisley letter V", 0.094, 0.156},
          {"rainbow letter V", 0.094, 0.156},
          {"rainbow letter T", 0.102, 0.188},
          {"red letter T", 0.102, 0.188},
          {"green paisley block", 0.094, 0.148},
          {"blue block", 0.094, 0.148},
          {"yellow stripe block", 0.094, 0.148},
          {"purple heart", 0.086, 0.172},
          {"polka dot heart", 0.086, 0.172},
          {"red flower", 0.090, 0.180},
          {"blue flower", 0.090, 0.180},
          {"rainbow star", 0.098, 0.195},
          {"yellow stripe star", 0.098, 0.195},
          {"blueberry", 0.058, 0.125},
          {"cupcake", 0.088, 0.170},
      },
      {
          {"wooden bowl", 0.195, 0.328},
          {"blue pan", 0.210, 0.340},
          {"silver tray", 0.230, 0.360},
          {"purple container", 0.200, 0.330},
      },
  };
  return catalog;
}

struct TaskRoles {
  std::string dragged;             // moved object (rotate: the rotated object)
  std::string base;                // destination object
  std::vector<std::string> stack;  // bottom to top; stack[0] never moves
  int target_angle = 0;
  NormPoint initial_center;        // rotate: center at generation time
};

struct EnvState {
  SceneState scene;
  TaskSpec task;
  std::map<std::string, RefFrame> ref_frames;
  TaskRoles roles;
  int step_count = 0;
  std::uint64_t rng_seed = 0;
  int level = 1;
  std::vector<std::string> z_order;  // back to front; last is topmost
};

struct EpisodeResult {
  bool success = false;
  int steps_taken = 0;
  std::optional<std::string> failure_reason;
};

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Judge tolerances; artifact constants, not tuned.
inline constexpr double kContainmentThreshold = 0.5;  // strictly more than half
inline constexpr int kRotationToleranceDeg = 15;
inline constexpr double kRotationDriftLimit = 0.05;
inline constexpr double kStackAlignLimit = 0.05;

namespace detail {

inline const ObjectInstance* find_object(const SceneState& scene, const std::string& name) {
  for (const ObjectInstance& o : scene.objects)
    if (o.name == name) return &o;
  return nullptr;
}

inline ObjectInstance* find_object(SceneState& scene, const std::string& name) {
  for (ObjectInstance& o : scene.objects)
    if (o.name == name) return &o;
  return nullptr;
}

inline bool contains_point(const BBox& box, NormPoint p) {
  return p.x >= box.x_min() && p.x <= box.x_max() && p.y >= box.y_min() && p.y <= box.y_max();
}

inline int circular_diff_deg(int a, int b) {
  int d = std::abs(a - b) % 360;
  return std::min(d, 360 - d);
}

// Uniform center position honoring margins; level 1 snaps to a 1/32 grid so
// repeated runs draw from a finite pool of "seen" placements.
inline NormPoint sample_center(Rng& rng, const CatalogEntry& entry, int level, double y_min,
                               double y_max) {
  double x_lo = entry.w / 2, x_hi = 1.0 - entry.w / 2;
  double y_lo = std::max(entry.h / 2, y_min), y_hi = std::min(1.0 - entry.h / 2, y_max);
  if (y_lo > y_hi) throw GenerationError("placement band too narrow for " + entry.name);
  if (level == 1) {
    const int grid = 32;
    int kx_lo = static_cast<int>(std::ceil(x_lo * grid));
    int kx_hi = static_cast<int>(std::floor(x_hi * grid));
    int ky_lo = static_cast<int>(std::ceil(y_lo * grid));
    int ky_hi = static_cast<int>(std::floor(y_hi * grid));
    return {static_cast<double>(rng.next_int(kx_lo, kx_hi)) / grid,
            static_cast<double>(rng.next_int(ky_lo, ky_hi)) / grid};
  }
  return {x_lo + rng.next_double() * (x_hi - x_lo), y_lo + rng.next_double() * (y_hi - y_lo)};
}

inline bool overlaps_any(const SceneState& scene, const BBox& box) {
  for (const ObjectInstance& o : scene.objects)
    if (overlap_area(o.bbox, box) > 0.0) return true;
  return false;
}

inline RefFrame single_object_frame(const std::string& frame_id, const ObjectInstance& obj) {
  RefFrame f;
  f.frame_id = frame_id;
  f.kind = FrameKind::single_object;
  f.content.objects.push_back(obj);
  return f;
}

inline RefFrame scene_frame(const std::string& frame_id, const SceneState& scene) {
  RefFrame f;
  f.frame_id = frame_id;
  f.kind = FrameKind::multi_object_scene;
  f.content = scene;
  return f;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// dynamics

// Teleport kinematics: the topmost object whose box contains the pick point
// moves so its center equals the place point (clamped to the table) and its
// rotation advances by the action's angle, wrapped to [-359, 359]. A pick that
// hits nothing is a legal no-op; only step_count advances.
inline EnvState step(EnvState env, const Action& a) {
  env.step_count += 1;
  for (auto it = env.z_order.rbegin(); it != env.z_order.rend(); ++it) {
    ObjectInstance* obj = detail::find_object(env.scene, *it);
    if (!obj || !detail::contains_point(obj->bbox, a.pick)) continue;
    obj->bbox.center = {std::clamp(a.place.x, 0.0, 1.0), std::clamp(a.place.y, 0.0, 1.0)};
    obj->rotation_deg = (obj->rotation_deg + a.rotation_deg) % 360;
    std::string name = *it;
    env.z_order.erase(std::next(it).base());
    env.z_order.push_back(name);
    break;
  }
  return env;
}

inline EnvState step_noop(EnvState env) {
  env.step_count += 1;
  return env;
}

// ---------------------------------------------------------------------------
// judges

inline EpisodeResult judge(const EnvState& env) {
  EpisodeResult result;
  result.steps_taken = env.step_count;
  auto fail = [&](std::string why) {
    result.success = false;
    result.failure_reason = std::move(why);
    return result;
  };

  switch (env.task.task_kind) {
    case TaskKind::place_into:
    case TaskKind::put_on_top: {
      const ObjectInstance* obj = detail::find_object(env.scene, env.roles.dragged);
      const ObjectInstance* dst = detail::find_object(env.scene, env.roles.base);
      if (!obj || !dst) return fail("role object missing from scene");
      double ratio = overlap_area(obj->bbox, dst->bbox) / obj->bbox.area();
      if (ratio > kContainmentThreshold) {
        result.success = true;
        return result;
      }
      return fail("containment ratio " + std::to_string(ratio) + " not above 0.5");
    }
    case TaskKind::rotate: {
      const ObjectInstance* obj = detail::find_object(env.scene, env.roles.dragged);
      if (!obj) return fail("role object missing from scene");
      int off = detail::circular_diff_deg(obj->rotation_deg, env.roles.target_angle);
      if (off > kRotationToleranceDeg)
        return fail("rotation off by " + std::to_string(off) + " degrees");
      double drift = std::hypot(obj->bbox.center.x - env.roles.initial_center.x,
                                obj->bbox.center.y - env.roles.initial_center.y);
      if (drift > kRotationDriftLimit)
        return fail("center drifted by " + std::to_string(drift));
      result.success = true;
      return result;
    }
    case TaskKind::stack_order: {
      const ObjectInstance* below = detail::find_object(env.scene, env.roles.stack[0]);
      if (!below) return fail("role object missing from scene");
      double base_x = below->bbox.center.x;
      for (std::size_t i = 1; i < env.roles.stack.size(); ++i) {
        const ObjectInstance* obj = detail::find_object(env.scene, env.roles.stack[i]);
        if (!obj) return fail("role object missing from scene");
        if (std::abs(obj->bbox.center.x - base_x) > kStackAlignLimit)
          return fail("\"" + obj->name + "\" not aligned with the stack base");
        if (!(obj->bbox.center.y < below->bbox.center.y))
          return fail("\"" + obj->name + "\" not above \"" + below->name + "\"");
        below = obj;
      }
      result.success = true;
      return result;
    }
    case TaskKind::other:
      return fail("task kind has no judge");
  }
  return fail("task kind has no judge");
}

// ---------------------------------------------------------------------------
// expert policy

// Next expert action, or nothing when the judge is already satisfied. Pick and
// place points are bounding-box centroids; rotation replays the target angle.
inline std::optional<Action> oracle_policy(const EnvState& env) {
  if (judge(env).success) return std::nullopt;

  switch (env.task.task_kind) {
    case TaskKind::place_into:
    case TaskKind::put_on_top: {
      const ObjectInstance* obj = detail::find_object(env.scene, env.roles.dragged);
      const ObjectInstance* dst = detail::find_object(env.scene, env.roles.base);
      if (!obj || !dst) return std::nullopt;
      return Action{obj->bbox.center, dst->bbox.center, 0, obj->name, std::nullopt};
    }
    case TaskKind::rotate: {
      const ObjectInstance* obj = detail::find_object(env.scene, env.roles.dragged);
      if (!obj) return std::nullopt;
      return Action{obj->bbox.center, obj->bbox.center, env.roles.target_angle, obj->name,
                    std::nullopt};
    }
    case TaskKind::stack_order: {
      const ObjectInstance* below = detail::find_object(env.scene, env.roles.stack[0]);
      if (!below) return std::nullopt;
      for (std::size_t i = 1; i < env.roles.stack.size(); ++i) {
        const ObjectInstance* obj = detail::find_object(env.scene, env.roles.stack[i]);
        if (!obj) return std::nullopt;
        bool placed = std::abs(obj->bbox.center.x - below->bbox.center.x) <= kStackAlignLimit &&
                      obj->bbox.center.y < below->bbox.center.y;
        if (!placed) {
          NormPoint place = {below->bbox.center.x,
                             below->bbox.center.y - below->bbox.h / 2 - obj->bbox.h / 2};
          return Action{obj->bbox.center, place, 0, obj->name, std::nullopt};
        }
        below = obj;
      }
      return std::nullopt;
    }
    case TaskKind::other:
      return std::nullopt;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// task generation

namespace detail {

// Global catalog index: movables first, then containers.
inline std::size_t catalog_index(const ObjectCatalog& catalog, const std::string& name) {
  for (std::size_t i = 0; i < catalog.movables.size(); ++i)
    if (catalog.movables[i].name == name) return i;
  for (std::size_t i = 0; i < catalog.containers.size(); ++i)
    if (catalog.containers[i].name == name) return catalog.movables.size() + i;
  throw std::invalid_argument("object not in catalog: " + name);
}

// Level 3 holds out the object combinations whose index sum is divisible by
// three; levels 1 and 2 use the rest.
inline bool combo_matches_level(const ObjectCatalog& catalog,
                                const std::vector<CatalogEntry>& chosen, int level) {
  std::size_t sum = 0;
  for (const CatalogEntry& e : chosen) sum += catalog_index(catalog, e.name);
  return level == 3 ? sum % 3 == 0 : sum % 3 != 0;
}

inline std::vector<CatalogEntry> draw_distinct(const std::vector<CatalogEntry>& pool,
                                               std::size_t count, Rng& rng) {
  std::vector<CatalogEntry> out;
  for (std::size_t i : sample_indices(pool.size(), count, rng)) out.push_back(pool[i]);
  deterministic_shuffle(out, rng);
  return out;
}

inline ObjectInstance place_object(EnvState& env, const CatalogEntry& entry, Rng& rng,
                                   double y_min = 0.0, double y_max = 1.0) {
  for (int attempt = 0; attempt < 500; ++attempt) {
    NormPoint center = sample_center(rng, entry, env.level, y_min, y_max);
    BBox box{center, entry.w, entry.h};
    if (overlaps_any(env.scene, box)) continue;
    ObjectInstance obj{entry.name, box, 0};
    env.scene.objects.push_back(obj);
    env.z_order.push_back(entry.name);
    return obj;
  }
  throw GenerationError("cannot place \"" + entry.name + "\" without overlap");
}

}  // namespace detail

// Seeded scene and task construction. The same (kind, seed, level) triple
// always yields the same EnvState; levels 1 and 2 draw from one pool of object
// combinations and level 3 from a held-out pool.
inline EnvState generate_task(TaskKind kind, const ObjectCatalog& catalog, std::uint64_t seed,
                              int level = 1) {
  if (kind == TaskKind::other) throw std::invalid_argument("cannot generate task kind: other");
  if (level < 1 || level > 3) throw std::invalid_argument("level must be 1, 2, or 3");
  if (catalog.movables.size() < 4 || catalog.containers.empty())
    throw GenerationError("catalog too small for task generation");

  Rng rng(seed, std::string("task/") + to_string(kind) + "/L" + std::to_string(level));
  EnvState env;
  env.rng_seed = seed;
  env.level = level;
  env.task.task_kind = kind;

  auto draw_combo = [&](std::size_t movable_count, bool with_container) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      std::vector<CatalogEntry> chosen = detail::draw_distinct(catalog.movables, movable_count, rng);
      if (with_container) {
        std::size_t ci = rng.next_below(catalog.containers.size());
        chosen.push_back(catalog.containers[ci]);
      }
      if (detail::combo_matches_level(catalog, chosen, level)) return chosen;
    }
    throw GenerationError("no object combination matches the level constraint");
  };

  auto text = [](std::string s) { return TaskSegment::text(std::move(s)); };
  auto frame = [](std::string id) { return TaskSegment::frame(std::move(id)); };

  switch (kind) {
    case TaskKind::place_into:
    case TaskKind::put_on_top: {
      // chosen: src movable, two distractors, container last.
      std::vector<CatalogEntry> chosen = draw_combo(3, true);
      ObjectInstance src = detail::place_object(env, chosen[0], rng);
      detail::place_object(env, chosen[1], rng);
      detail::place_object(env, chosen[2], rng);
      ObjectInstance dst = detail::place_object(env, chosen[3], rng);
      env.roles.dragged = src.name;
      env.roles.base = dst.name;
      env.ref_frames["dragged_obj"] = detail::single_object_frame("dragged_obj", src);
      env.ref_frames["base_obj"] = detail::single_object_frame("base_obj", dst);
      const char* joiner = kind == TaskKind::place_into ? " into " : " on top of ";
      env.task.segments = {text("Put "), frame("dragged_obj"), text(joiner), frame("base_obj"),
                           text(".")};
      break;
    }
    case TaskKind::rotate: {
      std::vector<CatalogEntry> chosen = draw_combo(3, false);
      ObjectInstance target = detail::place_object(env, chosen[0], rng);
      detail::place_object(env, chosen[1], rng);
      detail::place_object(env, chosen[2], rng);
      int magnitude = rng.next_int(kRotationToleranceDeg + 1, 180);
      env.roles.target_angle = rng.next_bool() ? magnitude : -magnitude;
      env.roles.dragged = target.name;
      env.roles.initial_center = target.bbox.center;
      env.ref_frames["target_obj"] = detail::single_object_frame("target_obj", target);
      env.task.segments = {text("Rotate the "), frame("target_obj"),
                           text(" by " + std::to_string(env.roles.target_angle) + " degrees.")};
      break;
    }
    case TaskKind::stack_order: {
      std::vector<CatalogEntry> chosen;
      for (int attempt = 0;; ++attempt) {
        chosen = draw_combo(3, false);
        bool short_enough = true;
        for (const CatalogEntry& e : chosen) short_enough &= e.h <= 0.2;
        if (short_enough) break;
        if (attempt >= 1000) throw GenerationError("no stackable combination found");
      }
      // Lower band keeps room above for the finished tower; distinct columns
      // keep the reference frames readable.
      for (int attempt = 0;; ++attempt) {
        EnvState trial = env;
        bool ok = true;
        try {
          for (const CatalogEntry& e : chosen) detail::place_object(trial, e, rng, 0.6, 1.0);
        } catch (const GenerationError&) {
          ok = false;
        }
        if (ok) {
          for (std::size_t i = 0; i < 3 && ok; ++i)
            for (std::size_t j = i + 1; j < 3; ++j)
              if (std::abs(trial.scene.objects[i].bbox.center.x -
                           trial.scene.objects[j].bbox.center.x) <= 0.06) {
                ok = false;
                break;
              }
        }
        if (ok) {
          env = std::move(trial);
          break;
        }
        if (attempt >= 500) throw GenerationError("cannot lay out stack columns");
      }
      for (const ObjectInstance& o : env.scene.objects) env.roles.stack.push_back(o.name);

      // Reference frames are staged scenes along the expert plan.
      EnvState staged = env;
      env.ref_frames["frame_0"] = detail::scene_frame("frame_0", staged.scene);
      for (int i = 1; i <= 2; ++i) {
        std::optional<Action> a = oracle_policy(staged);
        if (!a) throw GenerationError("stack plan ended early");
        staged = step(staged, *a);
        env.ref_frames["frame_" + std::to_string(i)] =
            detail::scene_frame("frame_" + std::to_string(i), staged.scene);
      }
      env.task.segments = {text("Stack objects in this order "), frame("frame_0"), text(" "),
                           frame("frame_1"), text(" "), frame("frame_2"), text(".")};
      break;
    }
    case TaskKind::other:
      break;
  }
  return env;
}

// ---------------------------------------------------------------------------
// recording

struct RecorderOptions {
  int level = 1;
  int max_steps = 8;
  bool write_images = false;
  std::filesystem::path image_dir;  // used when write_images is set
  std::string ref_prefix = "images/";
  const ObjectCatalog* catalog = nullptr;  // defaults to default_catalog()
};

namespace detail {

inline std::string emit_observation_image(const SceneState& scene, const RecorderOptions& opt) {
  Pixmap img = render_scene(scene);
  std::string name = scene_image_name(img);
  if (opt.write_images) {
    std::filesystem::create_directories(opt.image_dir);
    std::filesystem::path target = opt.image_dir / name;
    if (!std::filesystem::exists(target)) {
      // Per-thread temp name, then an atomic rename; concurrent writers of the
      // same content land on identical bytes either way.
      std::uint64_t nonce = fnv1a64(name) ^
                            std::hash<std::thread::id>{}(std::this_thread::get_id());
      std::filesystem::path tmp = opt.image_dir / (name + ".tmp-" + hash_hex(nonce));
      write_ppm(img, tmp);
      std::filesystem::rename(tmp, target);
    }
  }
  return opt.ref_prefix + name;
}

}  // namespace detail

// Expert rollout for (kind, seed): runs oracle_policy to completion, rendering
// every observation, and returns a trajectory that passes validate_trajectory.
inline Trajectory record_trajectory(TaskKind kind, std::uint64_t seed,
                                    const RecorderOptions& opt = {}) {
  const ObjectCatalog& catalog = opt.catalog ? *opt.catalog : default_catalog();
  EnvState env = generate_task(kind, catalog, seed, opt.level);

  Trajectory t;
  t.id = std::string(to_string(kind)) + "-L" + std::to_string(opt.level) + "-s" +
         std::to_string(seed);
  t.task = env.task;
  t.ref_frames = env.ref_frames;

  for (int k = 0; k < opt.max_steps; ++k) {
    std::optional<Action> a = oracle_policy(env);
    if (!a) break;
    TrajectoryStep stepped;
    stepped.observation =
        Observation{detail::emit_observation_image(env.scene, opt), env.scene, k};
    stepped.action = *a;
    t.steps.push_back(std::move(stepped));
    env = step(env, *a);
  }
  if (!judge(env).success)
    throw std::logic_error("expert rollout did not satisfy the judge for " + t.id);
  t.final_observation = Observation{detail::emit_observation_image(env.scene, opt), env.scene,
                                    static_cast<int>(t.steps.size())};
  return t;
}

}  // namespace tabletalk
