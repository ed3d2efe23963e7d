#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "support/fixtures.hpp"
#include "tabletalk/simenv.hpp"

using namespace tabletalk;

namespace {

const TaskKind kGeneratedKinds[] = {TaskKind::place_into, TaskKind::rotate,
                                    TaskKind::put_on_top, TaskKind::stack_order};

EnvState tiny_env(TaskKind kind = TaskKind::other) {
  EnvState env;
  env.task.task_kind = kind;
  return env;
}

void add_object(EnvState& env, const std::string& name, double cx, double cy,
                double w, double h, int rot = 0) {
  env.scene.objects.push_back(fixtures::object(name, cx, cy, w, h, rot));
  env.z_order.push_back(name);
}

const ObjectInstance& find_by_name(const SceneState& scene, const std::string& name) {
  for (const ObjectInstance& obj : scene.objects)
    if (obj.name == name) return obj;
  FAIL("object " << name << " not in scene");
  return scene.objects.front();
}

std::size_t global_index(const ObjectCatalog& catalog, const std::string& name) {
  for (std::size_t i = 0; i < catalog.movables.size(); ++i)
    if (catalog.movables[i].name == name) return i;
  for (std::size_t i = 0; i < catalog.containers.size(); ++i)
    if (catalog.containers[i].name == name) return catalog.movables.size() + i;
  FAIL("unknown object " << name);
  return 0;
}

bool on_grid(double v) {
  return std::abs(v * 32.0 - std::llround(v * 32.0)) < 1e-9;
}

std::filesystem::path temp_dir(const std::string& tag) {
  std::filesystem::path dir =
      std::filesystem::temp_directory_path() / ("tabletalk-test-" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

// --- dynamics ----------------------------------------------------------------

TEST_CASE("step teleports the picked object") {
  EnvState env = tiny_env();
  add_object(env, "cupcake", 0.3, 0.3, 0.088, 0.170);

  Action a;
  a.pick = {0.3, 0.3};
  a.place = {0.7, 0.6};
  a.rotation_deg = 90;

  EnvState next = step(env, a);
  REQUIRE(next.step_count == 1);
  REQUIRE(next.scene.objects[0].bbox.center.x == 0.7);
  REQUIRE(next.scene.objects[0].bbox.center.y == 0.6);
  REQUIRE(next.scene.objects[0].rotation_deg == 90);
  REQUIRE(env.step_count == 0);
}

TEST_CASE("step clamps the place point to the table") {
  EnvState env = tiny_env();
  add_object(env, "cupcake", 0.3, 0.3, 0.088, 0.170);

  Action a;
  a.pick = {0.3, 0.3};
  a.place = {1.5, -0.25};

  EnvState next = step(env, a);
  REQUIRE(next.scene.objects[0].bbox.center.x == 1.0);
  REQUIRE(next.scene.objects[0].bbox.center.y == 0.0);
}

TEST_CASE("step wraps accumulated rotation") {
  EnvState env = tiny_env();
  add_object(env, "cupcake", 0.5, 0.5, 0.088, 0.170, 300);

  Action spin;
  spin.pick = {0.5, 0.5};
  spin.place = {0.5, 0.5};
  spin.rotation_deg = 418;
  EnvState next = step(env, spin);
  REQUIRE(next.scene.objects[0].rotation_deg == 358);

  env.scene.objects[0].rotation_deg = -300;
  spin.rotation_deg = -418;
  next = step(env, spin);
  REQUIRE(next.scene.objects[0].rotation_deg == -358);
}

TEST_CASE("step picks the topmost object under the point") {
  EnvState env = tiny_env();
  add_object(env, "below", 0.5, 0.5, 0.2, 0.2);
  add_object(env, "above", 0.5, 0.5, 0.2, 0.2);

  Action a;
  a.pick = {0.5, 0.5};
  a.place = {0.8, 0.8};

  EnvState next = step(env, a);
  REQUIRE(next.scene.objects[0].bbox.center.x == 0.5);
  REQUIRE(next.scene.objects[1].bbox.center.x == 0.8);
  REQUIRE(next.z_order == std::vector<std::string>{"below", "above"});

  Action again;
  again.pick = {0.5, 0.5};
  again.place = {0.2, 0.2};
  EnvState third = step(next, again);
  REQUIRE(third.scene.objects[0].bbox.center.x == 0.2);
  REQUIRE(third.z_order == std::vector<std::string>{"above", "below"});
}

TEST_CASE("a missed pick only advances the step counter") {
  EnvState env = tiny_env();
  add_object(env, "cupcake", 0.3, 0.3, 0.088, 0.170);

  Action a;
  a.pick = {0.9, 0.9};
  a.place = {0.1, 0.1};

  EnvState next = step(env, a);
  REQUIRE(next.step_count == 1);
  REQUIRE(next.scene == env.scene);
  REQUIRE(next.z_order == env.z_order);

  EnvState idle = step_noop(env);
  REQUIRE(idle.step_count == 1);
  REQUIRE(idle.scene == env.scene);
}

TEST_CASE("step conserves the object set") {
  EnvState env = tiny_env();
  add_object(env, "a", 0.2, 0.2, 0.1, 0.1);
  add_object(env, "b", 0.8, 0.8, 0.1, 0.1);

  Action a;
  a.pick = {0.2, 0.2};
  a.place = {0.6, 0.6};
  EnvState next = step(env, a);

  REQUIRE(next.scene.objects.size() == 2);
  std::set<std::string> names;
  for (const ObjectInstance& obj : next.scene.objects) names.insert(obj.name);
  REQUIRE(names == std::set<std::string>{"a", "b"});
  REQUIRE(next.z_order.size() == 2);
}

// --- judges --------------------------------------------------------------------

TEST_CASE("containment judge demands strictly more than half") {
  EnvState env = tiny_env(TaskKind::place_into);
  env.roles.dragged = "obj";
  env.roles.base = "bin";
  add_object(env, "obj", 0.625, 0.5, 0.25, 0.5);
  add_object(env, "bin", 0.8125, 0.5, 0.375, 1.0);

  SECTION("exactly half fails") {
    EpisodeResult r = judge(env);
    REQUIRE_FALSE(r.success);
    REQUIRE(r.failure_reason->find("not above 0.5") != std::string::npos);
  }

  SECTION("past half passes") {
    env.scene.objects[0].bbox.center.x = 0.64;
    REQUIRE(judge(env).success);
  }

  SECTION("fully inside passes") {
    env.scene.objects[0].bbox.center = {0.8125, 0.5};
    REQUIRE(judge(env).success);
  }

  SECTION("missing role object") {
    env.roles.dragged = "ghost";
    EpisodeResult r = judge(env);
    REQUIRE_FALSE(r.success);
    REQUIRE(r.failure_reason == "role object missing from scene");
  }
}

TEST_CASE("rotation judge tolerates 15 degrees and small drift") {
  EnvState env = tiny_env(TaskKind::rotate);
  env.roles.dragged = "obj";
  env.roles.target_angle = 90;
  env.roles.initial_center = {0.5, 0.5};
  add_object(env, "obj", 0.5, 0.5, 0.1, 0.2, 90);

  SECTION("exact angle passes") { REQUIRE(judge(env).success); }

  SECTION("fifteen degrees off passes") {
    env.scene.objects[0].rotation_deg = 105;
    REQUIRE(judge(env).success);
  }

  SECTION("sixteen degrees off fails") {
    env.scene.objects[0].rotation_deg = 106;
    EpisodeResult r = judge(env);
    REQUIRE_FALSE(r.success);
    REQUIRE(r.failure_reason == "rotation off by 16 degrees");
  }

  SECTION("difference is circular") {
    env.roles.target_angle = 10;
    env.scene.objects[0].rotation_deg = -350;
    REQUIRE(judge(env).success);
  }

  SECTION("drift within the limit passes") {
    env.scene.objects[0].bbox.center.x = 0.549;
    REQUIRE(judge(env).success);
  }

  SECTION("drift beyond the limit fails") {
    env.scene.objects[0].bbox.center.x = 0.551;
    EpisodeResult r = judge(env);
    REQUIRE_FALSE(r.success);
    REQUIRE(r.failure_reason->find("center drifted by") == 0);
  }
}

TEST_CASE("stack judge wants one aligned strictly rising column") {
  EnvState env = tiny_env(TaskKind::stack_order);
  env.roles.stack = {"base", "mid", "top"};
  add_object(env, "base", 0.5, 0.8, 0.1, 0.1);
  add_object(env, "mid", 0.5, 0.7, 0.1, 0.1);
  add_object(env, "top", 0.5, 0.6, 0.1, 0.1);

  SECTION("a clean tower passes") { REQUIRE(judge(env).success); }

  SECTION("small misalignment is tolerated") {
    env.scene.objects[1].bbox.center.x = 0.546875;
    REQUIRE(judge(env).success);
  }

  SECTION("misaligned column fails") {
    env.scene.objects[1].bbox.center.x = 0.56;
    EpisodeResult r = judge(env);
    REQUIRE_FALSE(r.success);
    REQUIRE(r.failure_reason == "\"mid\" not aligned with the stack base");
  }

  SECTION("equal heights fail") {
    env.scene.objects[2].bbox.center.y = 0.7;
    EpisodeResult r = judge(env);
    REQUIRE_FALSE(r.success);
    REQUIRE(r.failure_reason == "\"top\" not above \"mid\"");
  }
}

TEST_CASE("unknown task kinds never succeed") {
  EnvState env = tiny_env(TaskKind::other);
  EpisodeResult r = judge(env);
  REQUIRE_FALSE(r.success);
  REQUIRE(r.failure_reason == "task kind has no judge");
}

// --- task generation -----------------------------------------------------------

TEST_CASE("generate_task is deterministic") {
  for (TaskKind kind : kGeneratedKinds) {
    EnvState a = generate_task(kind, default_catalog(), 123, 2);
    EnvState b = generate_task(kind, default_catalog(), 123, 2);
    REQUIRE(a.scene == b.scene);
    REQUIRE(a.task == b.task);
    REQUIRE(a.ref_frames == b.ref_frames);
    REQUIRE(a.z_order == b.z_order);
    REQUIRE(a.roles.dragged == b.roles.dragged);
    REQUIRE(a.roles.target_angle == b.roles.target_angle);

    EnvState c = generate_task(kind, default_catalog(), 124, 2);
    REQUIRE(a.scene != c.scene);
  }
}

TEST_CASE("generated scenes never overlap and stay on the table") {
  for (TaskKind kind : kGeneratedKinds) {
    for (std::uint64_t seed = 0; seed < 250; ++seed) {
      for (int level = 1; level <= 3; ++level) {
        EnvState env = generate_task(kind, default_catalog(), seed, level);
        INFO(to_string(kind) << " seed " << seed << " level " << level);

        for (std::size_t i = 0; i < env.scene.objects.size(); ++i) {
          const BBox& box = env.scene.objects[i].bbox;
          REQUIRE(box.x_min() >= -1e-9);
          REQUIRE(box.x_max() <= 1.0 + 1e-9);
          REQUIRE(box.y_min() >= -1e-9);
          REQUIRE(box.y_max() <= 1.0 + 1e-9);
          for (std::size_t j = i + 1; j < env.scene.objects.size(); ++j) {
            REQUIRE(overlap_area(box, env.scene.objects[j].bbox) == 0.0);
          }
        }
        REQUIRE(env.z_order.size() == env.scene.objects.size());
      }
    }
  }
}

TEST_CASE("level one snaps centers to the coarse grid") {
  bool saw_off_grid_l2 = false;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    EnvState l1 = generate_task(TaskKind::place_into, default_catalog(), seed, 1);
    for (const ObjectInstance& obj : l1.scene.objects) {
      REQUIRE(on_grid(obj.bbox.center.x));
      REQUIRE(on_grid(obj.bbox.center.y));
    }
    EnvState l2 = generate_task(TaskKind::place_into, default_catalog(), seed, 2);
    for (const ObjectInstance& obj : l2.scene.objects) {
      if (!on_grid(obj.bbox.center.x) || !on_grid(obj.bbox.center.y))
        saw_off_grid_l2 = true;
    }
  }
  REQUIRE(saw_off_grid_l2);
}

TEST_CASE("levels partition the object combinations") {
  const ObjectCatalog& catalog = default_catalog();
  for (TaskKind kind : kGeneratedKinds) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      for (int level = 1; level <= 3; ++level) {
        EnvState env = generate_task(kind, catalog, seed, level);
        std::size_t sum = 0;
        for (const ObjectInstance& obj : env.scene.objects)
          sum += global_index(catalog, obj.name);
        INFO(to_string(kind) << " seed " << seed << " level " << level);
        if (level == 3) {
          REQUIRE(sum % 3 == 0);
        } else {
          REQUIRE(sum % 3 != 0);
        }
      }
    }
  }
}

TEST_CASE("placement tasks stage a container and roles") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    EnvState env = generate_task(TaskKind::place_into, default_catalog(), seed, 2);
    REQUIRE(env.scene.objects.size() == 4);
    REQUIRE(env.task.task_kind == TaskKind::place_into);
    REQUIRE_FALSE(env.roles.dragged.empty());
    REQUIRE_FALSE(env.roles.base.empty());
    REQUIRE(env.ref_frames.count("dragged_obj") == 1);
    REQUIRE(env.ref_frames.count("base_obj") == 1);
    REQUIRE(env.task.segments.front().value == "Put ");
  }
  EnvState on_top = generate_task(TaskKind::put_on_top, default_catalog(), 5, 2);
  REQUIRE(on_top.task.segments[2].value == " on top of ");
}

TEST_CASE("rotation tasks ask for a turn past the tolerance") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    EnvState env = generate_task(TaskKind::rotate, default_catalog(), seed, 2);
    int magnitude = std::abs(env.roles.target_angle);
    REQUIRE(magnitude >= 16);
    REQUIRE(magnitude <= 180);
    REQUIRE(env.scene.objects.size() == 3);
    const ObjectInstance& target = find_by_name(env.scene, env.roles.dragged);
    REQUIRE(env.roles.initial_center == target.bbox.center);
  }
}

TEST_CASE("stack tasks stage short well separated objects") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    EnvState env = generate_task(TaskKind::stack_order, default_catalog(), seed, 2);
    REQUIRE(env.scene.objects.size() == 3);
    REQUIRE(env.roles.stack.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      REQUIRE(env.scene.objects[i].name == env.roles.stack[i]);
      REQUIRE(env.scene.objects[i].bbox.h <= 0.2);
      REQUIRE(env.scene.objects[i].bbox.center.y >= 0.6 - 1e-9);
      for (std::size_t j = i + 1; j < 3; ++j) {
        double dx = std::abs(env.scene.objects[i].bbox.center.x -
                             env.scene.objects[j].bbox.center.x);
        REQUIRE(dx > 0.06);
      }
    }
    REQUIRE(env.ref_frames.count("frame_0") == 1);
    REQUIRE(env.ref_frames.count("frame_1") == 1);
    REQUIRE(env.ref_frames.count("frame_2") == 1);
    REQUIRE(env.ref_frames.at("frame_0").content == env.scene);
    REQUIRE(env.task.segments.front().value == "Stack objects in this order ");
  }
}

TEST_CASE("generate_task rejects bad requests") {
  REQUIRE_THROWS_AS(generate_task(TaskKind::other, default_catalog(), 1, 1),
                    std::invalid_argument);
  REQUIRE_THROWS_WITH(generate_task(TaskKind::other, default_catalog(), 1, 1),
                      "cannot generate task kind: other");
  REQUIRE_THROWS_WITH(generate_task(TaskKind::rotate, default_catalog(), 1, 0),
                      "level must be 1, 2, or 3");
  REQUIRE_THROWS_WITH(generate_task(TaskKind::rotate, default_catalog(), 1, 4),
                      "level must be 1, 2, or 3");

  ObjectCatalog tiny = default_catalog();
  tiny.movables.resize(3);
  REQUIRE_THROWS_AS(generate_task(TaskKind::place_into, tiny, 1, 1),
                    GenerationError);
  REQUIRE_THROWS_WITH(generate_task(TaskKind::place_into, tiny, 1, 1),
                      "catalog too small for task generation");
}

// --- oracle and recording --------------------------------------------------------

TEST_CASE("the oracle closes every generated task") {
  for (TaskKind kind : kGeneratedKinds) {
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
      EnvState env = generate_task(kind, default_catalog(), seed, 1 + seed % 3);
      int taken = 0;
      while (taken < 8) {
        std::optional<Action> next = oracle_policy(env);
        if (!next) break;
        env = step(env, *next);
        ++taken;
      }
      INFO(to_string(kind) << " seed " << seed);
      REQUIRE(judge(env).success);
      REQUIRE_FALSE(oracle_policy(env).has_value());
      if (kind == TaskKind::stack_order) {
        REQUIRE(taken == 2);
      } else {
        REQUIRE(taken == 1);
      }
    }
  }
}

TEST_CASE("recorded trajectories validate and replay exactly") {
  RecorderOptions options;
  options.level = 2;

  for (TaskKind kind : kGeneratedKinds) {
    Trajectory t = record_trajectory(kind, 7, options);
    REQUIRE(t.id == std::string(to_string(kind)) + "-L2-s7");
    REQUIRE(validate_trajectory(t).empty());
    REQUIRE(t.task.task_kind == kind);

    EnvState env = generate_task(kind, default_catalog(), 7, options.level);
    REQUIRE(env.task == t.task);
    for (std::size_t k = 0; k < t.steps.size(); ++k) {
      REQUIRE(t.steps[k].observation.scene == env.scene);
      REQUIRE(t.steps[k].observation.timestamp == static_cast<int>(k));
      REQUIRE(t.steps[k].action.step_index == std::nullopt);
      REQUIRE(t.steps[k].action.picked_object_name.has_value());
      env = step(env, t.steps[k].action);
    }
    REQUIRE(t.final_observation.has_value());
    REQUIRE(t.final_observation->scene == env.scene);
    REQUIRE(t.final_observation->timestamp == static_cast<int>(t.steps.size()));
    REQUIRE(judge(env).success);

    std::size_t expected = kind == TaskKind::stack_order ? 2 : 1;
    REQUIRE(t.steps.size() == expected);
  }
}

TEST_CASE("recording can emit the scene images it references") {
  std::filesystem::path dir = temp_dir("record");
  RecorderOptions options;
  options.write_images = true;
  options.image_dir = dir;

  Trajectory t = record_trajectory(TaskKind::place_into, 11, options);
  std::vector<Observation> all;
  for (const TrajectoryStep& s : t.steps) all.push_back(s.observation);
  REQUIRE(t.final_observation.has_value());
  all.push_back(*t.final_observation);

  for (const Observation& obs : all) {
    REQUIRE(obs.image_ref.rfind("images/", 0) == 0);
    std::filesystem::path file = dir / obs.image_ref.substr(7);
    REQUIRE(std::filesystem::exists(file));
    Pixmap loaded = read_ppm(file);
    Pixmap fresh = render_scene(obs.scene);
    REQUIRE(loaded.encode_ppm() == fresh.encode_ppm());
  }
  std::filesystem::remove_all(dir);
}

// --- rendering ---------------------------------------------------------------------

TEST_CASE("boxes rasterize with floor and ceil minus one bounds") {
  SceneState scene;
  scene.objects.push_back(fixtures::object("cupcake", 0.5, 0.5, 0.1, 0.2));
  Pixmap img = render_scene(scene);
  REQUIRE(img.width() == kSceneWidth);
  REQUIRE(img.height() == kSceneHeight);

  Rgb paint = object_color("cupcake");
  REQUIRE(img.at(114, 64) == kSceneBackground);
  REQUIRE(img.at(115, 64) == paint);
  REQUIRE(img.at(140, 64) == paint);
  REQUIRE(img.at(141, 64) == kSceneBackground);
  REQUIRE(img.at(128, 50) == kSceneBackground);
  REQUIRE(img.at(128, 51) == paint);
  REQUIRE(img.at(128, 76) == paint);
  REQUIRE(img.at(128, 77) == kSceneBackground);
}

TEST_CASE("later objects paint over earlier ones") {
  SceneState scene;
  scene.objects.push_back(fixtures::object("below", 0.5, 0.5, 0.2, 0.4));
  scene.objects.push_back(fixtures::object("above", 0.5, 0.5, 0.1, 0.2));
  Pixmap img = render_scene(scene);
  REQUIRE(img.at(128, 64) == object_color("above"));
  REQUIRE(img.at(104, 64) == object_color("below"));
}

TEST_CASE("object colors are deterministic and stay visible") {
  for (const CatalogEntry& obj : default_catalog().movables) {
    Rgb c = object_color(obj.name);
    REQUIRE(c == object_color(obj.name));
    REQUIRE(c.r >= 64);
    REQUIRE(c.g >= 64);
    REQUIRE(c.b >= 64);
  }
  REQUIRE(object_color("cupcake") != object_color("blueberry"));
}

TEST_CASE("scene image names are content addressed") {
  SceneState a;
  a.objects.push_back(fixtures::object("cupcake", 0.5, 0.5, 0.1, 0.2));
  SceneState b = a;
  b.objects[0].bbox.center.x = 0.6;

  std::string name_a = scene_image_name(render_scene(a));
  REQUIRE(name_a == scene_image_name(render_scene(a)));
  REQUIRE(name_a != scene_image_name(render_scene(b)));
  REQUIRE(name_a.rfind("scene-", 0) == 0);
  REQUIRE(name_a.size() == std::string("scene-0123456789abcdef.ppm").size());
  REQUIRE(name_a.substr(name_a.size() - 4) == ".ppm");
  for (char c : name_a.substr(6, 16)) {
    bool hex = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    REQUIRE(hex);
  }
}

TEST_CASE("pixmaps survive a write and read round trip") {
  std::filesystem::path dir = temp_dir("ppm");
  Pixmap img(7, 5);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      img.at(x, y) = Rgb{static_cast<std::uint8_t>(x * 11),
                         static_cast<std::uint8_t>(y * 23),
                         static_cast<std::uint8_t>((x + y) * 7)};

  std::vector<std::uint8_t> encoded = img.encode_ppm();
  REQUIRE(std::string(encoded.begin(), encoded.begin() + 11) == "P6\n7 5\n255\n");
  REQUIRE(encoded.size() == 11 + 7 * 5 * 3);

  std::filesystem::path file = dir / "img.ppm";
  write_ppm(img, file);
  Pixmap loaded = read_ppm(file);
  REQUIRE(loaded.width() == 7);
  REQUIRE(loaded.height() == 5);
  REQUIRE(loaded.encode_ppm() == encoded);

  std::filesystem::remove_all(dir);
}

TEST_CASE("pixmap io reports bad files") {
  std::filesystem::path dir = temp_dir("ppm-bad");

  std::filesystem::path missing = dir / "missing.ppm";
  REQUIRE_THROWS_WITH(read_ppm(missing), "cannot read image: " + missing.string());

  std::filesystem::path bad_magic = dir / "magic.ppm";
  std::ofstream(bad_magic, std::ios::binary) << "P5\n2 2\n255\n";
  REQUIRE_THROWS_WITH(read_ppm(bad_magic),
                      "unsupported pixmap format in " + bad_magic.string());

  std::filesystem::path truncated = dir / "short.ppm";
  std::ofstream(truncated, std::ios::binary) << "P6\n2 2\n255\nabc";
  REQUIRE_THROWS_WITH(read_ppm(truncated),
                      "truncated pixmap in " + truncated.string());

  REQUIRE_THROWS_AS(Pixmap(0, 4), std::invalid_argument);
  REQUIRE_THROWS_WITH(Pixmap(4, -1), "pixmap dimensions must be positive");

  std::filesystem::remove_all(dir);
}