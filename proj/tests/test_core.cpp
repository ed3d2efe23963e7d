#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "support/fixtures.hpp"
#include "tabletalk/core.hpp"
#include "tabletalk/jsonl.hpp"

using namespace tabletalk;

namespace {

bool has_problem(const std::vector<std::string>& problems,
                 const std::string& expected) {
  return std::find(problems.begin(), problems.end(), expected) !=
         problems.end();
}

}  // namespace

TEST_CASE("fixture trajectory is structurally valid") {
  REQUIRE(validate_trajectory(fixtures::letter_demo()).empty());
}

TEST_CASE("validate_trajectory reports each violation by field") {
  Trajectory t = fixtures::letter_demo();

  SECTION("empty id") {
    t.id.clear();
    REQUIRE(has_problem(validate_trajectory(t), "id empty"));
  }

  SECTION("no steps") {
    t.steps.clear();
    REQUIRE(has_problem(validate_trajectory(t), "steps empty"));
  }

  SECTION("dangling frame reference") {
    t.ref_frames.erase("dragged_obj");
    REQUIRE(has_problem(
        validate_trajectory(t),
        "task.segments[1] references missing ref_frame \"dragged_obj\""));
  }

  SECTION("task without any literal text") {
    t.task.segments = {TaskSegment::frame("dragged_obj")};
    REQUIRE(has_problem(validate_trajectory(t),
                        "task.segments has no text segment"));
  }

  SECTION("frame id disagrees with its map key") {
    t.ref_frames["dragged_obj"].frame_id = "something_else";
    REQUIRE(has_problem(
        validate_trajectory(t),
        "ref_frames[\"dragged_obj\"].frame_id does not match its key"));
  }

  SECTION("single object frame holding two objects") {
    t.ref_frames["dragged_obj"].content.objects.push_back(
        fixtures::object("extra", 0.1, 0.1, 0.05, 0.05));
    REQUIRE(has_problem(validate_trajectory(t),
                        "ref_frames[\"dragged_obj\"] single_object frame must "
                        "hold exactly one object"));
  }

  SECTION("unnamed scene object") {
    t.steps[0].observation.scene.objects[0].name.clear();
    REQUIRE(has_problem(validate_trajectory(t),
                        "steps[0].observation.scene.objects[0].name empty"));
  }

  SECTION("object center outside the unit square") {
    t.steps[0].observation.scene.objects[0].bbox.center.x = 1.25;
    REQUIRE(has_problem(
        validate_trajectory(t),
        "steps[0].observation.scene.objects[0].bbox.center out of [0,1]"));
  }

  SECTION("object rotation outside the legal band") {
    t.steps[0].observation.scene.objects[0].rotation_deg = 360;
    REQUIRE(has_problem(validate_trajectory(t),
                        "steps[0].observation.scene.objects[0].rotation_deg "
                        "out of [-359,359]"));
  }

  SECTION("missing image reference") {
    t.steps[1].observation.image_ref.clear();
    REQUIRE(has_problem(validate_trajectory(t),
                        "steps[1].observation.image_ref empty"));
  }

  SECTION("timestamps must strictly increase") {
    t.steps[1].observation.timestamp = 0;
    REQUIRE(has_problem(
        validate_trajectory(t),
        "steps[1].observation.timestamp not strictly increasing"));
  }

  SECTION("pick point outside the unit square") {
    t.steps[0].action.pick = {-0.1, 0.5};
    REQUIRE(has_problem(validate_trajectory(t),
                        "steps[0].action.pick out of [0,1]"));
  }

  SECTION("action rotation outside the legal band") {
    t.steps[0].action.rotation_deg = -400;
    REQUIRE(has_problem(validate_trajectory(t),
                        "steps[0].action.rotation_deg out of [-359,359]"));
  }

  SECTION("step index below one") {
    t.steps[1].action.step_index = 0;
    REQUIRE(has_problem(validate_trajectory(t),
                        "steps[1].action.step_index must be >= 1"));
  }

  SECTION("final observation must come after the last step") {
    t.final_observation->timestamp = 1;
    REQUIRE(has_problem(validate_trajectory(t),
                        "final_observation.timestamp not strictly increasing"));
  }
}

TEST_CASE("action_history slices completed actions") {
  Trajectory t = fixtures::letter_demo();

  REQUIRE(action_history(t, 0).empty());

  auto one = action_history(t, 1);
  REQUIRE(one.size() == 1);
  REQUIRE(one[0] == t.steps[0].action);

  auto two = action_history(t, 2);
  REQUIRE(two.size() == 2);
  REQUIRE(two[1] == t.steps[1].action);

  REQUIRE_THROWS_AS(action_history(t, 3), std::out_of_range);
  REQUIRE_THROWS_WITH(action_history(t, 3),
                      "action_history: upto 3 exceeds step count 2");
}

TEST_CASE("bbox accessors and overlap area") {
  BBox a{{0.5, 0.5}, 0.2, 0.2};
  REQUIRE(a.x_min() == Catch::Approx(0.4));
  REQUIRE(a.x_max() == Catch::Approx(0.6));
  REQUIRE(a.y_min() == Catch::Approx(0.4));
  REQUIRE(a.y_max() == Catch::Approx(0.6));
  REQUIRE(a.area() == Catch::Approx(0.04));

  SECTION("disjoint boxes have zero overlap") {
    BBox b{{0.9, 0.5}, 0.2, 0.2};
    REQUIRE(overlap_area(a, b) == 0.0);
  }

  SECTION("boxes that only touch have zero overlap") {
    BBox b{{0.7, 0.5}, 0.2, 0.2};
    REQUIRE(overlap_area(a, b) == 0.0);
  }

  SECTION("partial overlap") {
    BBox b{{0.6, 0.5}, 0.2, 0.2};
    REQUIRE(overlap_area(a, b) == Catch::Approx(0.02));
  }

  SECTION("a nested box overlaps by its own area") {
    BBox b{{0.5, 0.5}, 0.1, 0.1};
    REQUIRE(overlap_area(a, b) == Catch::Approx(0.01));
    REQUIRE(overlap_area(b, a) == Catch::Approx(0.01));
  }
}

TEST_CASE("task and frame kinds round trip through their names") {
  for (TaskKind k : {TaskKind::place_into, TaskKind::rotate,
                     TaskKind::put_on_top, TaskKind::stack_order,
                     TaskKind::other}) {
    REQUIRE(task_kind_from_string(to_string(k)) == k);
  }
  REQUIRE_THROWS_WITH(task_kind_from_string("bogus"),
                      "unknown task kind: bogus");

  for (FrameKind k : {FrameKind::single_object, FrameKind::multi_object_scene}) {
    REQUIRE(frame_kind_from_string(to_string(k)) == k);
  }
  REQUIRE_THROWS_WITH(frame_kind_from_string("bogus"),
                      "unknown frame kind: bogus");
}

TEST_CASE("trajectories survive a JSONL round trip") {
  Trajectory t = fixtures::letter_demo();
  std::stringstream buf;
  write_jsonl(buf, std::vector<Trajectory>{t});

  auto back = read_jsonl<Trajectory>(
      buf, [](const Json& j) { return trajectory_from_json(j); }, nullptr);
  REQUIRE(back.size() == 1);
  REQUIRE(back[0] == t);
}

TEST_CASE("conversations survive a JSONL round trip") {
  Conversation c;
  c.id = "letters-demo/inBC/0";
  c.image_ref = "images/letters-0.ppm";
  c.human = fixtures::kPlainHumanFirst;
  c.assistant = fixtures::kStepOne + "\n" + fixtures::kStepTwo;

  std::stringstream buf;
  write_jsonl(buf, std::vector<Conversation>{c});
  auto back = read_jsonl<Conversation>(
      buf, [](const Json& j) { return conversation_from_json(j); }, nullptr);
  REQUIRE(back.size() == 1);
  REQUIRE(back[0] == c);
}

TEST_CASE("conversation json uses the two-turn wire layout") {
  Conversation c;
  c.id = "sample";
  c.image_ref = "images/a.ppm";
  c.human = "<image>\nhello";
  c.assistant = "world";

  Json j = to_json(c);
  REQUIRE(j["id"] == "sample");
  REQUIRE(j["image"] == "images/a.ppm");
  REQUIRE(j["conversations"].size() == 2);
  REQUIRE(j["conversations"][0]["from"] == "human");
  REQUIRE(j["conversations"][0]["value"] == "<image>\nhello");
  REQUIRE(j["conversations"][1]["from"] == "gpt");
  REQUIRE(j["conversations"][1]["value"] == "world");
}

TEST_CASE("jsonl reader reports bad lines with their line number") {
  std::stringstream buf;
  buf << R"({"id": "a", "image": "x.ppm", "conversations": [)"
      << R"({"from": "human", "value": "<image>\nq"},)"
      << R"({"from": "gpt", "value": "r"}]})" << "\n";
  buf << "not json\n";
  buf << R"({"id": "b"})" << "\n";

  std::vector<JsonlError> errors;
  auto out = read_jsonl<Conversation>(
      buf, [](const Json& j) { return conversation_from_json(j); }, &errors);
  REQUIRE(out.size() == 1);
  REQUIRE(errors.size() == 2);
  REQUIRE(errors[0].line == 2);
  REQUIRE(errors[1].line == 3);
  REQUIRE(errors[1].message == "missing field \"image\"");
}

TEST_CASE("jsonl reader rethrows when no error sink is given") {
  std::stringstream buf;
  buf << R"({"id": "b"})" << "\n";
  REQUIRE_THROWS_WITH(
      read_jsonl<Conversation>(
          buf, [](const Json& j) { return conversation_from_json(j); },
          nullptr),
      "missing field \"image\"");
}

TEST_CASE("reading a missing file fails loudly") {
  REQUIRE_THROWS_WITH(read_trajectories("/nonexistent/path.jsonl"),
                      "cannot open /nonexistent/path.jsonl");
}
