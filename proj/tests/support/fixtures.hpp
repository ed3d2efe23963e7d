#pragma once

// A small two-step tabletop trajectory with frozen conversation strings.
// The strings are the authority: tests compare generated output against
// these literals, never the other way around.

#include <string>

#include "tabletalk/core.hpp"

namespace fixtures {

using tabletalk::Action;
using tabletalk::BBox;
using tabletalk::ObjectInstance;
using tabletalk::Observation;
using tabletalk::RefFrame;
using tabletalk::SceneState;
using tabletalk::TaskSegment;
using tabletalk::Trajectory;
using tabletalk::TrajectoryStep;

inline ObjectInstance object(std::string name, double cx, double cy, double w,
                             double h, int rot = 0) {
  ObjectInstance obj;
  obj.name = std::move(name);
  obj.bbox = BBox{{cx, cy}, w, h};
  obj.rotation_deg = rot;
  return obj;
}

inline Trajectory letter_demo() {
  Trajectory t;
  t.id = "letters-demo";

  RefFrame dragged;
  dragged.frame_id = "dragged_obj";
  dragged.kind = tabletalk::FrameKind::single_object;
  dragged.content.objects = {
      object("rainbow letter T", 0.500, 0.594, 0.102, 0.188)};
  RefFrame base;
  base.frame_id = "base_obj";
  base.kind = tabletalk::FrameKind::single_object;
  base.content.objects = {object("wooden bowl", 0.457, 0.531, 0.195, 0.328)};
  t.ref_frames["dragged_obj"] = dragged;
  t.ref_frames["base_obj"] = base;

  t.task.task_kind = tabletalk::TaskKind::place_into;
  t.task.segments = {
      TaskSegment::text("First put "),
      TaskSegment::frame("dragged_obj"),
      TaskSegment::text(" into "),
      TaskSegment::frame("base_obj"),
      TaskSegment::text(
          " then put the object that was previously at its south into the "
          "same "),
      TaskSegment::frame("base_obj"),
      TaskSegment::text("."),
  };

  SceneState scene0;
  scene0.objects = {
      object("rainbow letter T", 0.480, 0.367, 0.102, 0.188),
      object("wooden bowl", 0.727, 0.547, 0.195, 0.328),
      object("rainbow letter V", 0.500, 0.617, 0.094, 0.156),
  };
  SceneState scene1;
  scene1.objects = {
      object("rainbow letter T", 0.727, 0.547, 0.102, 0.188),
      object("wooden bowl", 0.727, 0.547, 0.195, 0.328),
      object("rainbow letter V", 0.500, 0.617, 0.094, 0.156),
  };
  SceneState scene2;
  scene2.objects = {
      object("rainbow letter T", 0.727, 0.547, 0.102, 0.188),
      object("wooden bowl", 0.727, 0.547, 0.195, 0.328),
      object("rainbow letter V", 0.746, 0.617, 0.094, 0.156),
  };

  TrajectoryStep s0;
  s0.observation = Observation{"images/letters-0.ppm", scene0, 0};
  s0.action.pick = {0.480, 0.367};
  s0.action.place = {0.727, 0.547};

  TrajectoryStep s1;
  s1.observation = Observation{"images/letters-1.ppm", scene1, 1};
  s1.action.pick = {0.500, 0.617};
  s1.action.place = {0.746, 0.617};
  s1.action.picked_object_name = "rainbow letter V";
  s1.action.step_index = 2;

  t.steps = {s0, s1};
  t.final_observation = Observation{"images/letters-2.ppm", scene2, 2};
  return t;
}

inline const std::string kFormatBlock =
    "Every action you take must include two locations in the format of "
    "<b>(x, y)</b> and one clockwise rotation angle in the format of "
    "<r>[r]</r>. The first location is the image coordinate where you use a "
    "suction cup to pick up the object, and the second location is where you "
    "place the object. The image coordinate ranges from 0 to 1. The rotation "
    "angle indicates how many degrees you rotate the object clockwise, and "
    "it ranges from -359 to 359.";

inline const std::string kPlainTask =
    "<task>First put <p>rainbow letter T</p> into <p>wooden bowl</p> then "
    "put the object that was previously at its south into the same "
    "<p>wooden bowl</p>.</task>";

inline const std::string kDetectionTask =
    "<task>First put <p>rainbow letter T</p> at "
    "<b>(0.500, 0.594), {0.102, 0.188}</b> into <p>wooden bowl</p> at "
    "<b>(0.457, 0.531), {0.195, 0.328}</b> then put the object that was "
    "previously at its south into the same <p>wooden bowl</p> at "
    "<b>(0.457, 0.531), {0.195, 0.328}</b>.</task>";

inline const std::string kHistoryLine =
    "You have finished: Step 1: Pick up the object at <b>(0.480, 0.367)</b>, "
    "rotate <r>[0]</r> degrees, and drop it at <b>(0.727, 0.547)</b>.";

inline const std::string kStepOne =
    "Step 1: Pick up the object at <b>(0.480, 0.367)</b>, rotate <r>[0]</r> "
    "degrees, and drop it at <b>(0.727, 0.547)</b>.";

inline const std::string kStepTwo =
    "Step 2: Pick up the <p>rainbow letter V</p> at <b>(0.500, 0.617)</b>, "
    "rotate <r>[0]</r> degrees, and drop it at <b>(0.746, 0.617)</b>.";

inline const std::string kPlainHumanFirst =
    "<image>\n" + kPlainTask + "\n" + kFormatBlock;

inline const std::string kPlainHumanSecond =
    "<image>\n" + kPlainTask + "\n" + kFormatBlock + "\n" + kHistoryLine;

inline const std::string kDetectionHumanSecond =
    "<image>\n" + kDetectionTask + "\n" + kFormatBlock + "\n" + kHistoryLine;

inline const std::string kSpatialDSpan = "<d>(-0.246, 0.000)</d>";
inline const std::string kSpatialESpan = "<e>0.246</e>";
inline const std::string kSpatialSentence =
    "<p>red letter V</p> is left from <p>green paisley letter V</p> with 2d "
    "center distance (x,y) of <d>(-0.246, 0.000)</d> and euclidean center "
    "distance of <e>0.246</e>.";

inline const std::string kTemporalDSpan = "<d>(-0.242, 0.047)</d>";
inline const std::string kTemporalESpan = "<e>0.244</e>";
inline const std::string kTemporalSentence =
    "<p>green paisley letter V</p> moves far away from <p>red letter V</p>. "
    "2d center distance (x,y) of <p>red letter V</p> from <p>green paisley "
    "letter V</p> changes by <d>(-0.242, 0.047)</d> and Euclidean center "
    "distance between them <e>0.244</e>.";

}  // namespace fixtures
