#pragma once

// Dataset builders: behavior-cloning conversations (plain, detection-grounded,
// and discrete-token variants) plus the six auxiliary datasets, the
// configuration mixer, and trajectory subsampling.
//
// Everything here is a pure function of (trajectories, recipe). Random choices
// go through keyed PRFs on (recipe.seed, stable sample key), so a sample's
// content never depends on how many other samples exist or on thread order.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabletalk/core.hpp"
#include "tabletalk/promptbank.hpp"
#include "tabletalk/rng.hpp"
#include "tabletalk/textcodec.hpp"

namespace tabletalk {

enum class BaseRecipe { inBC, D_inBC, RT2, D_RT2 };

inline const char* to_string(BaseRecipe b) {
  switch (b) {
    case BaseRecipe::inBC: return "inBC";
    case BaseRecipe::D_inBC: return "D-inBC";
    case BaseRecipe::RT2: return "RT2";
    case BaseRecipe::D_RT2: return "D-RT2";
  }
  return "inBC";
}

inline BaseRecipe base_recipe_from_string(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '-' || c == '_'; }),
          s.end());
  if (s == "inbc") return BaseRecipe::inBC;
  if (s == "dinbc") return BaseRecipe::D_inBC;
  if (s == "rt2") return BaseRecipe::RT2;
  if (s == "drt2") return BaseRecipe::D_RT2;
  throw std::invalid_argument("unknown base recipe: " + s);
}

inline bool uses_detections(BaseRecipe b) {
  return b == BaseRecipe::D_inBC || b == BaseRecipe::D_RT2;
}

inline bool uses_format_block(BaseRecipe b) {
  return b == BaseRecipe::inBC || b == BaseRecipe::D_inBC;
}

enum class AuxKind {
  localization = 0,
  detection = 1,
  action_prediction = 2,
  future_prediction = 3,
  spatial = 4,
  temporal = 5,
};

inline constexpr std::array<AuxKind, 6> kAllAuxKinds = {
    AuxKind::localization,     AuxKind::detection, AuxKind::action_prediction,
    AuxKind::future_prediction, AuxKind::spatial,   AuxKind::temporal,
};

inline const char* to_string(AuxKind k) {
  switch (k) {
    case AuxKind::localization: return "localization";
    case AuxKind::detection: return "detection";
    case AuxKind::action_prediction: return "action_prediction";
    case AuxKind::future_prediction: return "future_prediction";
    case AuxKind::spatial: return "spatial";
    case AuxKind::temporal: return "temporal";
  }
  return "localization";
}

struct AuxDatasetConfig {
  bool enabled = false;
  double ratio = 1.0;                 // target = round(ratio * |base|)
  bool use_reference_images = true;   // also source from task reference frames
  bool operator==(const AuxDatasetConfig&) const = default;
};

struct AuxConfig {
  std::array<AuxDatasetConfig, 6> datasets{};

  AuxDatasetConfig& operator[](AuxKind k) { return datasets[static_cast<std::size_t>(k)]; }
  const AuxDatasetConfig& operator[](AuxKind k) const {
    return datasets[static_cast<std::size_t>(k)];
  }
  bool operator==(const AuxConfig&) const = default;
};

// Named mixtures. The starred variants keep the same datasets but stop
// sourcing localization/detection/spatial from reference frames. act/fut/temp
// are transition-based and never source from reference frames.
inline AuxConfig aux_preset(const std::string& name) {
  AuxConfig cfg;
  auto enable = [&](AuxKind k, bool use_ref) {
    cfg[k].enabled = true;
    cfg[k].use_reference_images = use_ref;
  };
  bool starred = !name.empty() && name.back() == '*';
  std::string letter = starred ? name.substr(0, name.size() - 1) : name;
  if (letter != "A" && letter != "B" && letter != "C" && letter != "D")
    throw std::invalid_argument("unknown aux preset: " + name);
  if (starred && letter != "A" && letter != "D")
    throw std::invalid_argument("unknown aux preset: " + name);

  enable(AuxKind::localization, !starred);
  enable(AuxKind::detection, !starred);
  if (letter == "B" || letter == "C" || letter == "D") {
    enable(AuxKind::action_prediction, false);
    enable(AuxKind::future_prediction, false);
  }
  if (letter == "C" || letter == "D") enable(AuxKind::spatial, !starred);
  if (letter == "D") enable(AuxKind::temporal, false);
  return cfg;
}

struct GenRecipe {
  BaseRecipe base = BaseRecipe::inBC;
  AuxConfig aux;
  std::uint64_t seed = 0;
  bool history = true;
  bool multi_step_plan = true;
};

// Produces an image reference for a task reference frame (used when aux
// datasets source from reference frames). When absent, reference frames are
// skipped as sample sources.
using FrameImageResolver =
    std::function<std::string(const Trajectory&, const RefFrame&)>;

// Raised for per-trajectory problems; the pipeline reports and skips.
struct TrajectoryBuildError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// human-turn assembly (shared with inference-time query building)

// Renders one task frame slot per recipe: caption or literal token for plain
// recipes, detection text for D-variants.
inline std::string render_frame_slot(const RefFrame& frame, BaseRecipe base) {
  if (uses_detections(base)) {
    if (frame.content.objects.empty())
      throw TrajectoryBuildError("frame \"" + frame.frame_id + "\" has no detections");
    if (frame.kind == FrameKind::single_object)
      return format_object_clause(frame.content.objects[0]);
    return encode_scene(frame.content);
  }
  if (frame.kind == FrameKind::single_object) {
    if (frame.content.objects.empty())
      throw TrajectoryBuildError("frame \"" + frame.frame_id + "\" has no detections");
    return name_span(frame.content.objects[0].name);
  }
  return frame.frame_id;
}

inline std::string render_task_text(const TaskSpec& task,
                                    const std::map<std::string, RefFrame>& frames,
                                    BaseRecipe base) {
  std::string out = "<task>";
  for (const TaskSegment& seg : task.segments) {
    if (seg.kind == TaskSegment::Kind::text) {
      out += seg.value;
    } else {
      auto it = frames.find(seg.value);
      if (it == frames.end())
        throw TrajectoryBuildError("task references missing ref_frame \"" + seg.value + "\"");
      out += render_frame_slot(it->second, base);
    }
  }
  out += "</task>";
  return out;
}

// "You have finished: Step 1: ... Step 2: ...": prior actions without
// object names, space-joined.
inline std::string history_clause(const std::vector<Action>& done) {
  std::string out = kHistoryLead;
  ActionTextOptions opts;
  opts.object_name = false;
  for (std::size_t i = 0; i < done.size(); ++i) {
    Action a = done[i];
    if (!a.step_index) a.step_index = static_cast<int>(i + 1);
    if (i > 0) out += " ";
    out += encode_action(a, opts);
  }
  return out;
}

struct HumanTurnSpec {
  const TaskSpec* task = nullptr;
  const std::map<std::string, RefFrame>* frames = nullptr;
  std::vector<Action> history;  // completed actions, in order
  BaseRecipe base = BaseRecipe::inBC;
  bool include_history = true;
  std::optional<std::string> inference_prompt;  // inserted after the format block
};

// The single source of truth for query text layout: image placeholder, task
// line, format block (plain-text recipes), optional inference prompt, then
// the history clause. Lines are newline-joined.
inline std::string render_human_turn(const HumanTurnSpec& spec) {
  std::string out = kImagePlaceholder;
  out += "\n";
  out += render_task_text(*spec.task, *spec.frames, spec.base);
  if (uses_format_block(spec.base)) {
    out += "\n";
    out += kActionFormatBlock;
  }
  if (spec.inference_prompt) {
    out += "\n";
    out += *spec.inference_prompt;
  }
  if (spec.include_history && !spec.history.empty()) {
    out += "\n";
    out += history_clause(spec.history);
  }
  return out;
}

// ---------------------------------------------------------------------------
// behavior-cloning conversations

namespace detail {

inline Conversation build_step_conversation(const Trajectory& t, std::size_t k,
                                            const GenRecipe& recipe) {
  HumanTurnSpec spec;
  spec.task = &t.task;
  spec.frames = &t.ref_frames;
  spec.base = recipe.base;
  spec.include_history = recipe.history;
  spec.history = action_history(t, k);

  Conversation conv;
  conv.id = t.id + "/" + to_string(recipe.base) + "/" + std::to_string(k);
  conv.image_ref = t.steps[k].observation.image_ref;
  conv.human = render_human_turn(spec);

  if (recipe.base == BaseRecipe::RT2 || recipe.base == BaseRecipe::D_RT2) {
    conv.assistant = rt2_render(rt2_encode(t.steps[k].action));
    return conv;
  }

  std::size_t last = recipe.multi_step_plan ? t.steps.size() : k + 1;
  for (std::size_t i = k; i < last; ++i) {
    Action a = t.steps[i].action;
    a.step_index = static_cast<int>(i + 1);
    if (i > k) conv.assistant += "\n";
    conv.assistant += encode_action(a);
  }
  return conv;
}

}  // namespace detail

// One conversation per trajectory step under the recipe's base variant.
inline std::vector<Conversation> build_base_conversations(const Trajectory& t,
                                                          const GenRecipe& recipe) {
  std::vector<Conversation> out;
  out.reserve(t.steps.size());
  for (std::size_t k = 0; k < t.steps.size(); ++k)
    out.push_back(detail::build_step_conversation(t, k, recipe));
  return out;
}

inline std::vector<Conversation> build_inbc(const Trajectory& t, GenRecipe recipe) {
  recipe.base = BaseRecipe::inBC;
  return build_base_conversations(t, recipe);
}

inline std::vector<Conversation> build_dinbc(const Trajectory& t, GenRecipe recipe) {
  recipe.base = BaseRecipe::D_inBC;
  return build_base_conversations(t, recipe);
}

inline std::vector<Conversation> build_rt2(const Trajectory& t, GenRecipe recipe) {
  if (recipe.base != BaseRecipe::D_RT2) recipe.base = BaseRecipe::RT2;
  return build_base_conversations(t, recipe);
}

// ---------------------------------------------------------------------------
// auxiliary datasets

// A single-image sample source: a step observation, the final observation, or
// (when enabled) a task reference frame.
struct SceneSource {
  std::string key;        // stable sample key, unique within the run
  std::string image_ref;
  SceneState scene;
};

// A consecutive observation pair with the action between them.
struct TransitionSource {
  std::string key;
  std::string image_ref;  // first timestamp; shown to the model
  SceneState before;
  Action action;
  SceneState after;       // described as text, never shown
};

inline std::vector<SceneSource> collect_scene_sources(const Trajectory& t,
                                                      bool use_reference_images,
                                                      const FrameImageResolver& resolver) {
  std::vector<SceneSource> out;
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const Observation& obs = t.steps[k].observation;
    out.push_back({t.id + "/obs" + std::to_string(k), obs.image_ref, obs.scene});
  }
  if (t.final_observation) {
    out.push_back({t.id + "/obs" + std::to_string(t.steps.size()),
                   t.final_observation->image_ref, t.final_observation->scene});
  }
  if (use_reference_images && resolver) {
    for (const auto& [id, frame] : t.ref_frames) {
      if (frame.content.objects.empty()) continue;
      out.push_back({t.id + "/frame/" + id, resolver(t, frame), frame.content});
    }
  }
  return out;
}

inline std::vector<TransitionSource> collect_transitions(const Trajectory& t) {
  std::vector<TransitionSource> out;
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const SceneState* after = nullptr;
    if (k + 1 < t.steps.size())
      after = &t.steps[k + 1].observation.scene;
    else if (t.final_observation)
      after = &t.final_observation->scene;
    if (!after) continue;
    out.push_back({t.id + "/step" + std::to_string(k), t.steps[k].observation.image_ref,
                   t.steps[k].observation.scene, t.steps[k].action, *after});
  }
  return out;
}

namespace detail {

inline bool name_unique(const SceneState& scene, const std::string& name) {
  int count = 0;
  for (const ObjectInstance& o : scene.objects)
    if (o.name == name) ++count;
  return count == 1;
}

inline std::string human_with_image(const std::string& body) {
  return std::string(kImagePlaceholder) + "\n" + body;
}

// Indices of objects whose name is unique within the scene.
inline std::vector<std::size_t> unambiguous_indices(const SceneState& scene) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scene.objects.size(); ++i)
    if (name_unique(scene, scene.objects[i].name)) out.push_back(i);
  return out;
}

// Lower-case the leading letter and drop the trailing period for mid-sentence
// embedding of an action.
inline std::string embed_action(const Action& a) {
  ActionTextOptions opts;
  opts.step_prefix = false;
  opts.sentence_period = false;
  opts.lowercase_lead = true;
  return encode_action(a, opts);
}

inline std::string strip_trailing_period(std::string s) {
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace detail

// Asks for one seeded object's bounding box. Skips scenes where the chosen
// object's name is ambiguous.
inline std::optional<Conversation> build_localization(const SceneSource& src,
                                                      const GenRecipe& recipe) {
  if (src.scene.objects.empty()) return std::nullopt;
  std::uint64_t h = keyed_hash(recipe.seed, src.key + "|localization/object");
  const ObjectInstance& obj = src.scene.objects[h % src.scene.objects.size()];
  if (!detail::name_unique(src.scene, obj.name)) return std::nullopt;

  const char* tpl = pick_template(recipe.seed, src.key, TemplateKind::localization);
  Conversation conv;
  conv.id = src.key + "/localization";
  conv.image_ref = src.image_ref;
  conv.human = detail::human_with_image(
      fill_template(tpl, {{"object", name_span(obj.name)}}));
  conv.assistant = format_object_clause(obj) + ".";
  return conv;
}

// Asks for every object in the scene.
inline std::optional<Conversation> build_detection(const SceneSource& src,
                                                   const GenRecipe& recipe) {
  if (src.scene.objects.empty()) return std::nullopt;
  const char* tpl = pick_template(recipe.seed, src.key, TemplateKind::detection);
  Conversation conv;
  conv.id = src.key + "/detection";
  conv.image_ref = src.image_ref;
  conv.human = detail::human_with_image(tpl);
  conv.assistant = encode_scene(src.scene);
  return conv;
}

// Shows the successor scene as text and asks for the action that causes it.
inline std::optional<Conversation> build_action_prediction(const TransitionSource& src,
                                                           const GenRecipe& recipe) {
  const char* tpl = pick_template(recipe.seed, src.key, TemplateKind::action_prediction);
  Conversation conv;
  conv.id = src.key + "/action_prediction";
  conv.image_ref = src.image_ref;
  conv.human = detail::human_with_image(
      fill_template(tpl, {{"scene", encode_scene(src.after)}}) + " " + kActionFormatBlock);
  ActionTextOptions opts;
  opts.step_prefix = false;
  conv.assistant = encode_action(src.action, opts);
  return conv;
}

// States the action as text and asks for the resulting scene.
inline std::optional<Conversation> build_future_prediction(const TransitionSource& src,
                                                           const GenRecipe& recipe) {
  const char* tpl = pick_template(recipe.seed, src.key, TemplateKind::future_prediction);
  Conversation conv;
  conv.id = src.key + "/future_prediction";
  conv.image_ref = src.image_ref;
  conv.human = detail::human_with_image(
      fill_template(tpl, {{"pick and place", detail::embed_action(src.action)}}));
  conv.assistant = encode_scene(src.after);
  return conv;
}

// Relative position of a seeded object pair, with a distinct pair from the
// same scene as the format exemplar.
inline std::optional<Conversation> build_spatial(const SceneSource& src,
                                                 const GenRecipe& recipe) {
  std::vector<std::size_t> ok = detail::unambiguous_indices(src.scene);
  std::size_t m = ok.size();
  if (m < 3) return std::nullopt;  // need a chosen pair plus a distinct exemplar pair

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(ok[i], ok[j]);

  std::uint64_t hp = keyed_hash(recipe.seed, src.key + "|spatial/pair");
  std::size_t chosen = hp % pairs.size();
  std::uint64_t he = keyed_hash(recipe.seed, src.key + "|spatial/example");
  std::size_t exemplar = he % (pairs.size() - 1);
  if (exemplar >= chosen) ++exemplar;

  auto ordered = [&](std::size_t pair_idx, const char* salt) {
    auto [a, b] = pairs[pair_idx];
    if (keyed_hash(recipe.seed, src.key + salt) & 1) std::swap(a, b);
    return std::pair<const ObjectInstance&, const ObjectInstance&>(src.scene.objects[a],
                                                                   src.scene.objects[b]);
  };
  auto [ego, ref] = ordered(chosen, "|spatial/order");
  auto [ex_ego, ex_ref] = ordered(exemplar, "|spatial/example_order");

  RelationText answer = encode_spatial_relation(ego, ref);
  RelationText example = encode_spatial_relation(ex_ego, ex_ref);

  const char* tpl = pick_template(recipe.seed, src.key, TemplateKind::spatial);
  Conversation conv;
  conv.id = src.key + "/spatial";
  conv.image_ref = src.image_ref;
  conv.human = detail::human_with_image(
      fill_template(tpl, {{"ego_obj", name_span(ego.name)},
                          {"ref_obj", name_span(ref.name)},
                          {"example", detail::strip_trailing_period(example.text)}}));
  conv.assistant = answer.text;
  return conv;
}

// Distance change of a seeded object pair across a transition, with a
// distinct pair from the same transition as the format exemplar.
inline std::optional<Conversation> build_temporal(const TransitionSource& src,
                                                  const GenRecipe& recipe) {
  // Objects present and unambiguous in both scenes.
  std::vector<std::pair<std::size_t, std::size_t>> common;  // (index before, index after)
  for (std::size_t i = 0; i < src.before.objects.size(); ++i) {
    const std::string& name = src.before.objects[i].name;
    if (!detail::name_unique(src.before, name) || !detail::name_unique(src.after, name))
      continue;
    for (std::size_t j = 0; j < src.after.objects.size(); ++j) {
      if (src.after.objects[j].name == name) {
        common.emplace_back(i, j);
        break;
      }
    }
  }
  std::size_t m = common.size();
  if (m < 3) return std::nullopt;

  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // indices into `common`
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);

  std::uint64_t hp = keyed_hash(recipe.seed, src.key + "|temporal/pair");
  std::size_t chosen = hp % pairs.size();
  std::uint64_t he = keyed_hash(recipe.seed, src.key + "|temporal/example");
  std::size_t exemplar = he % (pairs.size() - 1);
  if (exemplar >= chosen) ++exemplar;

  auto relation = [&](std::size_t pair_idx, const char* salt) {
    auto [a, b] = pairs[pair_idx];
    if (keyed_hash(recipe.seed, src.key + salt) & 1) std::swap(a, b);
    const auto& [e0, e1] = common[a];
    const auto& [r0, r1] = common[b];
    return encode_temporal_relation(src.before.objects[e0], src.before.objects[r0],
                                    src.after.objects[e1], src.after.objects[r1]);
  };

  auto names = [&](std::size_t pair_idx, const char* salt) {
    auto [a, b] = pairs[pair_idx];
    if (keyed_hash(recipe.seed, src.key + salt) & 1) std::swap(a, b);
    return std::pair<std::string, std::string>(src.before.objects[common[a].first].name,
                                               src.before.objects[common[b].first].name);
  };

  RelationText answer = relation(chosen, "|temporal/order");
  RelationText example = relation(exemplar, "|temporal/example_order");
  auto [ego_name, ref_name] = names(chosen, "|temporal/order");

  const char* tpl = pick_template(recipe.seed, src.key, TemplateKind::temporal);
  Conversation conv;
  conv.id = src.key + "/temporal";
  conv.image_ref = src.image_ref;
  conv.human = detail::human_with_image(
      fill_template(tpl, {{"scene", encode_scene(src.after)},
                          {"ego_obj", name_span(ego_name)},
                          {"ref_obj", name_span(ref_name)},
                          {"example", detail::strip_trailing_period(example.text)}}));
  conv.assistant = answer.text;
  return conv;
}

// ---------------------------------------------------------------------------
// per-trajectory pipeline and the mixer

struct TrajectoryYield {
  std::vector<Conversation> base;
  std::array<std::vector<Conversation>, 6> aux;  // indexed by AuxKind
  std::vector<std::string> problems;             // non-empty means skipped
};

inline TrajectoryYield build_trajectory_yield(const Trajectory& t, const GenRecipe& recipe,
                                              const FrameImageResolver& resolver = {}) {
  TrajectoryYield yield;
  std::vector<std::string> violations = validate_trajectory(t);
  if (!violations.empty()) {
    for (std::string& v : violations) yield.problems.push_back(t.id + ": " + v);
    return yield;
  }
  try {
    yield.base = build_base_conversations(t, recipe);
  } catch (const TrajectoryBuildError& e) {
    yield.problems.push_back(t.id + ": " + e.what());
    return yield;
  }

  bool any_scene_kind = recipe.aux[AuxKind::localization].enabled ||
                        recipe.aux[AuxKind::detection].enabled ||
                        recipe.aux[AuxKind::spatial].enabled;
  bool any_transition_kind = recipe.aux[AuxKind::action_prediction].enabled ||
                             recipe.aux[AuxKind::future_prediction].enabled ||
                             recipe.aux[AuxKind::temporal].enabled;

  if (any_scene_kind) {
    // Scene sources differ per dataset when reference sourcing is split.
    for (AuxKind kind : {AuxKind::localization, AuxKind::detection, AuxKind::spatial}) {
      if (!recipe.aux[kind].enabled) continue;
      std::vector<SceneSource> sources =
          collect_scene_sources(t, recipe.aux[kind].use_reference_images, resolver);
      for (const SceneSource& src : sources) {
        std::optional<Conversation> conv;
        if (kind == AuxKind::localization)
          conv = build_localization(src, recipe);
        else if (kind == AuxKind::detection)
          conv = build_detection(src, recipe);
        else
          conv = build_spatial(src, recipe);
        if (conv) yield.aux[static_cast<std::size_t>(kind)].push_back(std::move(*conv));
      }
    }
  }

  if (any_transition_kind) {
    std::vector<TransitionSource> transitions = collect_transitions(t);
    for (const TransitionSource& src : transitions) {
      if (recipe.aux[AuxKind::action_prediction].enabled)
        if (auto conv = build_action_prediction(src, recipe))
          yield.aux[static_cast<std::size_t>(AuxKind::action_prediction)].push_back(
              std::move(*conv));
      if (recipe.aux[AuxKind::future_prediction].enabled)
        if (auto conv = build_future_prediction(src, recipe))
          yield.aux[static_cast<std::size_t>(AuxKind::future_prediction)].push_back(
              std::move(*conv));
      if (recipe.aux[AuxKind::temporal].enabled)
        if (auto conv = build_temporal(src, recipe))
          yield.aux[static_cast<std::size_t>(AuxKind::temporal)].push_back(std::move(*conv));
    }
  }
  return yield;
}

// round(ratio * base) half away from zero, floored at 1 while any candidates
// exist, capped at the pool size.
inline std::size_t mix_target(double ratio, std::size_t base_count, std::size_t pool_size) {
  if (ratio <= 0.0 || pool_size == 0) return 0;
  long long target = std::llround(ratio * static_cast<double>(base_count));
  if (target < 1) target = 1;
  if (static_cast<std::size_t>(target) > pool_size) target = static_cast<long long>(pool_size);
  return static_cast<std::size_t>(target);
}

struct MixReport {
  std::size_t base_count = 0;
  std::array<std::size_t, 6> aux_pool{};     // candidates available
  std::array<std::size_t, 6> aux_sampled{};  // candidates kept
  std::size_t total = 0;
};

// base ++ per-dataset samples (without replacement), then a seeded shuffle of
// the whole list.
inline std::vector<Conversation> mix(std::vector<Conversation> base,
                                     const std::array<std::vector<Conversation>, 6>& aux,
                                     const AuxConfig& cfg, std::uint64_t seed,
                                     MixReport* report = nullptr) {
  if (base.empty()) throw std::invalid_argument("mix: base dataset is empty");
  MixReport local;
  local.base_count = base.size();

  std::vector<Conversation> out = std::move(base);
  for (AuxKind kind : kAllAuxKinds) {
    std::size_t idx = static_cast<std::size_t>(kind);
    const std::vector<Conversation>& pool = aux[idx];
    local.aux_pool[idx] = pool.size();
    if (!cfg[kind].enabled) continue;
    std::size_t take = mix_target(cfg[kind].ratio, local.base_count, pool.size());
    local.aux_sampled[idx] = take;
    if (take == 0) continue;
    Rng rng(seed, std::string("mix/") + to_string(kind));
    for (std::size_t i : sample_indices(pool.size(), take, rng)) out.push_back(pool[i]);
  }

  Rng shuffle_rng(seed, "mix/shuffle");
  deterministic_shuffle(out, shuffle_rng);
  local.total = out.size();
  if (report) *report = local;
  return out;
}

// Uniform subsample of whole trajectories, original order preserved.
inline std::vector<Trajectory> subsample(const std::vector<Trajectory>& trajs,
                                         std::size_t count, std::uint64_t seed) {
  if (count > trajs.size())
    throw std::invalid_argument("subsample: count " + std::to_string(count) +
                                " exceeds population " + std::to_string(trajs.size()));
  Rng rng(seed, "subsample");
  std::vector<Trajectory> out;
  out.reserve(count);
  for (std::size_t i : sample_indices(trajs.size(), count, rng)) out.push_back(trajs[i]);
  return out;
}

}  // namespace tabletalk
