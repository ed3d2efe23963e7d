// Command-line front end for the tabletop conversation-data pipeline:
// record expert trajectories, compile conversation datasets, evaluate
// policies closed-loop, and poke at decorated text or emitted files.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tabletalk/core.hpp"
#include "tabletalk/datagen.hpp"
#include "tabletalk/jsonl.hpp"
#include "tabletalk/parallel.hpp"
#include "tabletalk/pixmap.hpp"
#include "tabletalk/policy.hpp"
#include "tabletalk/promptbank.hpp"
#include "tabletalk/simenv.hpp"
#include "tabletalk/textcodec.hpp"

namespace {

using tabletalk::Json;

// Config mistakes exit 2; runtime failures exit 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<tabletalk::TaskKind> parse_kinds(const std::string& csv) {
  std::vector<tabletalk::TaskKind> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    tabletalk::TaskKind kind;
    try {
      kind = tabletalk::task_kind_from_string(item);
    } catch (const std::exception&) {
      throw ConfigError("unknown task kind: " + item);
    }
    if (kind == tabletalk::TaskKind::other) throw ConfigError("cannot simulate task kind: other");
    out.push_back(kind);
  }
  if (out.empty()) throw ConfigError("no task kinds given");
  return out;
}

std::vector<int> parse_levels(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    int level = 0;
    try {
      level = std::stoi(item);
    } catch (const std::exception&) {
      throw ConfigError("bad level: " + item);
    }
    if (level < 1 || level > 3) throw ConfigError("level must be 1, 2, or 3");
    out.push_back(level);
  }
  if (out.empty()) throw ConfigError("no levels given");
  return out;
}

tabletalk::AuxKind aux_kind_from_string(const std::string& s) {
  for (tabletalk::AuxKind k : tabletalk::kAllAuxKinds)
    if (s == tabletalk::to_string(k)) return k;
  throw ConfigError("unknown auxiliary dataset: " + s);
}

tabletalk::AuxConfig resolve_aux(const std::string& preset,
                                 const std::vector<std::string>& ratio_specs) {
  tabletalk::AuxConfig cfg;
  if (!preset.empty() && preset != "none") {
    try {
      cfg = tabletalk::aux_preset(preset);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  for (const std::string& spec : ratio_specs) {
    std::size_t eq = spec.find('=');
    if (eq == std::string::npos) throw ConfigError("expected kind=ratio, got: " + spec);
    tabletalk::AuxKind kind = aux_kind_from_string(spec.substr(0, eq));
    double ratio = 0.0;
    try {
      ratio = std::stod(spec.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad ratio in: " + spec);
    }
    if (ratio < 0.0) throw ConfigError("ratio must be non-negative: " + spec);
    cfg[kind].enabled = ratio > 0.0;
    cfg[kind].ratio = ratio;
  }
  return cfg;
}

Json aux_config_json(const tabletalk::AuxConfig& cfg) {
  Json out = Json::object();
  for (tabletalk::AuxKind kind : tabletalk::kAllAuxKinds) {
    const tabletalk::AuxDatasetConfig& d = cfg[kind];
    out[tabletalk::to_string(kind)] = {
        {"enabled", d.enabled},
        {"ratio", d.ratio},
        {"use_reference_images", d.use_reference_images},
    };
  }
  return out;
}

void write_manifest(const std::string& output_path, const Json& manifest) {
  std::string path = output_path + ".manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << manifest.dump(2) << "\n";
}

void ensure_parent_dir(const std::string& path) {
  std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateConfig {
  std::string output;
  std::uint64_t seed = 0;
  int episodes = 20;
  std::string kinds = "place_into,rotate,put_on_top,stack_order";
  int level = 1;
  int max_steps = 8;
  bool skip_images = false;
  int jobs = 1;
};

int cmd_simulate(const SimulateConfig& cfg) {
  std::vector<tabletalk::TaskKind> kinds = parse_kinds(cfg.kinds);
  if (cfg.episodes < 0) throw ConfigError("episodes must be non-negative");
  ensure_parent_dir(cfg.output);
  std::filesystem::path out_dir = std::filesystem::path(cfg.output).parent_path();

  tabletalk::RecorderOptions opt;
  opt.level = cfg.level;
  opt.max_steps = cfg.max_steps;
  opt.write_images = !cfg.skip_images;
  opt.image_dir = out_dir / "images";
  opt.ref_prefix = "images/";

  std::vector<tabletalk::Trajectory> trajectories =
      tabletalk::parallel_map<tabletalk::Trajectory>(
          static_cast<std::size_t>(cfg.episodes), cfg.jobs, [&](std::size_t i) {
            tabletalk::TaskKind kind = kinds[i % kinds.size()];
            return tabletalk::record_trajectory(kind, cfg.seed + i, opt);
          });
  tabletalk::write_jsonl_file(cfg.output, trajectories);

  std::map<std::string, int> counts;
  for (std::size_t i = 0; i < trajectories.size(); ++i)
    counts[tabletalk::to_string(kinds[i % kinds.size()])] += 1;

  Json manifest = {
      {"command", "simulate"},
      {"output", cfg.output},
      {"seed", cfg.seed},
      {"episodes", cfg.episodes},
      {"level", cfg.level},
      {"max_steps", cfg.max_steps},
      {"kinds", Json(counts)},
      {"images", !cfg.skip_images},
  };
  write_manifest(cfg.output, manifest);

  for (const auto& [kind, n] : counts) std::cout << kind << ": " << n << "\n";
  std::cout << "total: " << trajectories.size() << " -> " << cfg.output << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateConfig {
  std::string input;
  std::string output;
  std::string base = "inBC";
  std::string aux_preset;
  std::vector<std::string> aux_ratios;
  std::uint64_t seed = 0;
  bool history = true;
  bool plan = true;
  int subsample = 0;
  int jobs = 1;
};

int cmd_generate(const GenerateConfig& cfg) {
  tabletalk::GenRecipe recipe;
  try {
    recipe.base = tabletalk::base_recipe_from_string(cfg.base);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  recipe.aux = resolve_aux(cfg.aux_preset, cfg.aux_ratios);
  recipe.seed = cfg.seed;
  recipe.history = cfg.history;
  recipe.multi_step_plan = cfg.plan;

  std::vector<tabletalk::JsonlError> line_errors;
  std::vector<tabletalk::Trajectory> trajectories =
      tabletalk::read_trajectories(cfg.input, &line_errors);
  for (const tabletalk::JsonlError& e : line_errors)
    std::cerr << cfg.input << ":" << e.line << ": " << e.message << "\n";

  if (cfg.subsample > 0) {
    if (static_cast<std::size_t>(cfg.subsample) > trajectories.size())
      throw ConfigError("subsample exceeds trajectory count");
    trajectories = tabletalk::subsample(trajectories, cfg.subsample, cfg.seed);
  }
  if (trajectories.empty()) throw std::runtime_error("no usable trajectories in " + cfg.input);

  ensure_parent_dir(cfg.output);
  std::filesystem::path out_dir = std::filesystem::path(cfg.output).parent_path();
  tabletalk::FrameImageResolver resolver = [&](const tabletalk::Trajectory&,
                                               const tabletalk::RefFrame& frame) {
    tabletalk::RecorderOptions frame_opt;
    frame_opt.write_images = true;
    frame_opt.image_dir = out_dir / "images";
    frame_opt.ref_prefix = "images/";
    return tabletalk::detail::emit_observation_image(frame.content, frame_opt);
  };

  std::vector<tabletalk::TrajectoryYield> yields =
      tabletalk::parallel_map<tabletalk::TrajectoryYield>(
          trajectories.size(), cfg.jobs, [&](std::size_t i) {
            return tabletalk::build_trajectory_yield(trajectories[i], recipe, resolver);
          });

  std::size_t problem_count = 0;
  std::vector<tabletalk::Conversation> base;
  std::array<std::vector<tabletalk::Conversation>, 6> aux;
  for (tabletalk::TrajectoryYield& y : yields) {
    for (const std::string& p : y.problems) {
      std::cerr << p << "\n";
      ++problem_count;
    }
    base.insert(base.end(), std::make_move_iterator(y.base.begin()),
                std::make_move_iterator(y.base.end()));
    for (std::size_t k = 0; k < aux.size(); ++k)
      aux[k].insert(aux[k].end(), std::make_move_iterator(y.aux[k].begin()),
                    std::make_move_iterator(y.aux[k].end()));
  }
  if (base.empty()) throw std::runtime_error("no conversations produced from " + cfg.input);

  tabletalk::MixReport report;
  std::vector<tabletalk::Conversation> mixed =
      tabletalk::mix(std::move(base), aux, recipe.aux, recipe.seed, &report);
  tabletalk::write_jsonl_file(cfg.output, mixed);

  Json datasets = Json::object();
  datasets["base"] = {{"recipe", tabletalk::to_string(recipe.base)},
                      {"count", report.base_count}};
  for (tabletalk::AuxKind kind : tabletalk::kAllAuxKinds) {
    std::size_t idx = static_cast<std::size_t>(kind);
    if (!recipe.aux[kind].enabled) continue;
    datasets[tabletalk::to_string(kind)] = {
        {"count", report.aux_sampled[idx]},
        {"pool", report.aux_pool[idx]},
        {"ratio", recipe.aux[kind].ratio},
        {"use_reference_images", recipe.aux[kind].use_reference_images},
    };
  }
  Json manifest = {
      {"command", "generate"},
      {"input", cfg.input},
      {"output", cfg.output},
      {"seed", cfg.seed},
      {"recipe",
       {{"base", tabletalk::to_string(recipe.base)},
        {"history", recipe.history},
        {"multi_step_plan", recipe.multi_step_plan},
        {"aux", aux_config_json(recipe.aux)}}},
      {"trajectories", trajectories.size()},
      {"datasets", datasets},
      {"total", report.total},
      {"input_line_errors", line_errors.size()},
      {"trajectory_problems", problem_count},
  };
  write_manifest(cfg.output, manifest);

  std::cout << "base[" << tabletalk::to_string(recipe.base) << "]: " << report.base_count << "\n";
  for (tabletalk::AuxKind kind : tabletalk::kAllAuxKinds) {
    std::size_t idx = static_cast<std::size_t>(kind);
    if (!recipe.aux[kind].enabled) continue;
    std::cout << tabletalk::to_string(kind) << ": " << report.aux_sampled[idx] << " of "
              << report.aux_pool[idx] << "\n";
  }
  std::cout << "total: " << report.total << " -> " << cfg.output << "\n";
  return line_errors.empty() && problem_count == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateConfig {
  std::string output;
  std::string policy = "oracle";
  std::string url;
  std::string replay_file;
  std::string base = "inBC";
  std::string kinds = "place_into,rotate,put_on_top,stack_order";
  std::string levels = "1";
  std::uint64_t seed = 0;
  int episodes = 20;
  int max_steps = 8;
  int timeout = 60;
  int jobs = 1;
};

struct EpisodeRow {
  std::uint64_t seed = 0;
  tabletalk::TaskKind kind = tabletalk::TaskKind::place_into;
  int level = 1;
  tabletalk::EpisodeResult result;
};

Json row_json(const EpisodeRow& row) {
  Json j = {{"seed", row.seed},
            {"kind", tabletalk::to_string(row.kind)},
            {"level", row.level},
            {"success", row.result.success},
            {"steps", row.result.steps_taken}};
  if (row.result.failure_reason) j["failure_reason"] = *row.result.failure_reason;
  return j;
}

tabletalk::RemotePolicyOptions parse_url(const std::string& url, int timeout) {
  std::string rest = url;
  const std::string scheme = "http://";
  if (rest.rfind(scheme, 0) == 0) rest = rest.substr(scheme.size());
  if (!rest.empty() && rest.back() == '/') rest.pop_back();
  std::size_t colon = rest.find(':');
  tabletalk::RemotePolicyOptions opt;
  opt.timeout_seconds = timeout;
  if (colon == std::string::npos) throw ConfigError("remote url must be http://host:port");
  opt.host = rest.substr(0, colon);
  try {
    opt.port = std::stoi(rest.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("bad port in remote url: " + url);
  }
  if (opt.host.empty() || opt.port <= 0) throw ConfigError("remote url must be http://host:port");
  return opt;
}

// Loads assistant texts from a generated dataset, grouped per trajectory id
// and ordered by step.
void load_replay_scripts(const std::string& path, tabletalk::ReplayPolicy& policy) {
  std::vector<tabletalk::JsonlError> errors;
  std::vector<tabletalk::Conversation> convs = tabletalk::read_conversations(path, &errors);
  for (const tabletalk::JsonlError& e : errors)
    std::cerr << path << ":" << e.line << ": " << e.message << "\n";
  std::map<std::string, std::map<int, std::string>> grouped;
  for (const tabletalk::Conversation& c : convs) {
    std::size_t last = c.id.rfind('/');
    if (last == std::string::npos) continue;
    std::size_t mid = c.id.rfind('/', last - 1);
    if (mid == std::string::npos) continue;
    int step = 0;
    try {
      step = std::stoi(c.id.substr(last + 1));
    } catch (const std::exception&) {
      continue;
    }
    grouped[c.id.substr(0, mid)][step] = c.assistant;
  }
  for (auto& [episode, steps] : grouped) {
    std::vector<std::string> texts;
    for (auto& [step, text] : steps) texts.push_back(std::move(text));
    policy.add(episode, std::move(texts));
  }
}

// Like parallel_map, but keeps completed rows when a worker throws so partial
// results can be flushed before aborting.
std::exception_ptr run_episode_pool(std::size_t count, int jobs,
                                    const std::function<EpisodeRow(std::size_t)>& fn,
                                    std::vector<std::optional<EpisodeRow>>& rows) {
  rows.assign(count, std::nullopt);
  if (jobs < 1) jobs = 1;
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        rows[i] = fn(i);
      } catch (...) {
        return std::current_exception();
      }
    }
    return nullptr;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= count) return;
          rows[i] = fn(i);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (std::exception_ptr& e : errors)
    if (e) return e;
  return nullptr;
}

int cmd_evaluate(const EvaluateConfig& cfg) {
  std::vector<tabletalk::TaskKind> kinds = parse_kinds(cfg.kinds);
  std::vector<int> levels = parse_levels(cfg.levels);
  if (cfg.episodes < 1) throw ConfigError("episodes must be positive");
  if (cfg.policy != "oracle" && cfg.policy != "replay" && cfg.policy != "remote")
    throw ConfigError("policy must be oracle, replay, or remote");
  if (cfg.policy == "remote" && cfg.url.empty())
    throw ConfigError("remote policy needs --url");
  if (cfg.policy == "replay" && cfg.replay_file.empty())
    throw ConfigError("replay policy needs --replay-file");

  tabletalk::GenRecipe recipe;
  try {
    recipe.base = tabletalk::base_recipe_from_string(cfg.base);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  recipe.seed = cfg.seed;

  ensure_parent_dir(cfg.output);
  std::filesystem::path out_dir = std::filesystem::path(cfg.output).parent_path();
  bool remote = cfg.policy == "remote";

  tabletalk::RemotePolicy remote_policy(
      remote ? parse_url(cfg.url, cfg.timeout) : tabletalk::RemotePolicyOptions{});
  tabletalk::ReplayPolicy replay_policy;
  if (cfg.policy == "replay") load_replay_scripts(cfg.replay_file, replay_policy);

  struct Spec {
    tabletalk::TaskKind kind;
    int level;
    std::uint64_t seed;
  };
  std::vector<Spec> specs;
  for (int level : levels)
    for (tabletalk::TaskKind kind : kinds)
      for (int e = 0; e < cfg.episodes; ++e)
        specs.push_back({kind, level, cfg.seed + static_cast<std::uint64_t>(e)});

  // The replay cursor is per-policy state, so replay runs single-threaded.
  int jobs = cfg.policy == "replay" ? 1 : cfg.jobs;

  auto run_one = [&](std::size_t i) {
    const Spec& spec = specs[i];
    tabletalk::EnvState env =
        tabletalk::generate_task(spec.kind, tabletalk::default_catalog(), spec.seed, spec.level);
    tabletalk::EpisodeOptions opt;
    opt.max_steps = cfg.max_steps;
    opt.recipe = recipe;
    opt.episode_id = std::string(tabletalk::to_string(spec.kind)) + "-L" +
                     std::to_string(spec.level) + "-s" + std::to_string(spec.seed);
    opt.write_images = remote;
    opt.image_dir = out_dir / "images";
    opt.ref_prefix = "images/";

    EpisodeRow row{spec.seed, spec.kind, spec.level, {}};
    if (cfg.policy == "oracle") {
      tabletalk::OraclePolicy policy;
      row.result = tabletalk::run_episode(policy, env, opt);
    } else if (cfg.policy == "replay") {
      row.result = tabletalk::run_episode(replay_policy, env, opt);
    } else {
      row.result = tabletalk::run_episode(remote_policy, env, opt);
    }
    return row;
  };

  std::vector<std::optional<EpisodeRow>> rows;
  std::exception_ptr failure = run_episode_pool(specs.size(), jobs, run_one, rows);

  std::ofstream out(cfg.output, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + cfg.output);
  for (const std::optional<EpisodeRow>& row : rows)
    if (row) out << row_json(*row).dump() << "\n";
  out.close();

  struct Tally {
    int done = 0;
    int wins = 0;
  };
  std::map<std::pair<int, std::string>, Tally> table;
  for (const std::optional<EpisodeRow>& row : rows) {
    if (!row) continue;
    Tally& t = table[{row->level, tabletalk::to_string(row->kind)}];
    t.done += 1;
    t.wins += row->result.success ? 1 : 0;
  }

  Json summary = Json::array();
  std::cout << "level kind          episodes success\n";
  for (const auto& [key, tally] : table) {
    double rate = tally.done ? 100.0 * tally.wins / tally.done : 0.0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", rate);
    std::cout << key.first << "     " << key.second;
    for (std::size_t pad = key.second.size(); pad < 14; ++pad) std::cout << ' ';
    std::cout << tally.done << "       " << buf << "%\n";
    summary.push_back({{"level", key.first},
                       {"kind", key.second},
                       {"episodes", tally.done},
                       {"success_rate", rate}});
  }

  Json manifest = {
      {"command", "evaluate"},  {"output", cfg.output},     {"policy", cfg.policy},
      {"base", cfg.base},       {"seed", cfg.seed},         {"episodes", cfg.episodes},
      {"max_steps", cfg.max_steps}, {"summary", summary},
  };
  write_manifest(cfg.output, manifest);

  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      std::cerr << "evaluation aborted: " << e.what() << "\n";
    }
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// parse

struct ParseConfig {
  std::string text;
  std::string input;
};

int cmd_parse(const ParseConfig& cfg) {
  if (cfg.text.empty() == cfg.input.empty())
    throw ConfigError("give exactly one of --text or --input");
  std::string text = cfg.text;
  if (!cfg.input.empty()) {
    std::ifstream in(cfg.input, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + cfg.input);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }

  Json dump = Json::object();

  tabletalk::ActionParseResult actions = tabletalk::parse_actions(text);
  dump["actions"] = Json::array();
  for (const tabletalk::Action& a : actions.actions) dump["actions"].push_back(to_json(a));
  dump["action_issues"] = Json::array();
  for (const tabletalk::ParseIssue& issue : actions.issues)
    dump["action_issues"].push_back({{"offset", issue.offset}, {"message", issue.message}});

  dump["scenes"] = Json::array();
  for (const tabletalk::SceneParseResult& s : tabletalk::parse_all_scenes(text))
    if (s.scene) dump["scenes"].push_back(to_json(*s.scene));

  dump["relations"] = Json::array();
  tabletalk::RelationParseResult relation = tabletalk::parse_relation(text);
  if (relation.relation) {
    const tabletalk::RelationRecord& r = *relation.relation;
    dump["relations"].push_back(
        {{"kind", r.kind == tabletalk::RelationKind::spatial ? "spatial" : "temporal"},
         {"ego", r.ego_name},
         {"ref", r.ref_name},
         {"dx", r.dx},
         {"dy", r.dy},
         {"euclid", r.euclid},
         {"descriptor", r.descriptor}});
  }

  dump["token_actions"] = Json::array();
  tabletalk::TokenParseResult tokens = tabletalk::parse_rt2_surrogates(text);
  for (const tabletalk::TokenAction& t : tokens.actions)
    dump["token_actions"].push_back(to_json(tabletalk::rt2_decode(t)));

  dump["counts"] = {{"actions", actions.actions.size()},
                    {"scenes", dump["scenes"].size()},
                    {"relations", dump["relations"].size()},
                    {"token_actions", dump["token_actions"].size()}};
  std::cout << dump.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// inspect

struct InspectConfig {
  std::string input;
};

int cmd_inspect(const InspectConfig& cfg) {
  std::vector<tabletalk::JsonlError> errors;
  Json report = Json::object();
  report["path"] = cfg.input;

  std::vector<tabletalk::Conversation> convs;
  std::vector<tabletalk::Trajectory> trajs = tabletalk::read_trajectories(cfg.input, &errors);
  if (trajs.empty()) {
    errors.clear();
    convs = tabletalk::read_conversations(cfg.input, &errors);
  }

  if (!trajs.empty()) {
    report["type"] = "trajectories";
    report["records"] = trajs.size();
    std::map<std::string, int> kinds;
    std::size_t steps = 0;
    for (const tabletalk::Trajectory& t : trajs) {
      kinds[tabletalk::to_string(t.task.task_kind)] += 1;
      steps += t.steps.size();
    }
    report["task_kinds"] = Json(kinds);
    report["total_steps"] = steps;
  } else {
    report["type"] = convs.empty() ? "unknown" : "conversations";
    report["records"] = convs.size();
    std::map<std::string, int> categories;
    for (const tabletalk::Conversation& c : convs) {
      std::size_t last = c.id.rfind('/');
      std::string tail = last == std::string::npos ? c.id : c.id.substr(last + 1);
      bool numeric = !tail.empty() && tail.find_first_not_of("0123456789") == std::string::npos;
      categories[numeric ? "base" : tail] += 1;
    }
    report["categories"] = Json(categories);
  }

  report["line_errors"] = Json::array();
  for (const tabletalk::JsonlError& e : errors)
    report["line_errors"].push_back({{"line", e.line}, {"message", e.message}});
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabletop trajectory-to-conversation pipeline", "tabletalk"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from an INI config file");

  int jobs = 1;
  app.add_option("--jobs", jobs, "Worker threads for parallel stages")
      ->envname("TABLETALK_JOBS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  SimulateConfig sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Record seeded expert trajectories");
  simulate->add_option("--output", sim.output, "Trajectory JSONL path")->required();
  simulate->add_option("--seed", sim.seed, "Base seed; episode i uses seed+i")
      ->envname("TABLETALK_SEED")
      ->required();
  simulate->add_option("--episodes", sim.episodes, "Number of trajectories")
      ->capture_default_str();
  simulate->add_option("--kinds", sim.kinds, "Comma-separated task kinds")
      ->capture_default_str();
  simulate->add_option("--level", sim.level, "Generalization level")
      ->check(CLI::Range(1, 3))
      ->capture_default_str();
  simulate->add_option("--max-steps", sim.max_steps, "Expert step budget per episode")
      ->capture_default_str();
  simulate->add_flag("--skip-images", sim.skip_images, "Do not write observation images");

  GenerateConfig gen;
  CLI::App* generate = app.add_subcommand("generate", "Compile a conversation dataset");
  generate->add_option("--input", gen.input, "Trajectory JSONL path")
      ->check(CLI::ExistingFile)
      ->required();
  generate->add_option("--output", gen.output, "Dataset JSONL path")->required();
  generate->add_option("--base", gen.base, "Base recipe: inBC, D-inBC, RT2, D-RT2")
      ->capture_default_str();
  generate->add_option("--aux", gen.aux_preset, "Auxiliary preset: A, A*, B, C, D, D*, none");
  generate->add_option("--aux-ratio", gen.aux_ratios,
                       "Per-dataset ratio override, e.g. localization=0.5 (repeatable)");
  generate->add_option("--seed", gen.seed, "Sampling seed")
      ->envname("TABLETALK_SEED")
      ->required();
  generate->add_flag("--history,!--no-history", gen.history, "Include action history clauses")
      ->capture_default_str();
  generate->add_flag("--plan,!--no-plan", gen.plan, "Assistant plans all remaining steps")
      ->capture_default_str();
  generate->add_option("--subsample", gen.subsample,
                       "Use only this many trajectories (0 = all)")
      ->capture_default_str();

  EvaluateConfig eval;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Run closed-loop episodes");
  evaluate->add_option("--output", eval.output, "Results JSONL path")->required();
  evaluate->add_option("--policy", eval.policy, "oracle, replay, or remote")
      ->capture_default_str();
  evaluate->add_option("--url", eval.url, "Remote policy endpoint, http://host:port");
  evaluate->add_option("--replay-file", eval.replay_file, "Dataset JSONL with scripted replies");
  evaluate->add_option("--base", eval.base, "Prompt recipe for queries")->capture_default_str();
  evaluate->add_option("--kinds", eval.kinds, "Comma-separated task kinds")
      ->capture_default_str();
  evaluate->add_option("--levels", eval.levels, "Comma-separated levels")->capture_default_str();
  evaluate->add_option("--seed", eval.seed, "Base seed; episode e uses seed+e")
      ->envname("TABLETALK_SEED")
      ->capture_default_str();
  evaluate->add_option("--episodes", eval.episodes, "Episodes per kind and level")
      ->capture_default_str();
  evaluate->add_option("--max-steps", eval.max_steps, "Step budget per episode")
      ->capture_default_str();
  evaluate->add_option("--timeout", eval.timeout, "Remote request timeout, seconds")
      ->capture_default_str();

  ParseConfig parse_cfg;
  CLI::App* parse = app.add_subcommand("parse", "Extract structures from decorated text");
  parse->add_option("--text", parse_cfg.text, "Text to parse");
  parse->add_option("--input", parse_cfg.input, "File to parse");

  InspectConfig inspect_cfg;
  CLI::App* inspect = app.add_subcommand("inspect", "Summarize an emitted JSONL file");
  inspect->add_option("--input", inspect_cfg.input, "JSONL file")
      ->check(CLI::ExistingFile)
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    std::vector<std::string> pool_problems = tabletalk::validate_pools();
    if (!pool_problems.empty()) {
      for (const std::string& p : pool_problems) std::cerr << "prompt pool: " << p << "\n";
      return 1;
    }
    sim.jobs = gen.jobs = eval.jobs = jobs;
    if (simulate->parsed()) return cmd_simulate(sim);
    if (generate->parsed()) return cmd_generate(gen);
    if (evaluate->parsed()) return cmd_evaluate(eval);
    if (parse->parsed()) return cmd_parse(parse_cfg);
    if (inspect->parsed()) return cmd_inspect(inspect_cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
