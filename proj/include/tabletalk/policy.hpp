#pragma once

// Closed-loop policy contract: prompt assembly that mirrors dataset emission,
// oracle/replay/remote implementations, and the episode loop. The loop asks
// for a full plan every iteration and executes only the first action.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "tabletalk/datagen.hpp"
#include "tabletalk/pixmap.hpp"
#include "tabletalk/promptbank.hpp"
#include "tabletalk/simenv.hpp"
#include "tabletalk/textcodec.hpp"

namespace tabletalk {

struct PolicyQuery {
  std::string image_ref;
  std::string prompt_text;
};

struct PolicyReply {
  std::string raw_text;
  std::vector<Action> parsed_actions;
  std::optional<Action> chosen;  // first parsed action
};

inline PolicyReply make_reply(std::string raw_text) {
  PolicyReply reply;
  reply.raw_text = std::move(raw_text);
  reply.parsed_actions = parse_actions(reply.raw_text).actions;
  if (!reply.parsed_actions.empty()) reply.chosen = reply.parsed_actions.front();
  return reply;
}

// The datagen human turn for the current environment state plus one seeded
// instruction sentence drawn from the inference prompt pool.
inline PolicyQuery assemble_query(const EnvState& env, const std::string& image_ref,
                                  const GenRecipe& recipe, const std::vector<Action>& history,
                                  const std::string& sample_key) {
  HumanTurnSpec spec;
  spec.task = &env.task;
  spec.frames = &env.ref_frames;
  spec.base = recipe.base;
  spec.include_history = recipe.history;
  spec.history = history;
  spec.inference_prompt =
      pick_template(recipe.seed, sample_key, TemplateKind::action_inference);
  return {image_ref, render_human_turn(spec)};
}

class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyReply act(const PolicyQuery& query) = 0;
  virtual void reset(const std::string& episode_id) { (void)episode_id; }
  // Called by the episode loop with the current state before each query;
  // text-only policies ignore it.
  virtual void observe(const EnvState& env) { (void)env; }
};

// Encodes the expert action to decorated text and parses it back, so the
// chosen action has passed through the same codec as any model output.
class OraclePolicy : public Policy {
 public:
  OraclePolicy() = default;
  explicit OraclePolicy(const EnvState& env) : env_(env) {}

  void observe(const EnvState& env) override { env_ = env; }

  PolicyReply act(const PolicyQuery&) override {
    std::optional<Action> a = oracle_policy(env_);
    if (!a) return make_reply("");
    ActionTextOptions opts;
    opts.step_prefix = false;
    return make_reply(encode_action(*a, opts));
  }

 private:
  EnvState env_;
};

// Replays pre-recorded reply texts, keyed by episode, in call order.
class ReplayPolicy : public Policy {
 public:
  void add(const std::string& episode_id, std::vector<std::string> texts) {
    scripts_[episode_id] = std::move(texts);
  }

  void reset(const std::string& episode_id) override {
    episode_ = episode_id;
    cursor_ = 0;
  }

  PolicyReply act(const PolicyQuery&) override {
    auto it = scripts_.find(episode_);
    if (it == scripts_.end() || cursor_ >= it->second.size()) return make_reply("");
    return make_reply(it->second[cursor_++]);
  }

 private:
  std::map<std::string, std::vector<std::string>> scripts_;
  std::string episode_;
  std::size_t cursor_ = 0;
};

// Always replies with the same text; handy for failure-path tests.
class FixedPolicy : public Policy {
 public:
  explicit FixedPolicy(std::string text) : text_(std::move(text)) {}
  PolicyReply act(const PolicyQuery&) override { return make_reply(text_); }

 private:
  std::string text_;
};

struct RemotePolicyOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  int timeout_seconds = 60;
  int retries = 2;             // after the first attempt
  int backoff_milliseconds = 250;
  int max_in_flight = 4;
};

struct RemoteTransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string base64_encode(const std::string& bytes) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 3 <= bytes.size()) {
    std::uint32_t v = (static_cast<std::uint8_t>(bytes[i]) << 16) |
                      (static_cast<std::uint8_t>(bytes[i + 1]) << 8) |
                      static_cast<std::uint8_t>(bytes[i + 2]);
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += alphabet[(v >> 6) & 63];
    out += alphabet[v & 63];
    i += 3;
  }
  std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    std::uint32_t v = static_cast<std::uint8_t>(bytes[i]) << 16;
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    std::uint32_t v = (static_cast<std::uint8_t>(bytes[i]) << 16) |
                      (static_cast<std::uint8_t>(bytes[i + 1]) << 8);
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += alphabet[(v >> 6) & 63];
    out += "=";
  }
  return out;
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read image: " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

class Semaphore {
 public:
  explicit Semaphore(int count) : count_(count) {}

  void acquire() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return count_ > 0; });
    --count_;
  }

  void release() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      ++count_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int count_;
};

struct SemaphoreGuard {
  Semaphore& sem;
  explicit SemaphoreGuard(Semaphore& s) : sem(s) { sem.acquire(); }
  ~SemaphoreGuard() { sem.release(); }
};

}  // namespace detail

// Text-model client. POST /v1/act with {"prompt", "image", "format"}; the
// image is the base64 payload of the query's pixmap file. Timeouts and 5xx
// replies are retried with fixed backoff and then degrade to an empty reply
// (a no-op step); a refused connection propagates, since that means there is
// no server to talk to at all.
class RemotePolicy : public Policy {
 public:
  explicit RemotePolicy(RemotePolicyOptions opt = {})
      : opt_(opt), gate_(opt.max_in_flight) {}

  PolicyReply act(const PolicyQuery& query) override {
    nlohmann::ordered_json body;
    body["prompt"] = query.prompt_text;
    body["image"] = detail::base64_encode(detail::read_file_bytes(query.image_ref));
    body["format"] = "pixmap-v1";
    std::string payload = body.dump();

    detail::SemaphoreGuard guard(gate_);
    for (int attempt = 0; attempt <= opt_.retries; ++attempt) {
      if (attempt > 0)
        std::this_thread::sleep_for(std::chrono::milliseconds(opt_.backoff_milliseconds));
      httplib::Client client(opt_.host, opt_.port);
      client.set_connection_timeout(opt_.timeout_seconds, 0);
      client.set_read_timeout(opt_.timeout_seconds, 0);
      httplib::Result res = client.Post("/v1/act", payload, "application/json");
      if (!res) {
        if (res.error() == httplib::Error::Connection)
          throw RemoteTransportError("cannot connect to " + opt_.host + ":" +
                                     std::to_string(opt_.port));
        continue;
      }
      if (res->status >= 500) continue;
      if (res->status != 200)
        throw RemoteTransportError("policy server replied HTTP " +
                                   std::to_string(res->status));
      nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
      if (reply.is_discarded() || !reply.contains("text") || !reply["text"].is_string())
        return make_reply("");
      return make_reply(reply["text"].get<std::string>());
    }
    return make_reply("");
  }

 private:
  RemotePolicyOptions opt_;
  detail::Semaphore gate_;
};

// ---------------------------------------------------------------------------
// episode loop

struct EpisodeOptions {
  int max_steps = 8;
  GenRecipe recipe;
  std::string episode_id;
  bool write_images = false;
  std::filesystem::path image_dir;
  std::string ref_prefix;  // prepended to image names in queries
};

// Plan-twice-act-once: every iteration re-queries the policy and executes only
// the first parsed action; the judge runs before each query so a solved state
// costs no further calls. Unparseable replies consume the step as a no-op.
inline EpisodeResult run_episode(Policy& policy, EnvState env, const EpisodeOptions& opt) {
  if (opt.max_steps < 1) throw std::invalid_argument("max_steps must be at least 1");
  policy.reset(opt.episode_id);
  std::vector<Action> history;

  for (;;) {
    EpisodeResult verdict = judge(env);
    verdict.steps_taken = env.step_count;
    if (verdict.success) return verdict;
    if (env.step_count >= opt.max_steps) {
      verdict.failure_reason = "max_steps reached: " + verdict.failure_reason.value_or("");
      return verdict;
    }

    RecorderOptions render_opt;
    render_opt.write_images = opt.write_images;
    render_opt.image_dir = opt.image_dir;
    render_opt.ref_prefix = opt.ref_prefix;
    std::string image_name = detail::emit_observation_image(env.scene, render_opt);
    std::string image_ref =
        opt.write_images ? (opt.image_dir / image_name.substr(opt.ref_prefix.size())).string()
                         : image_name;

    std::string sample_key = opt.episode_id + "/query" + std::to_string(env.step_count);
    PolicyQuery query = assemble_query(env, image_ref, opt.recipe, history, sample_key);
    policy.observe(env);
    PolicyReply reply = policy.act(query);
    if (reply.chosen) {
      Action a = *reply.chosen;
      env = step(env, a);
      a.step_index = static_cast<int>(history.size()) + 1;
      history.push_back(a);
    } else {
      env = step_noop(env);
    }
  }
}

}  // namespace tabletalk
