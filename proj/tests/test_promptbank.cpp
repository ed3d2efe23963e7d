#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "support/fixtures.hpp"
#include "tabletalk/promptbank.hpp"
#include "tabletalk/rng.hpp"

using namespace tabletalk;

namespace {

const TemplateKind kAllKinds[] = {
    TemplateKind::action_inference, TemplateKind::localization,
    TemplateKind::detection,        TemplateKind::action_prediction,
    TemplateKind::future_prediction, TemplateKind::spatial,
    TemplateKind::temporal,
};

std::string data_dir() {
  const char* env = std::getenv("TABLETALK_DATA");
  REQUIRE(env != nullptr);
  return env;
}

}  // namespace

TEST_CASE("pool sizes") {
  REQUIRE(pool_size(TemplateKind::action_inference) == 15);
  REQUIRE(pool_size(TemplateKind::localization) == 15);
  REQUIRE(pool_size(TemplateKind::detection) == 15);
  REQUIRE(pool_size(TemplateKind::action_prediction) == 15);
  REQUIRE(pool_size(TemplateKind::future_prediction) == 15);
  REQUIRE(pool_size(TemplateKind::spatial) == 14);
  REQUIRE(pool_size(TemplateKind::temporal) == 14);

  std::size_t total = 0;
  for (TemplateKind kind : kAllKinds) total += pool_size(kind);
  REQUIRE(total == 103);
}

TEST_CASE("pools match their fixture files") {
  for (TemplateKind kind : kAllKinds) {
    std::string path = data_dir() + "/prompts/" + to_string(kind) + ".txt";
    INFO("pool " << to_string(kind) << " vs " << path);
    REQUIRE(pool_templates(kind) == load_pool_file(path));
  }
}

TEST_CASE("pools are healthy") {
  REQUIRE(validate_pools().empty());
}

TEST_CASE("every template carries its required slots") {
  for (TemplateKind kind : kAllKinds) {
    for (const std::string& tpl : pool_templates(kind)) {
      std::vector<std::string> present = template_slots(tpl);
      for (const std::string& need : required_slots(kind)) {
        INFO(to_string(kind) << ": " << tpl);
        REQUIRE(std::find(present.begin(), present.end(), need) !=
                present.end());
      }
    }
  }
}

TEST_CASE("fill_template substitutes known slots") {
  std::string out = fill_template(
      "Where is {object} located?",
      {{"object", "<p>blueberry</p>"}, {"unused", "ignored"}});
  REQUIRE(out == "Where is <p>blueberry</p> located?");
}

TEST_CASE("fill_template passes unknown brace groups through") {
  std::string out = fill_template(
      "Use the format <b>(x, y), {w, h}</b> for {object}.",
      {{"object", "it"}});
  REQUIRE(out == "Use the format <b>(x, y), {w, h}</b> for it.");

  REQUIRE(fill_template("{not_a_slot}", {}) == "{not_a_slot}");
}

TEST_CASE("fill_template demands bindings for present slots") {
  REQUIRE_THROWS_WITH(fill_template("find {object} now", {}),
                      "fill_template: no binding for slot {object}");
}

TEST_CASE("template_slots lists slots in order of appearance") {
  std::vector<std::string> slots = template_slots(
      "compare {ego_obj} with {ref_obj} like {example}, using {w, h}");
  REQUIRE(slots == std::vector<std::string>{"ego_obj", "ref_obj", "example"});
}

TEST_CASE("pick_template is a pure function of seed, key, kind") {
  const char* a = pick_template(42, "ep/q3", TemplateKind::localization);
  const char* b = pick_template(42, "ep/q3", TemplateKind::localization);
  REQUIRE(a == b);

  std::set<const char*> across_keys;
  for (int i = 0; i < 64; ++i) {
    across_keys.insert(pick_template(42, "ep/q" + std::to_string(i),
                                     TemplateKind::localization));
  }
  REQUIRE(across_keys.size() > 1);

  std::set<const char*> across_seeds;
  for (std::uint64_t seed = 42; seed < 58; ++seed) {
    across_seeds.insert(pick_template(seed, "ep/q3", TemplateKind::detection));
  }
  REQUIRE(across_seeds.size() > 1);
}

TEST_CASE("pick_template spreads evenly over the pool") {
  std::map<const char*, int> counts;
  for (int i = 0; i < 15000; ++i) {
    counts[pick_template(7, "sample/" + std::to_string(i),
                         TemplateKind::localization)]++;
  }
  REQUIRE(counts.size() == 15);
  for (const auto& [tpl, n] : counts) {
    INFO(tpl);
    REQUIRE(n > 850);
    REQUIRE(n < 1150);
  }
}

TEST_CASE("frozen prompt constants") {
  REQUIRE(std::string(kActionFormatBlock) == fixtures::kFormatBlock);
  REQUIRE(std::string(kHistoryLead) == "You have finished: ");
}

TEST_CASE("rng determinism and ranges") {
  Rng a(99, "stream");
  Rng b(99, "stream");
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

  Rng c(99, "other-stream");
  bool all_equal = true;
  Rng a2(99, "stream");
  for (int i = 0; i < 16; ++i)
    if (a2.next_u64() != c.next_u64()) all_equal = false;
  REQUIRE_FALSE(all_equal);

  Rng r(1, "ranges");
  for (int i = 0; i < 2000; ++i) {
    int v = r.next_int(-3, 7);
    REQUIRE(v >= -3);
    REQUIRE(v <= 7);
    std::uint64_t u = r.next_below(10);
    REQUIRE(u < 10);
    double d = r.next_double();
    REQUIRE(d >= 0.0);
    REQUIRE(d < 1.0);
  }

  SECTION("next_int covers both endpoints") {
    Rng e(2, "endpoints");
    bool lo = false, hi = false;
    for (int i = 0; i < 500; ++i) {
      int v = e.next_int(0, 3);
      lo = lo || v == 0;
      hi = hi || v == 3;
    }
    REQUIRE(lo);
    REQUIRE(hi);
  }
}

TEST_CASE("deterministic_shuffle permutes reproducibly") {
  std::vector<int> items(20);
  for (int i = 0; i < 20; ++i) items[static_cast<std::size_t>(i)] = i;

  std::vector<int> once = items;
  Rng r1(5, "shuffle");
  deterministic_shuffle(once, r1);

  std::vector<int> twice = items;
  Rng r2(5, "shuffle");
  deterministic_shuffle(twice, r2);

  REQUIRE(once == twice);
  REQUIRE(once != items);

  std::vector<int> sorted = once;
  std::sort(sorted.begin(), sorted.end());
  REQUIRE(sorted == items);
}

TEST_CASE("sample_indices draws sorted distinct positions") {
  Rng r(6, "sample");
  std::vector<std::size_t> picked = sample_indices(100, 10, r);
  REQUIRE(picked.size() == 10);
  REQUIRE(std::is_sorted(picked.begin(), picked.end()));
  REQUIRE(std::adjacent_find(picked.begin(), picked.end()) == picked.end());
  for (std::size_t i : picked) REQUIRE(i < 100);

  Rng r2(6, "sample");
  REQUIRE(sample_indices(100, 10, r2) == picked);

  Rng r3(6, "sample-all");
  std::vector<std::size_t> all = sample_indices(5, 5, r3);
  REQUIRE(all == std::vector<std::size_t>{0, 1, 2, 3, 4});
}
