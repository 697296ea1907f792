#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "qxr/datagen.hpp"
#include "qxr/hitting_set.hpp"
#include "support.hpp"

using namespace qxr;
using namespace qxr::testing;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("qxr_test_" + name);
}

void check_gold(const Instance& inst) {
  PerfectOracle oracle(inst.facts);
  for (const auto& u : inst.gold_mus) CHECK(verify_mus(oracle, u));
  CHECK(truth(inst.facts, inst.gold_consistent));
  CHECK(inst.gold_consistent == set_difference(inst.all_ids(), greedy_hitting_set(inst.gold_mus)));
}

}  // namespace

TEST_CASE("two negation pairs in 30 facts") {
  GenConfig config;
  config.planted = {{Pattern::NegationPair, 2}};
  config.seed = 7;
  const Instance inst = generate(config);
  CHECK(inst.facts.size() == 30);
  REQUIRE(inst.gold_mus.size() == 2);
  for (const auto& u : inst.gold_mus) CHECK(u.size() == 2);
  CHECK(inst.gold_consistent.size() == 28);
  check_gold(inst);
  CHECK(inst.scopes.size() == 1);
  CHECK(inst.scopes.scopes[0] == inst.all_ids());
}

TEST_CASE("no planted patterns means a consistent instance") {
  GenConfig config;
  config.seed = 3;
  const Instance inst = generate(config);
  CHECK(inst.gold_mus.empty());
  CHECK(inst.gold_consistent == inst.all_ids());
  CHECK(truth(inst.facts, inst.all_ids()));
}

TEST_CASE("generation is deterministic per seed") {
  GenConfig config;
  config.planted = {{Pattern::TemporalCycle, 1}, {Pattern::ExactlyOne, 1}};
  config.seed = 1234;
  std::ostringstream a, b;
  write_instances(a, {generate(config)});
  write_instances(b, {generate(config)});
  CHECK(a.str() == b.str());
  config.seed = 1235;
  std::ostringstream c;
  write_instances(c, {generate(config)});
  CHECK(a.str() != c.str());
}

TEST_CASE("planted patterns are genuine MUSes and the only ones") {
  GenConfig config;
  config.planted = {{Pattern::NegationPair, 2}, {Pattern::TemporalCycle, 1}, {Pattern::ExactlyOne, 1}};
  config.n_facts = 30;
  for (const auto& inst : generate_suite(config, 30)) {
    check_gold(inst);
    std::map<std::size_t, int> sizes;
    for (const auto& u : inst.gold_mus) ++sizes[u.size()];
    CHECK(sizes[2] == 2);
    CHECK(sizes[3] == 2);
    // Every MUS of size <= 4 is a planted one.
    const auto found = enumerate_all_mus(inst.facts, 4);
    CHECK(std::set<IdSet>(found.begin(), found.end()) ==
          std::set<IdSet>(inst.gold_mus.begin(), inst.gold_mus.end()));
  }
}

TEST_CASE("non-interference of the gold hitting set") {
  GenConfig config;
  config.planted = {{Pattern::NegationPair, 3}, {Pattern::ExactlyOne, 1}};
  for (const auto& inst : generate_suite(config, 20)) {
    const IdSet h = greedy_hitting_set(inst.gold_mus);
    CHECK(truth(inst.facts, set_difference(inst.all_ids(), h)));
    for (auto drop : h) {
      const IdSet partial = set_difference(h, IdSet{drop});
      CHECK_FALSE(truth(inst.facts, set_difference(inst.all_ids(), partial)));
    }
  }
}

TEST_CASE("overlapping temporal cycles share an edge") {
  GenConfig config;
  config.planted = {{Pattern::TemporalCycle, 3}};
  config.overlap = true;
  const Instance inst = generate(config);
  REQUIRE(inst.gold_mus.size() == 3);
  IdSet common = inst.gold_mus[0];
  for (const auto& u : inst.gold_mus) {
    IdSet next;
    std::set_intersection(common.begin(), common.end(), u.begin(), u.end(), std::back_inserter(next));
    common = next;
  }
  CHECK(common.size() == 1);
  CHECK(greedy_hitting_set(inst.gold_mus) == common);
  check_gold(inst);
}

TEST_CASE("per-cluster scopes partition the facts and keep conflicts whole") {
  GenConfig config;
  config.n_facts = 90;
  config.cluster_size = 30;
  config.scope_mode = ScopeMode::PerCluster;
  config.planted = {{Pattern::NegationPair, 3}, {Pattern::TemporalCycle, 3}};
  config.overlap = true;
  for (const auto& inst : generate_suite(config, 10)) {
    CHECK(inst.scopes.size() >= 3);
    IdSet all;
    for (const auto& c : inst.scopes.scopes) {
      CHECK(c.size() <= 30);
      CHECK_FALSE(intersects(all, c));
      all = set_union(all, c);
    }
    CHECK(all == inst.all_ids());
    for (const auto& u : inst.gold_mus) {
      int holders = 0;
      for (const auto& c : inst.scopes.scopes) holders += is_subset(u, c) ? 1 : 0;
      CHECK(holders == 1);
    }
  }
}

TEST_CASE("off-topic fraction and unique texts") {
  GenConfig config;
  config.n_facts = 60;
  config.offtopic_fraction = 0.5;
  config.planted = {{Pattern::NegationPair, 1}};
  const Instance inst = generate(config);
  std::set<std::string> texts, names;
  int negated = 0;
  for (const auto& f : inst.facts) {
    texts.insert(f.text);
    if (const auto* bin = std::get_if<Binary>(&f.logic); bin && !bin->positive) ++negated;
  }
  for (const auto& e : inst.entities) names.insert(e.name);
  CHECK(texts.size() == inst.facts.size());
  CHECK(names.size() == inst.entities.size());
  CHECK(negated >= 29);
}

TEST_CASE("infeasible configurations") {
  GenConfig config;
  config.n_facts = 5;
  config.planted = {{Pattern::TemporalCycle, 2}};
  CHECK_THROWS_AS(generate(config), InfeasibleConfig);
  config.planted = {{Pattern::NegationPair, -1}};
  CHECK_THROWS_AS(generate(config), InfeasibleConfig);
  config.planted = {};
  config.offtopic_fraction = 1.5;
  CHECK_THROWS_AS(generate(config), InfeasibleConfig);
  config.n_facts = 6;
  config.offtopic_fraction = 0.0;
  config.planted = {{Pattern::TemporalCycle, 2}};
  CHECK_NOTHROW(generate(config));
}

TEST_CASE("pattern and scope-mode names") {
  CHECK(parse_pattern("negation_pair") == Pattern::NegationPair);
  CHECK(parse_pattern("temporal_cycle") == Pattern::TemporalCycle);
  CHECK(parse_pattern("exactly_one") == Pattern::ExactlyOne);
  CHECK_FALSE(parse_pattern("xor").has_value());
  CHECK(parse_scope_mode("per_cluster") == ScopeMode::PerCluster);
  CHECK(pattern_size(Pattern::NegationPair) == 2);
  CHECK(pattern_size(Pattern::ExactlyOne) == 3);
}

TEST_CASE("suites derive distinct seeds and ids") {
  GenConfig config;
  config.id = "s";
  const auto suite = generate_suite(config, 100);
  std::set<std::uint64_t> seeds;
  for (const auto& inst : suite) seeds.insert(inst.seed);
  CHECK(seeds.size() == 100);
  CHECK(suite[0].id == "s-0000");
  CHECK(suite[99].id == "s-0099");
}

TEST_CASE("JSONL round trip on 100 instances") {
  GenConfig config;
  config.planted = {{Pattern::NegationPair, 1}, {Pattern::TemporalCycle, 1}, {Pattern::ExactlyOne, 1}};
  config.scope_mode = ScopeMode::PerCluster;
  config.cluster_size = 10;
  const auto suite = generate_suite(config, 100);
  const auto path = temp_path("roundtrip.jsonl");
  save_instances(path, suite);
  CHECK(load_instances(path) == suite);
  save_instance(suite[4], path);
  CHECK(load_instance(path) == suite[4]);
  std::filesystem::remove(path);
}

TEST_CASE("truncated file reports a parse error with its position") {
  GenConfig config;
  std::ostringstream os;
  write_instances(os, generate_suite(config, 2));
  std::string text = os.str();
  text.resize(text.size() - 40);
  std::istringstream in(text);
  try {
    read_instances(in);
    FAIL("expected a format error");
  } catch (const InstanceFormatError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("parse error at byte") != std::string::npos);
  }
}

TEST_CASE("schema errors name the field") {
  GenConfig config;
  auto record = to_json(generate(config));

  auto expect_field = [](const nlohmann::json& r, const std::string& field) {
    try {
      instance_from_json(r, 3);
      FAIL("expected a format error");
    } catch (const InstanceFormatError& e) {
      CHECK(e.field() == field);
      CHECK(e.line() == 3);
    }
  };

  auto missing = record;
  missing.erase("gold_mus");
  expect_field(missing, "gold_mus");

  auto wrong_text = record;
  wrong_text["facts"][0]["text"] = "Something else.";
  expect_field(wrong_text, "facts[0].text");

  auto bad_entity = record;
  bad_entity["facts"][1]["logic"]["type"] = "before";
  bad_entity["facts"][1]["logic"]["earlier"] = "Nobody";
  bad_entity["facts"][1]["logic"]["later"] = "Nowhere";
  expect_field(bad_entity, "facts[1].logic.earlier");

  auto bad_version = record;
  bad_version["schema_version"] = 99;
  expect_field(bad_version, "schema_version");

  auto out_of_range = record;
  out_of_range["gold_consistent"].push_back(1000);
  expect_field(out_of_range, "gold_consistent");
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(load_instances(temp_path("does_not_exist.jsonl")), std::runtime_error);
}
