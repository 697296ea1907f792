#include <doctest.h>

#include <algorithm>

#include "qxr/datagen.hpp"
#include "qxr/hitting_set.hpp"
#include "qxr/repair.hpp"
#include "support.hpp"

using namespace qxr;
using namespace qxr::testing;

namespace {

void check_partition(const RepairResult& r, const IdSet& f) {
  CHECK_FALSE(intersects(r.surviving, r.removed));
  CHECK(set_union(r.surviving, r.removed) == f);
  for (const auto& m : r.mus_family) CHECK_FALSE(is_subset(m.fact_ids, r.surviving));
}

bool scopes_consistent(const std::vector<Fact>& pool, const ScopeFamily& scopes, const IdSet& kept) {
  for (const auto& c : scopes.scopes) {
    IdSet part;
    std::set_intersection(c.begin(), c.end(), kept.begin(), kept.end(), std::back_inserter(part));
    if (!truth(pool, part)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("consistent input is left alone") {
  PoolBuilder b;
  b.distractors(10);
  CountingOracle oracle(std::make_shared<PerfectOracle>(b.facts), "run");
  const auto r = qxr::qxr(oracle, b.all(), ScopeFamily::single(b.all()));
  CHECK(r.surviving == b.all());
  CHECK(r.removed.empty());
  CHECK(r.rounds == 0);
  CHECK(r.converged);
  CHECK(r.stats.total_calls == 1);
  CHECK(oracle.total_calls() == 1);
}

TEST_CASE("two conflicts sharing a fact are repaired by removing it") {
  PoolBuilder b;
  const auto a = b.before("x", "y");
  const auto bb = b.before("y", "z");
  const auto c = b.before("z", "x");
  const auto d = b.before("y", "w");
  const auto e = b.before("w", "x");
  const auto filler = b.distractors(3);
  const IdSet f = b.all();
  ScopeFamily scopes{{IdSet{a, bb, c, filler[0]}, IdSet{a, d, e, filler[1], filler[2]}}};
  PerfectOracle oracle(b.facts);
  const auto r = qxr::qxr(oracle, f, scopes);
  CHECK(r.removed == IdSet{a});
  CHECK(r.rounds == 1);
  REQUIRE(r.mus_family.size() == 2);
  CHECK(r.mus_family[0].fact_ids == IdSet{a, bb, c});
  CHECK(r.mus_family[0].source_scope == 0);
  CHECK(r.mus_family[1].fact_ids == IdSet{a, d, e});
  CHECK(r.mus_family[1].source_scope == 1);
  check_partition(r, f);
  // No single-fact removal other than a works, and nothing smaller than one fact does.
  CHECK(exhaustive_min_removal(oracle, f, scopes) == IdSet{a});
}

TEST_CASE("one contradiction among 30 facts") {
  PoolBuilder b;
  b.distractors(14);
  const auto a = b.unary(Predicate::IsPolitician, "Ann", true, EntityKind::Person);
  b.distractors(14, "Z");
  const auto not_a = b.unary(Predicate::IsPolitician, "Ann", false, EntityKind::Person);
  REQUIRE(b.facts.size() == 30);
  PerfectOracle oracle(b.facts);
  const auto r = qxr::qxr(oracle, b.all(), ScopeFamily::single(b.all()));
  CHECK(r.surviving.size() == 29);
  CHECK(truth(b.facts, r.surviving));
  CHECK(r.removed == IdSet{a});
  // Both single-removal candidates restore consistency.
  CHECK(truth(b.facts, set_difference(b.all(), IdSet{a})));
  CHECK(truth(b.facts, set_difference(b.all(), IdSet{not_a})));
  CHECK(r.stats.total_calls <= qxr_query_budget(r.rounds, 1, 2, 30));
}

TEST_CASE("scope validation") {
  PoolBuilder b;
  b.distractors(3);
  PerfectOracle oracle(b.facts);
  CHECK_THROWS_AS(qxr::qxr(oracle, IdSet{0, 1}, ScopeFamily{{IdSet{0, 2}}}), std::invalid_argument);
  CHECK_THROWS_AS(qxr::qxr(oracle, IdSet{0, 1}, ScopeFamily{}), std::invalid_argument);
}

TEST_CASE("round cap flags non-convergence") {
  auto always_incons = make_function_oracle([](const IdSet&) { return Verdict::Incons; });
  IdSet f = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto r = qxr::qxr(*always_incons, f, ScopeFamily::single(f));
  CHECK_FALSE(r.converged);
  CHECK(r.rounds == 4);
  CHECK(r.removed.size() == 4);
  CHECK(r.warnings.size() == 1);
  check_partition(r, f);

  RepairPolicy policy;
  policy.round_cap = 2;
  CHECK(qxr::qxr(*always_incons, f, ScopeFamily::single(f), policy).rounds == 2);
}

TEST_CASE("handle_empty_extraction policy") {
  auto cons = make_function_oracle([](const IdSet&) { return Verdict::Cons; });
  auto incons = make_function_oracle([](const IdSet&) { return Verdict::Incons; });
  const IdSet scope = {0, 1};

  RetryState flipped{0, 3, false};
  CHECK(handle_empty_extraction(*cons, scope, flipped) == EmptyExtractionAction::TreatAsCons);
  CHECK(flipped.attempts == 1);
  CHECK_FALSE(flipped.exhausted);

  RetryState stuck{0, 3, false};
  for (int i = 0; i < 3; ++i) {
    CHECK(handle_empty_extraction(*incons, scope, stuck) == EmptyExtractionAction::Requery);
  }
  CHECK(handle_empty_extraction(*incons, scope, stuck) == EmptyExtractionAction::TreatAsCons);
  CHECK(stuck.exhausted);
  CHECK(stuck.attempts == 3);
}

TEST_CASE("qxr records a warning when extractions keep coming back empty") {
  // Scope checks say incons, the extraction's first query says cons.
  int call = 0;
  auto flaky = make_function_oracle([&](const IdSet&) {
    return (call++ % 2 == 0) ? Verdict::Incons : Verdict::Cons;
  });
  const IdSet f = {0, 1, 2};
  const auto r = qxr::qxr(*flaky, f, ScopeFamily::single(f));
  CHECK(r.surviving == f);
  CHECK(r.rounds == 0);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("3 retries") != std::string::npos);
  CHECK(r.stats.total_calls == 8);
}

TEST_CASE("perfect oracle never triggers the empty-extraction policy") {
  GenConfig config;
  config.planted = {{Pattern::NegationPair, 2}, {Pattern::TemporalCycle, 1}, {Pattern::ExactlyOne, 1}};
  for (const auto& inst : generate_suite(config, 25)) {
    PerfectOracle oracle(inst.facts);
    const auto r = qxr::qxr(oracle, inst.all_ids(), inst.scopes);
    CHECK(r.warnings.empty());
    CHECK(r.converged);
  }
}

TEST_CASE("soundness, partition and budget on generated suites") {
  for (auto mode : {ScopeMode::SingleScope, ScopeMode::PerCluster}) {
    GenConfig config;
    config.n_facts = 40;
    config.planted = {{Pattern::NegationPair, 2}, {Pattern::TemporalCycle, 2}, {Pattern::ExactlyOne, 1}};
    config.scope_mode = mode;
    config.cluster_size = 12;
    config.overlap = true;
    config.seed = 31;
    for (const auto& inst : generate_suite(config, 40)) {
      PerfectOracle oracle(inst.facts);
      RepairPolicy policy;
      policy.verifier = &oracle;
      policy.round_cap = 8;  // up to five conflicts share one scope
      const auto r = qxr::qxr(oracle, inst.all_ids(), inst.scopes, policy);
      check_partition(r, inst.all_ids());
      CHECK(scopes_consistent(inst.facts, inst.scopes, r.surviving));
      std::size_t k = 0;
      for (const auto& m : r.mus_family) {
        CHECK(m.verified);
        k = std::max(k, m.fact_ids.size());
      }
      CHECK(r.stats.total_calls <= qxr_query_budget(r.rounds, inst.scopes.size(), k, inst.facts.size()));
    }
  }
}

TEST_CASE("practical soundness under noise") {
  GenConfig config;
  config.planted = {{Pattern::NegationPair, 2}, {Pattern::TemporalCycle, 1}};
  for (const auto& inst : generate_suite(config, 30)) {
    auto noisy = std::make_shared<NoisyOracle>(std::make_shared<PerfectOracle>(inst.facts),
                                                NoiseParams{0.2, 0.2, inst.seed});
    const auto r = qxr::qxr(*noisy, inst.all_ids(), inst.scopes);
    check_partition(r, inst.all_ids());
  }
}

TEST_CASE("exact per-round hitting sets also repair soundly") {
  GenConfig config;
  config.planted = {{Pattern::TemporalCycle, 3}};
  config.overlap = true;
  for (const auto& inst : generate_suite(config, 10)) {
    PerfectOracle oracle(inst.facts);
    RepairPolicy policy;
    policy.hitting = HittingStrategy::Exact;
    const auto r = qxr::qxr(oracle, inst.all_ids(), inst.scopes, policy);
    CHECK(truth(inst.facts, r.surviving));
  }
}

TEST_CASE("duality: exhaustive repair size equals the minimum hitting set of all MUSes") {
  GenConfig config;
  config.n_facts = 12;
  config.planted = {{Pattern::TemporalCycle, 2}, {Pattern::NegationPair, 1}};
  config.overlap = true;
  for (const auto& inst : generate_suite(config, 20)) {
    PerfectOracle oracle(inst.facts);
    const IdSet removal = exhaustive_min_removal(oracle, inst.all_ids(), inst.scopes);
    const auto mus = enumerate_all_mus(inst.facts, inst.facts.size());
    CHECK(removal.size() == reference_min_hitting_size(mus));
    CHECK(hits_all(removal, mus));
  }
}

TEST_CASE("exhaustive repair budget") {
  PoolBuilder b;
  b.distractors(17);
  PerfectOracle oracle(b.facts);
  CHECK_THROWS_AS(exhaustive_min_removal(oracle, b.all(), ScopeFamily::single(b.all())), BudgetExceeded);
}

TEST_CASE("query budget formula") {
  CHECK(qxr_query_budget(0, 3, 2, 30) == 0);
  CHECK(qxr_query_budget(2, 3, 2, 30) == 2 * 3 * (2 * 2 * 7 + 1));
}

TEST_CASE("report serialization") {
  PoolBuilder b;
  const IdSet t = xor_triple(b);
  PerfectOracle oracle(b.facts);
  const auto r = qxr::qxr(oracle, t, ScopeFamily::single(t));
  const auto j = to_json(r);
  CHECK(j["removed"].size() == 1);
  CHECK(j["surviving"].size() == 2);
  CHECK(j["rounds"] == 1);
  CHECK(j["converged"] == true);
  CHECK(j["mus_family"][0]["fact_ids"] == nlohmann::json(t));
  CHECK(j["stats"]["total_calls"] == r.stats.total_calls);
  CHECK(j["stats"]["breakdown"]["scope_checks"] == 2);
}
