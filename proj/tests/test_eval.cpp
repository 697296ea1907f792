#include <doctest.h>

#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "qxr/eval.hpp"
#include "support.hpp"

using namespace qxr;
using namespace qxr::testing;

namespace {

IdSet range(FactId from, FactId to) {
  IdSet out(static_cast<std::size_t>(to - from));
  std::iota(out.begin(), out.end(), from);
  return out;
}

class FixedReply final : public ChatTransport {
 public:
  explicit FixedReply(std::string reply) : reply_(std::move(reply)) {}
  std::string complete(const ChatRequest&) override { return reply_; }

 private:
  std::string reply_;
};

std::size_t count_fields(const std::string& line) {
  std::size_t fields = 1;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) ++fields;
  }
  return fields;
}

}  // namespace

TEST_CASE("metrics on a worked example") {
  // F' = 0..9, G = 1..12: nine shared facts.
  const auto m = metrics(range(0, 10), range(1, 13));
  CHECK(m.surviving == 10);
  CHECK(m.gold == 12);
  CHECK(m.overlap == 9);
  CHECK(m.precision == doctest::Approx(9.0 / 10));
  CHECK(m.recall == doctest::Approx(9.0 / 12));
  // Harmonic mean of P and R equals 2|F' n G| / (|F'| + |G|).
  CHECK(m.f1 == doctest::Approx(2.0 * 9 / (10 + 12)));
}

TEST_CASE("metrics edge cases") {
  const auto empty = metrics({}, range(0, 4));
  CHECK(empty.precision == 1.0);
  CHECK(empty.recall == 0.0);
  CHECK(empty.f1 == 0.0);

  const auto disjoint = metrics(range(0, 2), range(5, 7));
  CHECK(disjoint.precision == 0.0);
  CHECK(disjoint.f1 == 0.0);

  const auto exact = metrics(range(0, 5), range(0, 5));
  CHECK(exact.f1 == 1.0);

  CHECK_THROWS_AS(metrics(range(0, 3), {}), std::invalid_argument);
}

TEST_CASE("pairwise keeps an XOR triple intact") {
  PoolBuilder b;
  xor_triple(b);
  CountingOracle oracle(std::make_shared<PerfectOracle>(b.facts), "pw");
  const auto r = pairwise_baseline(oracle, b.all());
  CHECK(r.queries == 3);
  CHECK(oracle.total_calls() == 3);
  CHECK(r.edges.empty());
  CHECK(r.surviving == b.all());
  CHECK_FALSE(truth(b.facts, r.surviving));
}

TEST_CASE("pairwise removes one side of a negation pair") {
  PoolBuilder b;
  const auto a = b.unary(Predicate::IsTiger, "Rex");
  const auto na = b.unary(Predicate::IsTiger, "Rex", false);
  b.distractors(8);
  const auto r = pairwise_baseline(*std::make_shared<PerfectOracle>(b.facts), b.all());
  CHECK(r.queries == 45);
  REQUIRE(r.edges.size() == 1);
  CHECK(r.edges[0] == std::pair{a, na});
  CHECK(r.removed == IdSet{a});  // tie broken toward the smaller id
  CHECK(r.surviving.size() == 9);
  CHECK(truth(b.facts, r.surviving));
}

TEST_CASE("pairwise query count is N choose 2") {
  PoolBuilder b;
  b.distractors(30);
  CountingOracle oracle(std::make_shared<PerfectOracle>(b.facts), "pw");
  const auto r = pairwise_baseline(oracle, b.all());
  CHECK(r.queries == 435);
  CHECK(oracle.total_calls() == 435);
  CHECK(r.removed.empty());
}

TEST_CASE("pairwise vertex cover prefers the hub") {
  PoolBuilder b;
  const auto low = b.bound("Lake", BoundKind::AtMost, 30);
  const auto mid = b.bound("Lake", BoundKind::AtMost, 40);
  const auto hub = b.bound("Lake", BoundKind::AtLeast, 100);
  const auto top = b.bound("Lake", BoundKind::AtMost, 50);
  const auto r = pairwise_baseline(*std::make_shared<PerfectOracle>(b.facts), b.all());
  CHECK(r.edges.size() == 3);
  CHECK(r.removed == IdSet{hub});
  CHECK(r.surviving == IdSet{low, mid, top});
}

TEST_CASE("pairwise rejects fewer than two facts") {
  PoolBuilder b;
  b.distractors(1);
  CHECK_THROWS_AS(pairwise_baseline(*std::make_shared<PerfectOracle>(b.facts), b.all()),
                  std::invalid_argument);
}

TEST_CASE("fact text normalization") {
  CHECK(normalize_fact_text("  Rex is a   Tiger. ") == "rex is a tiger");
  CHECK(normalize_fact_text("E1 happened before E2!") == "e1 happened before e2");
  CHECK(normalize_fact_text("") == "");
}

TEST_CASE("direct baseline maps returned texts back to ids") {
  PoolBuilder b;
  const auto a = b.unary(Predicate::IsTiger, "Rex");
  b.unary(Predicate::IsTiger, "Rex", false);
  const auto w = b.works_for("Ann", "Acme");
  const std::string reply = fmt::format("<answer>[\"{}\", \"{}\", \"Nobody works anywhere.\"]</answer>",
                                        b.facts[a].text, normalize_fact_text(b.facts[w].text));
  LlmConfig c;
  c.endpoint = "http://127.0.0.1:1/";
  c.model = "m";
  LlmClient client(c, std::make_shared<FixedReply>(reply));
  const auto r = direct_llm_baseline(client, b.facts, b.all());
  CHECK(r.surviving == IdSet{a, w});
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("Nobody works anywhere.") != std::string::npos);
}

TEST_CASE("oracle spec strings") {
  for (const char* text : {"perfect", "noisy:0.1,0.2", "noisy:0.05,0.05,seed=7",
                           "majority:5:noisy:0.2,0.2", "majority:3:majority:3:perfect",
                           "llm:configs/llm.json", "majority:3:llm:x.json"}) {
    CAPTURE(text);
    CHECK(OracleSpec::parse(text).to_string() == text);
  }
  const auto nested = OracleSpec::parse("majority:3:majority:7:noisy:0.1,0.1");
  CHECK(nested.max_repetitions() == 7);
  CHECK_FALSE(nested.uses_llm());
  CHECK(OracleSpec::parse("majority:3:llm:x.json").uses_llm());
  CHECK(OracleSpec::parse("noisy:0.1,0.2,seed=9").seed == 9U);

  for (const char* bad : {"", "oracle", "noisy:0.1", "noisy:0.1,x", "noisy:1.5,0", "noisy:0.1,0.1,s=3",
                          "majority:2:perfect", "majority:0:perfect", "majority:3", "llm:"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(OracleSpec::parse(bad), OracleSpecError);
  }
}

TEST_CASE("building oracle stacks") {
  PoolBuilder b;
  const auto a = b.unary(Predicate::IsTiger, "Rex");
  const auto na = b.unary(Predicate::IsTiger, "Rex", false);
  const IdSet pair = {a, na};

  CHECK(build_oracle(OracleSpec::parse("perfect"), b.facts, 1)->query(pair) == Verdict::Incons);
  CHECK(build_oracle(OracleSpec::parse("noisy:0,1"), b.facts, 1)->query(pair) == Verdict::Cons);

  // Without an explicit seed the instance seed decides the draws.
  auto draws = [&](std::uint64_t instance_seed) {
    auto o = build_oracle(OracleSpec::parse("noisy:0.5,0.5"), b.facts, instance_seed);
    std::string s;
    for (int i = 0; i < 64; ++i) s += is_cons(o->query(pair)) ? '1' : '0';
    return s;
  };
  CHECK(draws(3) == draws(3));
  CHECK(draws(3) != draws(4));

  auto t = std::make_shared<FixedReply>("CONSISTENT");
  LlmConfig c;
  c.endpoint = "http://127.0.0.1:1/";
  c.model = "m";
  auto client = std::make_shared<LlmClient>(c, t);
  CHECK_THROWS_AS(build_oracle(OracleSpec::parse("majority:3:llm:x"), b.facts, 1, client),
                  OracleSpecError);
  CHECK(build_oracle(OracleSpec::parse("majority:3:llm:x"), b.facts, 1, client, true)->query(pair) ==
        Verdict::Cons);
  CHECK(build_oracle(OracleSpec::parse("llm:x"), b.facts, 1, client)->query(pair) == Verdict::Cons);
  CHECK_THROWS_AS(build_oracle(OracleSpec::parse("llm:x"), b.facts, 1), OracleSpecError);
}

TEST_CASE("plant specs and mix labels") {
  CHECK(parse_plant_spec("negation_pair:2") == PlantSpec{Pattern::NegationPair, 2});
  CHECK(parse_plant_spec("temporal_cycle") == PlantSpec{Pattern::TemporalCycle, 1});
  CHECK_THROWS_AS(parse_plant_spec("triangle:1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_plant_spec("negation_pair:-1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_plant_spec("negation_pair:x"), std::invalid_argument);
  CHECK(mix_label({}) == "none");
  CHECK(mix_label({{Pattern::NegationPair, 2}, {Pattern::ExactlyOne, 1}}) ==
        "negation_pair:2+exactly_one:1");
}

TEST_CASE("sweep grid JSON") {
  const nlohmann::json j = {{"n_facts", {16, 32}},
                            {"pattern_mixes", {{"negation_pair:2"}, {"temporal_cycle:1", "exactly_one"}}},
                            {"noise", {{0.1, 0.2}}},
                            {"repetitions", {1, 3}},
                            {"algorithms", {"qxr"}},
                            {"instances_per_cell", 4},
                            {"seed", 11},
                            {"scope_mode", "per_cluster"},
                            {"cluster_size", 10},
                            {"round_cap", 12}};
  const auto g = sweep_grid_from_json(j);
  CHECK(g.n_facts == std::vector<std::size_t>{16, 32});
  CHECK(g.pattern_mixes.at(1).at(1) == PlantSpec{Pattern::ExactlyOne, 1});
  CHECK(g.noise.at(0) == std::pair{0.1, 0.2});
  CHECK(g.algorithms == std::vector{Algorithm::Qxr});
  CHECK(g.base.scope_mode == ScopeMode::PerCluster);
  CHECK(g.policy.round_cap == 12);
  CHECK(sweep_grid_from_json(to_json(g)).n_facts == g.n_facts);
  CHECK(to_json(sweep_grid_from_json(to_json(g))) == to_json(g));

  CHECK_THROWS_AS(sweep_grid_from_json(nlohmann::json{{"nfacts", {10}}}), std::invalid_argument);
  CHECK_THROWS_AS(sweep_grid_from_json(nlohmann::json{{"algorithms", {"magic"}}}), std::invalid_argument);
  CHECK_THROWS_AS(sweep_grid_from_json(nlohmann::json{{"n_facts", "many"}}), std::invalid_argument);
}

TEST_CASE("a perfect-oracle sweep") {
  SweepGrid g;
  g.n_facts = {20};
  g.pattern_mixes = {{{Pattern::NegationPair, 2}}};
  g.instances_per_cell = 6;
  g.seed = 5;
  g.threads = 2;
  const auto res = run_sweep(g);
  REQUIRE(res.rows.size() == 12);
  for (const auto& row : res.rows) {
    CAPTURE(row.instance_id);
    CHECK(row.error.empty());
    CHECK(row.scopes_consistent);
    CHECK(row.within_budget);
    CHECK(row.audited_errors == 0);
    CHECK(row.raw_calls == row.queries);
    // Two disjoint pairs: each algorithm drops one fact of each, so 18 of 20 survive.
    CHECK(row.m.surviving == 18);
    CHECK(row.m.f1 >= 0.5 + 0.5 * 16.0 / 18);
    if (row.algorithm == Algorithm::Pairwise) CHECK(row.queries == 190);
  }
  REQUIRE(res.summary.size() == 2);
  for (const auto& s : res.summary) {
    CHECK(s.runs == 6);
    CHECK(s.failures == 0);
    CHECK(s.empirical_error == 0.0);
    CHECK(s.bound_ok == true);
  }
}

TEST_CASE("sweeps do not depend on the thread count") {
  SweepGrid g;
  g.n_facts = {16};
  g.pattern_mixes = {{{Pattern::NegationPair, 1}, {Pattern::TemporalCycle, 1}}};
  g.noise = {{0.1, 0.1}};
  g.repetitions = {1, 3};
  g.instances_per_cell = 4;
  g.seed = 2;
  g.threads = 1;
  const auto one = run_sweep(g);
  g.threads = 3;
  const auto three = run_sweep(g);
  REQUIRE(one.rows.size() == three.rows.size());
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    CHECK(one.rows[i].queries == three.rows[i].queries);
    CHECK(one.rows[i].m.f1 == three.rows[i].m.f1);
    CHECK(one.rows[i].audited_errors == three.rows[i].audited_errors);
  }
}

TEST_CASE("noisy sweeps report error rates against the bounds") {
  SweepGrid g;
  g.n_facts = {16};
  g.pattern_mixes = {{{Pattern::NegationPair, 2}}};
  g.noise = {{0.2, 0.2}};
  g.repetitions = {3};
  g.algorithms = {Algorithm::Pairwise};
  g.instances_per_cell = 10;
  g.seed = 9;
  const auto res = run_sweep(g);
  REQUIRE(res.summary.size() == 1);
  const auto& s = res.summary[0];
  CHECK(s.binomial_error == doctest::Approx(reference_majority_error(3, 0.2)));
  CHECK(s.hoeffding_bound == doctest::Approx(std::exp(-2 * 3 * 0.3 * 0.3)));
  CHECK(s.bound_ok == true);
  // 1200 audited pairwise calls; the exact rate is 0.104.
  CHECK(std::abs(s.empirical_error - s.binomial_error) < 4 * s.se_error + 1e-9);
  for (const auto& row : res.rows) CHECK(row.raw_calls == 3 * row.queries);
}

TEST_CASE("summaries: means and standard errors") {
  std::vector<SweepRow> rows(3);
  const double f1s[] = {0.5, 0.75, 1.0};
  for (int i = 0; i < 3; ++i) {
    rows[i].n_facts = 10;
    rows[i].pattern_mix = "negation_pair:1";
    rows[i].m.f1 = f1s[i];
    rows[i].queries = static_cast<std::uint64_t>(10 * (i + 1));
  }
  rows.push_back(rows[0]);
  rows.back().error = "boom";
  const auto s = summarize(rows);
  REQUIRE(s.size() == 1);
  CHECK(s[0].runs == 4);
  CHECK(s[0].failures == 1);
  CHECK(s[0].mean_f1 == doctest::Approx(0.75));
  // Sample sd of {0.5, 0.75, 1} is 0.25; SE = 0.25 / sqrt(3).
  CHECK(s[0].se_f1 == doctest::Approx(0.25 / std::sqrt(3.0)));
  CHECK(s[0].mean_queries == doctest::Approx(20.0));
  CHECK(s[0].se_queries == doctest::Approx(10.0 / std::sqrt(3.0)));
}

TEST_CASE("an empty grid is rejected") {
  SweepGrid g;
  g.n_facts.clear();
  CHECK_THROWS_AS(run_sweep(g), std::invalid_argument);
  SweepGrid even;
  even.repetitions = {2};
  CHECK_THROWS_AS(run_sweep(even), std::invalid_argument);
}

TEST_CASE("CSV output has one field per header column") {
  SweepGrid g;
  g.n_facts = {12};
  g.instances_per_cell = 2;
  const auto res = run_sweep(g);
  for (const auto& [name, text] :
       std::vector<std::pair<std::string, std::string>>{
           {"rows", [&] { std::ostringstream os; write_rows_csv(os, res.rows); return os.str(); }()},
           {"summary", [&] { std::ostringstream os; write_summary_csv(os, res.summary); return os.str(); }()},
           {"scaling", [&] { std::ostringstream os; write_scaling_csv(os, res.summary); return os.str(); }()}}) {
    CAPTURE(name);
    std::istringstream in(text);
    std::string header, line;
    std::getline(in, header);
    std::size_t lines = 0;
    while (std::getline(in, line)) {
      CHECK(count_fields(line) == count_fields(header));
      ++lines;
    }
    CHECK(lines > 0);
  }
}

TEST_CASE("code version is stamped") {
  CHECK_FALSE(code_version().empty());
  CHECK(code_version() != "unknown");
}
