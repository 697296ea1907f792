// qxr: generate instances, repair them, run baselines and sweeps, verify properties.
//
// Exit codes: 0 ok, 1 a verification property failed or every sweep cell failed,
// 2 usage/config/IO error, 3 some instance hit the round cap.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "qxr/datagen.hpp"
#include "qxr/detail/rng.hpp"
#include "qxr/eval.hpp"
#include "qxr/hitting_set.hpp"
#include "qxr/llm.hpp"
#include "qxr/repair.hpp"
#include "qxr/semantics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qxr;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;
constexpr int kNotConverged = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// JSON config files: keys are flag names (dashes or underscores); values replace flags.

using Setter = std::function<void(const json&)>;

template <typename T>
Setter set(T& target) {
  return [&target](const json& v) { target = v.get<T>(); };
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("cannot open {}", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void apply_config(const std::string& path, const std::map<std::string, Setter>& setters) {
  if (path.empty()) return;
  const json j = read_json_file(path);
  if (!j.is_object()) throw UsageError(fmt::format("{}: expected a JSON object", path));
  for (const auto& [raw, value] : j.items()) {
    std::string key = raw;
    std::replace(key.begin(), key.end(), '_', '-');
    const auto it = setters.find(key);
    if (it == setters.end()) throw UsageError(fmt::format("{}: unknown key '{}'", path, raw));
    try {
      it->second(value);
    } catch (const json::exception& e) {
      throw UsageError(fmt::format("{}: bad value for '{}': {}", path, raw, e.what()));
    }
  }
}

json manifest(const std::string& command, const json& settings) {
  return {{"tool", "qxr"},
          {"command", command},
          {"code_version", std::string(code_version())},
          {"settings", settings}};
}

void write_json(const fs::path& path, const json& j) { write_file_atomically(path, j.dump(2) + "\n"); }

std::string ids_text(const IdSet& ids) {
  std::string out = "{";
  for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? "," : "") + std::to_string(ids[i]);
  return out + "}";
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
  std::size_t n_facts = 30;
  std::vector<std::string> plant;
  double offtopic = 0.1;
  std::uint64_t seed = 0;
  std::size_t count = 1;
  std::string scope_mode = "single_scope";
  std::size_t cluster_size = 30;
  bool overlap = false;
  std::string id = "inst";
  std::string out;
  std::string config;
};

int cmd_gen(GenArgs a) {
  apply_config(a.config, {{"n-facts", set(a.n_facts)},
                          {"plant", set(a.plant)},
                          {"offtopic", set(a.offtopic)},
                          {"seed", set(a.seed)},
                          {"count", set(a.count)},
                          {"scope-mode", set(a.scope_mode)},
                          {"cluster-size", set(a.cluster_size)},
                          {"overlap", set(a.overlap)},
                          {"id", set(a.id)},
                          {"out", set(a.out)}});
  if (a.out.empty()) throw UsageError("gen needs --out");
  if (a.count == 0) throw UsageError("--count must be positive");
  GenConfig c;
  c.n_facts = a.n_facts;
  for (const auto& p : a.plant) c.planted.push_back(parse_plant_spec(p));
  c.offtopic_fraction = a.offtopic;
  c.seed = a.seed;
  const auto mode = parse_scope_mode(a.scope_mode);
  if (!mode) throw UsageError(fmt::format("unknown scope mode '{}'", a.scope_mode));
  c.scope_mode = *mode;
  c.cluster_size = a.cluster_size;
  c.overlap = a.overlap;
  c.id = a.id;

  std::vector<Instance> instances;
  if (a.count == 1) {
    instances.push_back(generate(c));
  } else {
    instances = generate_suite(c, a.count);
  }
  save_instances(a.out, instances);
  std::cout << fmt::format("wrote {} instance(s) to {}\n", instances.size(), a.out);
  return kOk;
}

// ---------------------------------------------------------------------------
// check / baseline

struct RunArgs {
  std::string input;
  std::string out;
  std::string oracle = "perfect";
  std::string algorithm = "qxr";
  int round_cap = 0;
  int retry_limit = 3;
  std::string hitting = "greedy";
  std::string variant = "guarded";
  bool assume_independent = false;
  std::string config;
};

bool scopes_consistent(const Instance& inst, const IdSet& kept) {
  for (const auto& c : inst.scopes.scopes) {
    IdSet part;
    std::set_intersection(c.begin(), c.end(), kept.begin(), kept.end(), std::back_inserter(part));
    if (!is_cons(ground_truth_consistent(gather(inst.facts, part)))) return false;
  }
  return true;
}

// Counts |F' n G| by membership lookup, independently of metrics().
bool metrics_agree(const Metrics& m, const IdSet& surviving, const IdSet& gold) {
  const std::set<FactId> g(gold.begin(), gold.end());
  std::size_t overlap = 0;
  for (auto id : surviving) overlap += g.count(id);
  const double p = surviving.empty() ? 1.0 : static_cast<double>(overlap) / surviving.size();
  const double r = static_cast<double>(overlap) / gold.size();
  return m.overlap == overlap && std::abs(m.precision - p) < 1e-12 && std::abs(m.recall - r) < 1e-12;
}

int cmd_run(const std::string& command, RunArgs a) {
  apply_config(a.config, {{"input", set(a.input)},
                          {"out", set(a.out)},
                          {"oracle", set(a.oracle)},
                          {"algorithm", set(a.algorithm)},
                          {"round-cap", set(a.round_cap)},
                          {"retry-limit", set(a.retry_limit)},
                          {"hitting", set(a.hitting)},
                          {"variant", set(a.variant)},
                          {"assume-independent", set(a.assume_independent)}});
  if (a.input.empty()) throw UsageError(fmt::format("{} needs --input", command));
  if (a.algorithm != "qxr" && a.algorithm != "pairwise" && a.algorithm != "direct") {
    throw UsageError(fmt::format("unknown algorithm '{}'", a.algorithm));
  }
  const OracleSpec spec = OracleSpec::parse(a.oracle);

  RepairPolicy policy;
  policy.round_cap = a.round_cap;
  policy.retry_limit = a.retry_limit;
  if (a.hitting == "exact") {
    policy.hitting = HittingStrategy::Exact;
  } else if (a.hitting != "greedy") {
    throw UsageError(fmt::format("unknown hitting strategy '{}'", a.hitting));
  }
  if (a.variant == "literal") {
    policy.qx.variant = QxVariant::Literal;
  } else if (a.variant != "guarded") {
    throw UsageError(fmt::format("unknown qx variant '{}'", a.variant));
  }

  std::shared_ptr<LlmClient> client;
  const OracleSpec* llm_spec = &spec;
  while (llm_spec->inner) llm_spec = llm_spec->inner.get();
  if (spec.uses_llm()) {
    const LlmConfig cfg = load_llm_config(llm_spec->llm_config);
    client = std::make_shared<LlmClient>(cfg, make_http_transport(cfg));
  }
  if (a.algorithm == "direct" && !client) {
    throw UsageError("the direct baseline needs an llm:<config> oracle");
  }

  const std::vector<Instance> instances = load_instances(a.input);
  json reports = json::array();
  bool any_capped = false;
  for (const auto& inst : instances) {
    const IdSet all = inst.all_ids();
    json rep = {{"id", inst.id}, {"seed", inst.seed}, {"n_facts", all.size()}};
    IdSet surviving;
    std::string line;
    if (a.algorithm == "direct") {
      const DirectResult d = direct_llm_baseline(*client, inst.facts, all);
      surviving = d.surviving;
      rep["warnings"] = d.warnings;
      rep["llm_calls"] = 1;
    } else {
      CountingOracle counted(build_oracle(spec, inst.facts, inst.seed, client, a.assume_independent),
                             a.algorithm);
      if (a.algorithm == "qxr") {
        PerfectOracle verifier(inst.facts);
        RepairPolicy checked = policy;
        checked.verifier = &verifier;
        const RepairResult r = qxr::qxr(counted, all, inst.scopes, checked);
        surviving = r.surviving;
        rep["result"] = to_json(r);
        if (!r.converged) {
          any_capped = true;
          line += " NOT-CONVERGED";
        }
        line += fmt::format(" rounds={} queries={}", r.rounds, r.stats.total_calls);
      } else {
        const PairwiseResult p = pairwise_baseline(counted, all);
        surviving = p.surviving;
        json edges = json::array();
        for (const auto& [x, y] : p.edges) edges.push_back({x, y});
        rep["result"] = {{"surviving", p.surviving}, {"removed", p.removed}, {"edges", edges}};
        line += fmt::format(" queries={}", p.queries);
      }
      rep["queries"] = counted.total_calls();
    }
    const bool cons = scopes_consistent(inst, surviving);
    rep["surviving"] = surviving;
    rep["consistent"] = cons;  // ground truth on every scope restricted to F'
    if (!inst.gold_consistent.empty()) {
      const Metrics m = metrics(surviving, inst.gold_consistent);
      rep["metrics"] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
                        {"surviving", m.surviving}, {"gold", m.gold}, {"overlap", m.overlap},
                        {"self_check", metrics_agree(m, surviving, inst.gold_consistent)}};
      line = fmt::format(" P={:.3f} R={:.3f} F1={:.3f}", m.precision, m.recall, m.f1) + line;
    }
    std::cout << fmt::format("{} consistent={}{}\n", inst.id, cons, line);
    reports.push_back(std::move(rep));
  }

  if (!a.out.empty()) {
    json doc = manifest(command, {{"input", a.input},
                                  {"oracle", spec.to_string()},
                                  {"algorithm", a.algorithm},
                                  {"round_cap", a.round_cap},
                                  {"retry_limit", a.retry_limit},
                                  {"hitting", a.hitting},
                                  {"variant", a.variant},
                                  {"assume_independent", a.assume_independent}});
    doc["instances"] = std::move(reports);
    write_json(a.out, doc);
  }
  return any_capped ? kNotConverged : kOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::vector<std::size_t> n_facts;
  std::vector<std::string> mixes;
  std::vector<std::string> noise;
  std::vector<int> reps;
  std::vector<std::string> algorithms;
  std::size_t instances = 10;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  int round_cap = 0;
  std::string out_dir;
  std::string config;
};

int cmd_sweep(const SweepArgs& a) {
  SweepGrid g;
  if (!a.n_facts.empty()) g.n_facts = a.n_facts;
  if (!a.mixes.empty()) {
    g.pattern_mixes.clear();
    for (const auto& mix : a.mixes) {
      std::vector<PlantSpec> specs;
      std::stringstream ss(mix);
      for (std::string item; std::getline(ss, item, '+');) {
        if (item != "none") specs.push_back(parse_plant_spec(item));
      }
      g.pattern_mixes.push_back(std::move(specs));
    }
  }
  if (!a.noise.empty()) {
    g.noise.clear();
    for (const auto& n : a.noise) {
      const auto comma = n.find(',');
      if (comma == std::string::npos) throw UsageError(fmt::format("--noise expects A,B, got '{}'", n));
      try {
        g.noise.emplace_back(std::stod(n.substr(0, comma)), std::stod(n.substr(comma + 1)));
      } catch (const std::exception&) {
        throw UsageError(fmt::format("--noise expects A,B, got '{}'", n));
      }
    }
  }
  if (!a.reps.empty()) g.repetitions = a.reps;
  if (!a.algorithms.empty()) {
    g.algorithms.clear();
    for (const auto& s : a.algorithms) {
      const auto alg = parse_algorithm(s);
      if (!alg) throw UsageError(fmt::format("unknown algorithm '{}'", s));
      g.algorithms.push_back(*alg);
    }
  }
  g.instances_per_cell = a.instances;
  g.seed = a.seed;
  g.threads = a.threads;
  g.policy.round_cap = a.round_cap;
  if (!a.config.empty()) g = sweep_grid_from_json(read_json_file(a.config), std::move(g));
  if (a.out_dir.empty()) throw UsageError("sweep needs --out-dir");

  const SweepResult res = run_sweep(g);
  const fs::path dir = a.out_dir;
  fs::create_directories(dir);
  std::ostringstream rows, summary, scaling;
  write_rows_csv(rows, res.rows);
  write_summary_csv(summary, res.summary);
  write_scaling_csv(scaling, res.summary);
  write_file_atomically(dir / "rows.csv", rows.str());
  write_file_atomically(dir / "summary.csv", summary.str());
  write_file_atomically(dir / "scaling.csv", scaling.str());

  std::size_t failed = 0;
  for (const auto& r : res.rows) failed += r.error.empty() ? 0 : 1;
  json m = manifest("sweep", to_json(g));
  m["runs"] = res.rows.size();
  m["failed_runs"] = failed;
  m["files"] = {"rows.csv", "summary.csv", "scaling.csv"};
  write_json(dir / "manifest.json", m);

  for (const auto& s : res.summary) {
    std::cout << fmt::format("N={:<4} {:<8} a={} b={} r={:<2} {} F1={:.3f}+-{:.3f} queries={:.1f}{}\n",
                             s.n_facts, to_string(s.algorithm), s.alpha, s.beta, s.repetitions,
                             s.pattern_mix, s.mean_f1, s.se_f1, s.mean_queries,
                             s.failures ? fmt::format(" failures={}", s.failures) : "");
  }
  std::cout << fmt::format("{} runs, {} failed; tables in {}\n", res.rows.size(), failed, dir.string());
  if (failed > 0) {
    for (const auto& r : res.rows) {
      if (!r.error.empty()) {
        std::cerr << fmt::format("first failure ({}): {}\n", r.instance_id, r.error);
        break;
      }
    }
  }
  return failed == res.rows.size() ? kFailed : kOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::string input;
  std::size_t n_facts = 12;
  std::vector<std::string> plant = {"negation_pair:1", "temporal_cycle:1", "exactly_one:1"};
  std::size_t count = 20;
  std::uint64_t seed = 1;
  std::size_t max_facts = 14;
  std::size_t subsets = 200;
  bool mutate = false;
  std::string out;
  std::string config;
};

struct Property {
  std::string name;
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::size_t skipped = 0;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok) {
      ++failures;
      if (notes.size() < 5) notes.push_back(what);
    }
  }
  void skip(const std::string& why) {
    ++skipped;
    if (notes.size() < 5) notes.push_back("skipped: " + why);
  }
};

int cmd_verify(VerifyArgs a) {
  apply_config(a.config, {{"input", set(a.input)},
                          {"n-facts", set(a.n_facts)},
                          {"plant", set(a.plant)},
                          {"count", set(a.count)},
                          {"seed", set(a.seed)},
                          {"max-facts", set(a.max_facts)},
                          {"subsets", set(a.subsets)},
                          {"mutate", set(a.mutate)},
                          {"out", set(a.out)}});
  std::vector<Instance> suite;
  if (!a.input.empty()) {
    suite = load_instances(a.input);
  } else {
    GenConfig c;
    c.n_facts = a.n_facts;
    for (const auto& p : a.plant) c.planted.push_back(parse_plant_spec(p));
    c.seed = a.seed;
    c.id = "verify";
    suite = generate_suite(c, a.count);
  }

  Property agreement, monotone, mus, duality, sound;
  agreement.name = "oracle_agreement";
  monotone.name = "monotonicity";
  mus.name = "mus_enumeration";
  duality.name = "hitting_set_duality";
  sound.name = "soundness";
  detail::Rng rng(a.seed);

  for (const auto& inst : suite) {
    const IdSet all = inst.all_ids();
    const std::string tag = inst.id;
    if (all.size() > a.max_facts) {
      const auto why = fmt::format("{} has {} facts, over the cap of {}", tag, all.size(), a.max_facts);
      for (auto* p : {&agreement, &monotone, &mus, &duality, &sound}) p->skip(why);
      continue;
    }

    // Random subsets plus the full set: both consistency procedures must agree.
    std::vector<IdSet> samples = {all};
    for (std::size_t s = 0; s < a.subsets; ++s) {
      IdSet sub;
      for (auto id : all) {
        if (rng.chance(0.5)) sub.push_back(id);
      }
      samples.push_back(std::move(sub));
    }
    for (const auto& sub : samples) {
      const auto ptrs = gather(inst.facts, sub);
      try {
        agreement.expect(ground_truth_consistent(ptrs) == brute_force_consistent(ptrs),
                         fmt::format("{} {}", tag, ids_text(sub)));
      } catch (const BudgetExceeded& e) {
        agreement.skip(fmt::format("{}: {}", tag, e.what()));
      }
    }

    // Adding a fact never turns an inconsistent set consistent.
    for (std::size_t s = 0; s + 1 < samples.size(); ++s) {
      const IdSet& sub = samples[s + 1];
      if (sub.size() == all.size()) continue;
      const IdSet rest = set_difference(all, sub);
      IdSet bigger = sub;
      bigger.push_back(rest[rng.below(rest.size())]);
      normalize(bigger);
      const bool small_cons = is_cons(ground_truth_consistent(gather(inst.facts, sub)));
      const bool big_cons = is_cons(ground_truth_consistent(gather(inst.facts, bigger)));
      monotone.expect(small_cons || !big_cons, fmt::format("{} {} -> {}", tag, ids_text(sub), ids_text(bigger)));
    }

    std::vector<IdSet> every_mus;
    try {
      every_mus = enumerate_all_mus(inst.facts, all.size());
    } catch (const BudgetExceeded& e) {
      for (auto* p : {&mus, &duality}) p->skip(fmt::format("{}: {}", tag, e.what()));
      continue;
    }
    const std::set<IdSet> enumerated(every_mus.begin(), every_mus.end());
    const std::set<IdSet> gold(inst.gold_mus.begin(), inst.gold_mus.end());
    mus.expect(enumerated == gold, fmt::format("{}: enumeration differs from the gold MUS list", tag));

    PerfectOracle perfect(inst.facts);
    const RepairResult r = qxr::qxr(perfect, all, inst.scopes);
    for (const auto& m : r.mus_family) {
      mus.expect(enumerated.count(m.fact_ids) == 1, fmt::format("{}: extracted {} is not a MUS", tag, ids_text(m.fact_ids)));
    }
    sound.expect(r.converged && scopes_consistent(inst, r.surviving),
                 fmt::format("{}: repaired set is not consistent", tag));

    // Exhaustive repair size must equal |F| minus a minimum hitting set of every MUS.
    OraclePtr base = std::make_shared<PerfectOracle>(inst.facts);
    OraclePtr judged = a.mutate ? std::make_shared<MutationOracle>(base, all) : base;
    const IdSet removal = exhaustive_min_removal(*judged, all, inst.scopes, a.max_facts);
    const std::size_t min_hs = every_mus.empty() ? 0 : exact_hitting_set(every_mus).size();
    duality.expect(removal.size() == min_hs,
                   fmt::format("{}: exhaustive repair removes {}, minimum hitting set has {}", tag,
                               removal.size(), min_hs));
  }

  bool ok = true;
  json props = json::array();
  for (const auto* p : {&agreement, &monotone, &mus, &duality, &sound}) {
    const char* status = p->failures > 0 ? "FAIL" : (p->checks == 0 ? "SKIP" : "PASS");
    ok = ok && p->failures == 0;
    std::cout << fmt::format("{} {} ({} checks, {} failed, {} skipped)\n", status, p->name, p->checks,
                             p->failures, p->skipped);
    for (const auto& n : p->notes) std::cout << "    " << n << "\n";
    props.push_back({{"name", p->name}, {"status", status}, {"checks", p->checks},
                     {"failures", p->failures}, {"skipped", p->skipped}, {"notes", p->notes}});
  }
  if (!a.out.empty()) {
    json doc = manifest("verify", {{"input", a.input}, {"n_facts", a.n_facts}, {"plant", a.plant},
                                   {"count", a.count}, {"seed", a.seed}, {"max_facts", a.max_facts},
                                   {"subsets", a.subsets}, {"mutate", a.mutate}});
    doc["properties"] = props;
    write_json(a.out, doc);
  }
  return ok ? kOk : kFailed;
}

void add_run_options(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("-i,--input", a.input, "instance file (JSON lines)");
  cmd->add_option("-o,--out", a.out, "report file (JSON)");
  cmd->add_option("--oracle", a.oracle,
                  "perfect | noisy:A,B[,seed=S] | majority:R:<inner> | llm:<config.json>");
  cmd->add_option("--round-cap", a.round_cap, "QXR round cap (0 selects 4m)");
  cmd->add_option("--retry-limit", a.retry_limit, "scope re-queries after an empty extraction");
  cmd->add_option("--hitting", a.hitting, "greedy | exact");
  cmd->add_option("--variant", a.variant, "guarded | literal");
  cmd->add_flag("--assume-independent", a.assume_independent,
                "allow majority votes over repeated LLM calls");
  cmd->add_option("--config", a.config, "JSON file whose keys override these flags");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conflict localization and repair over factual statements"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(code_version()));

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate instances with planted conflicts");
  g->add_option("--n-facts", gen.n_facts, "facts per instance");
  g->add_option("--plant", gen.plant, "pattern[:count], repeatable (negation_pair, temporal_cycle, exactly_one)");
  g->add_option("--offtopic", gen.offtopic, "fraction of distractors that are off-topic");
  g->add_option("--seed", gen.seed, "top-level seed");
  g->add_option("--count", gen.count, "number of instances");
  g->add_option("--scope-mode", gen.scope_mode, "single_scope | per_cluster");
  g->add_option("--cluster-size", gen.cluster_size, "facts per scope in per_cluster mode");
  g->add_flag("--overlap", gen.overlap, "let consecutive temporal cycles share an edge");
  g->add_option("--id", gen.id, "instance id prefix");
  g->add_option("-o,--out", gen.out, "output file (JSON lines)");
  g->add_option("--config", gen.config, "JSON file whose keys override these flags");

  RunArgs check, baseline;
  baseline.algorithm = "pairwise";
  auto* c = app.add_subcommand("check", "repair each instance and report the result");
  add_run_options(c, check);
  c->add_option("--algorithm", check.algorithm, "qxr | pairwise | direct");
  auto* b = app.add_subcommand("baseline", "run the pairwise or direct baseline");
  add_run_options(b, baseline);
  b->add_option("--method", baseline.algorithm, "pairwise | direct");

  SweepArgs sweep;
  auto* s = app.add_subcommand("sweep", "run a parameter grid and write CSV tables");
  s->add_option("--n-facts", sweep.n_facts, "fact counts, repeatable");
  s->add_option("--mix", sweep.mixes, "pattern mix like negation_pair:2+temporal_cycle:1, repeatable");
  s->add_option("--noise", sweep.noise, "A,B noise rates, repeatable");
  s->add_option("--reps", sweep.reps, "majority repetitions (odd), repeatable");
  s->add_option("--algorithm", sweep.algorithms, "qxr | pairwise, repeatable");
  s->add_option("--instances", sweep.instances, "instances per cell");
  s->add_option("--seed", sweep.seed, "top-level seed");
  s->add_option("--threads", sweep.threads, "worker threads (0 = hardware)");
  s->add_option("--round-cap", sweep.round_cap, "QXR round cap (0 selects 4m)");
  s->add_option("-o,--out-dir", sweep.out_dir, "directory for rows.csv, summary.csv, scaling.csv");
  s->add_option("--config", sweep.config, "JSON grid whose keys override these flags");

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "brute-force cross-checks on small instances");
  v->add_option("-i,--input", verify.input, "instance file; default generates a suite");
  v->add_option("--n-facts", verify.n_facts, "facts per generated instance");
  v->add_option("--plant", verify.plant, "pattern[:count], repeatable");
  v->add_option("--count", verify.count, "generated instances");
  v->add_option("--seed", verify.seed, "seed for generation and subset sampling");
  v->add_option("--max-facts", verify.max_facts, "larger instances are skipped");
  v->add_option("--subsets", verify.subsets, "random subsets per instance for oracle checks");
  v->add_flag("--mutate", verify.mutate, "flip the verdict on each full fact set (sensitivity check)");
  v->add_option("-o,--out", verify.out, "report file (JSON)");
  v->add_option("--config", verify.config, "JSON file whose keys override these flags");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (g->parsed()) return cmd_gen(gen);
    if (c->parsed()) return cmd_run("check", check);
    if (b->parsed()) {
      if (baseline.algorithm != "pairwise" && baseline.algorithm != "direct") {
        throw UsageError(fmt::format("unknown baseline '{}'", baseline.algorithm));
      }
      return cmd_run("baseline", baseline);
    }
    if (s->parsed()) return cmd_sweep(sweep);
    if (v->parsed()) return cmd_verify(verify);
  } catch (const TransportError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  } catch (const LlmParseError& e) {
    std::cerr << "error: " << e.what() << "\nlast response: " << e.last_response() << "\n";
    return kFailed;
  } catch (const std::exception& e) {  // config, oracle spec, infeasible generation, IO
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
