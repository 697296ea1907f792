#include "qxr/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "qxr/detail/hashing.hpp"
#include "qxr/semantics.hpp"

#ifndef QXR_CODE_VERSION
#define QXR_CODE_VERSION "unknown"
#endif

namespace qxr {

Metrics metrics(std::span<const FactId> surviving, std::span<const FactId> gold) {
  if (gold.empty()) throw std::invalid_argument("metrics need a nonempty gold set");
  IdSet s(surviving.begin(), surviving.end());
  IdSet g(gold.begin(), gold.end());
  normalize(s);
  normalize(g);
  IdSet both;
  std::set_intersection(s.begin(), s.end(), g.begin(), g.end(), std::back_inserter(both));
  Metrics m;
  m.surviving = s.size();
  m.gold = g.size();
  m.overlap = both.size();
  m.precision = s.empty() ? 1.0 : static_cast<double>(m.overlap) / static_cast<double>(m.surviving);
  m.recall = static_cast<double>(m.overlap) / static_cast<double>(m.gold);
  const double sum = m.precision + m.recall;
  m.f1 = sum == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / sum;
  return m;
}

PairwiseResult pairwise_baseline(Oracle& oracle, std::span<const FactId> facts) {
  IdSet f(facts.begin(), facts.end());
  normalize(f);
  if (f.size() < 2) throw std::invalid_argument("pairwise baseline needs at least two facts");

  PairwiseResult out;
  std::map<FactId, std::vector<std::size_t>> incident;
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t j = i + 1; j < f.size(); ++j) {
      ++out.queries;
      if (is_cons(oracle.query(IdSet{f[i], f[j]}))) continue;
      incident[f[i]].push_back(out.edges.size());
      incident[f[j]].push_back(out.edges.size());
      out.edges.emplace_back(f[i], f[j]);
    }
  }

  std::vector<bool> alive(out.edges.size(), true);
  std::size_t remaining = out.edges.size();
  while (remaining > 0) {
    FactId best = -1;
    std::size_t best_degree = 0;
    for (const auto& [id, edges] : incident) {
      std::size_t degree = 0;
      for (auto e : edges) degree += alive[e] ? 1 : 0;
      if (degree > best_degree) {
        best = id;
        best_degree = degree;
      }
    }
    for (auto e : incident[best]) {
      if (alive[e]) {
        alive[e] = false;
        --remaining;
      }
    }
    out.removed.push_back(best);
  }
  normalize(out.removed);
  out.surviving = set_difference(f, out.removed);
  return out;
}

std::string normalize_fact_text(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    } else if (std::isspace(c)) {
      pending_space = true;
    }
  }
  return out;
}

DirectResult direct_llm_baseline(LlmClient& client, std::span<const Fact> pool,
                                 std::span<const FactId> ids) {
  IdSet f(ids.begin(), ids.end());
  normalize(f);
  std::vector<std::string> texts;
  std::map<std::string, FactId> exact, loose;
  for (const Fact* fact : gather(pool, f)) {
    texts.push_back(fact->text);
    exact.emplace(fact->text, fact->id);
    loose.emplace(normalize_fact_text(fact->text), fact->id);
  }
  DirectResult out;
  for (const auto& s : client.consistent_subset(texts)) {
    if (auto it = exact.find(s); it != exact.end()) {
      out.surviving.push_back(it->second);
    } else if (auto jt = loose.find(normalize_fact_text(s)); jt != loose.end()) {
      out.surviving.push_back(jt->second);
    } else {
      out.warnings.push_back(fmt::format("returned text matches no fact: \"{}\"", s));
    }
  }
  normalize(out.surviving);
  return out;
}

// ---------------------------------------------------------------------------
// Oracle specs

namespace {

double parse_double(std::string_view s, std::string_view what) {
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw OracleSpecError(fmt::format("bad {} '{}'", what, s));
  }
  return v;
}

template <typename Int>
Int parse_int(std::string_view s, std::string_view what) {
  Int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw OracleSpecError(fmt::format("bad {} '{}'", what, s));
  }
  return v;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

}  // namespace

OracleSpec OracleSpec::parse(std::string_view text) {
  OracleSpec spec;
  if (text == "perfect") return spec;
  if (text.rfind("noisy:", 0) == 0) {
    spec.kind = Kind::Noisy;
    const auto parts = split_on(text.substr(6), ',');
    if (parts.size() < 2 || parts.size() > 3) {
      throw OracleSpecError(fmt::format("expected noisy:ALPHA,BETA[,seed=S], got '{}'", text));
    }
    spec.alpha = parse_double(parts[0], "alpha");
    spec.beta = parse_double(parts[1], "beta");
    if (parts.size() == 3) {
      if (parts[2].rfind("seed=", 0) != 0) throw OracleSpecError(fmt::format("bad noisy option '{}'", parts[2]));
      spec.seed = parse_int<std::uint64_t>(parts[2].substr(5), "seed");
    }
    if (!(spec.alpha >= 0 && spec.alpha <= 1 && spec.beta >= 0 && spec.beta <= 1)) {
      throw OracleSpecError(fmt::format("noise rates must lie in [0,1] in '{}'", text));
    }
    return spec;
  }
  if (text.rfind("majority:", 0) == 0) {
    spec.kind = Kind::Majority;
    const auto rest = text.substr(9);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) {
      throw OracleSpecError(fmt::format("expected majority:R:<inner>, got '{}'", text));
    }
    spec.repetitions = parse_int<int>(rest.substr(0, colon), "repetition count");
    if (spec.repetitions < 1 || spec.repetitions % 2 == 0) {
      throw OracleSpecError(fmt::format("repetitions must be odd and positive, got {}", spec.repetitions));
    }
    spec.inner = std::make_shared<const OracleSpec>(parse(rest.substr(colon + 1)));
    return spec;
  }
  if (text.rfind("llm:", 0) == 0 && text.size() > 4) {
    spec.kind = Kind::Llm;
    spec.llm_config = std::string(text.substr(4));
    return spec;
  }
  throw OracleSpecError(fmt::format(
      "unknown oracle '{}' (expected perfect, noisy:A,B[,seed=S], majority:R:<inner> or llm:<path>)",
      text));
}

std::string OracleSpec::to_string() const {
  switch (kind) {
    case Kind::Perfect: return "perfect";
    case Kind::Noisy:
      return seed ? fmt::format("noisy:{},{},seed={}", alpha, beta, *seed)
                  : fmt::format("noisy:{},{}", alpha, beta);
    case Kind::Majority: return fmt::format("majority:{}:{}", repetitions, inner->to_string());
    case Kind::Llm: return "llm:" + llm_config.string();
  }
  return "?";
}

bool OracleSpec::uses_llm() const {
  if (kind == Kind::Llm) return true;
  return inner && inner->uses_llm();
}

int OracleSpec::max_repetitions() const {
  const int below = inner ? inner->max_repetitions() : 1;
  return std::max(kind == Kind::Majority ? repetitions : 1, below);
}

OraclePtr build_oracle(const OracleSpec& spec, std::span<const Fact> pool,
                       std::uint64_t instance_seed, std::shared_ptr<LlmClient> llm,
                       bool assume_independent) {
  if (spec.uses_llm() && spec.max_repetitions() > 1 && !assume_independent) {
    throw OracleSpecError(
        "majority voting over an LLM oracle assumes independent repeated calls; pass "
        "--assume-independent to accept that assumption");
  }
  switch (spec.kind) {
    case OracleSpec::Kind::Perfect: return std::make_shared<PerfectOracle>(pool);
    case OracleSpec::Kind::Noisy: {
      const std::uint64_t seed = detail::derive_seed(spec.seed.value_or(0x6e6f697379ULL), instance_seed);
      return std::make_shared<NoisyOracle>(std::make_shared<PerfectOracle>(pool),
                                           NoiseParams{spec.alpha, spec.beta, seed});
    }
    case OracleSpec::Kind::Majority:
      return std::make_shared<MajorityOracle>(
          build_oracle(*spec.inner, pool, instance_seed, llm, assume_independent),
          VoteParams{spec.repetitions});
    case OracleSpec::Kind::Llm:
      if (!llm) throw OracleSpecError("an llm oracle needs a configured client");
      return std::make_shared<LlmOracle>(std::move(llm), pool);
  }
  throw OracleSpecError("unknown oracle kind");
}

std::string_view to_string(Algorithm a) { return a == Algorithm::Qxr ? "qxr" : "pairwise"; }

std::optional<Algorithm> parse_algorithm(std::string_view s) {
  if (s == "qxr") return Algorithm::Qxr;
  if (s == "pairwise") return Algorithm::Pairwise;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Sweeps

PlantSpec parse_plant_spec(std::string_view text) {
  const auto colon = text.find(':');
  const auto name = text.substr(0, colon);
  const auto pattern = parse_pattern(name);
  if (!pattern) throw std::invalid_argument(fmt::format("unknown pattern '{}'", name));
  PlantSpec spec{*pattern, 1};
  if (colon != std::string_view::npos) {
    const auto count = text.substr(colon + 1);
    const auto [p, ec] = std::from_chars(count.data(), count.data() + count.size(), spec.count);
    if (ec != std::errc() || p != count.data() + count.size() || spec.count < 0) {
      throw std::invalid_argument(fmt::format("bad pattern count in '{}'", text));
    }
  }
  return spec;
}

std::string mix_label(const std::vector<PlantSpec>& mix) {
  if (mix.empty()) return "none";
  std::string out;
  for (const auto& p : mix) {
    if (!out.empty()) out += '+';
    out += fmt::format("{}:{}", to_string(p.pattern), p.count);
  }
  return out;
}

SweepGrid sweep_grid_from_json(const nlohmann::json& j, SweepGrid base) {
  if (!j.is_object()) throw std::invalid_argument("sweep grid must be a JSON object");
  SweepGrid g = std::move(base);
  static const std::vector<std::string> known = {
      "n_facts",  "pattern_mixes", "noise",       "repetitions",  "algorithms",
      "instances_per_cell", "seed", "offtopic_fraction", "scope_mode", "cluster_size",
      "overlap",  "round_cap",     "retry_limit", "threads"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument(fmt::format("unknown sweep key '{}'", key));
    }
  }
  try {
    if (j.contains("n_facts")) g.n_facts = j["n_facts"].get<std::vector<std::size_t>>();
    if (j.contains("pattern_mixes")) {
      g.pattern_mixes.clear();
      for (const auto& mix : j["pattern_mixes"]) {
        std::vector<PlantSpec> specs;
        for (const auto& item : mix) specs.push_back(parse_plant_spec(item.get<std::string>()));
        g.pattern_mixes.push_back(std::move(specs));
      }
    }
    if (j.contains("noise")) g.noise = j["noise"].get<std::vector<std::pair<double, double>>>();
    if (j.contains("repetitions")) g.repetitions = j["repetitions"].get<std::vector<int>>();
    if (j.contains("algorithms")) {
      g.algorithms.clear();
      for (const auto& a : j["algorithms"]) {
        const auto alg = parse_algorithm(a.get<std::string>());
        if (!alg) throw std::invalid_argument(fmt::format("unknown algorithm {}", a.dump()));
        g.algorithms.push_back(*alg);
      }
    }
    g.instances_per_cell = j.value("instances_per_cell", g.instances_per_cell);
    g.seed = j.value("seed", g.seed);
    g.base.offtopic_fraction = j.value("offtopic_fraction", g.base.offtopic_fraction);
    if (j.contains("scope_mode")) {
      const auto mode = parse_scope_mode(j["scope_mode"].get<std::string>());
      if (!mode) throw std::invalid_argument("scope_mode must be single_scope or per_cluster");
      g.base.scope_mode = *mode;
    }
    g.base.cluster_size = j.value("cluster_size", g.base.cluster_size);
    g.base.overlap = j.value("overlap", g.base.overlap);
    g.policy.round_cap = j.value("round_cap", g.policy.round_cap);
    g.policy.retry_limit = j.value("retry_limit", g.policy.retry_limit);
    g.threads = j.value("threads", g.threads);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(fmt::format("bad sweep grid: {}", e.what()));
  }
  return g;
}

nlohmann::json to_json(const SweepGrid& g) {
  nlohmann::json mixes = nlohmann::json::array();
  for (const auto& mix : g.pattern_mixes) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& p : mix) items.push_back(fmt::format("{}:{}", to_string(p.pattern), p.count));
    mixes.push_back(items);
  }
  nlohmann::json algorithms = nlohmann::json::array();
  for (auto a : g.algorithms) algorithms.push_back(to_string(a));
  return {{"n_facts", g.n_facts},
          {"pattern_mixes", mixes},
          {"noise", g.noise},
          {"repetitions", g.repetitions},
          {"algorithms", algorithms},
          {"instances_per_cell", g.instances_per_cell},
          {"seed", g.seed},
          {"offtopic_fraction", g.base.offtopic_fraction},
          {"scope_mode", to_string(g.base.scope_mode)},
          {"cluster_size", g.base.cluster_size},
          {"overlap", g.base.overlap},
          {"round_cap", g.policy.round_cap},
          {"retry_limit", g.policy.retry_limit}};
}

namespace {

struct Cell {
  std::size_t suite;  // index into the generated suites
  std::size_t instance;
  double alpha, beta;
  int r;
  Algorithm algorithm;
};

bool all_scopes_consistent(const Instance& inst, const IdSet& kept) {
  for (const auto& c : inst.scopes.scopes) {
    IdSet part;
    std::set_intersection(c.begin(), c.end(), kept.begin(), kept.end(), std::back_inserter(part));
    if (!is_cons(ground_truth_consistent(gather(inst.facts, part)))) return false;
  }
  return true;
}

SweepRow run_cell(const Instance& inst, const std::string& mix, const Cell& cell,
                  const RepairPolicy& policy) {
  SweepRow row;
  row.instance_id = inst.id;
  row.instance_seed = inst.seed;
  row.n_facts = inst.facts.size();
  row.pattern_mix = mix;
  for (const auto& u : inst.gold_mus) row.max_mus_size = std::max(row.max_mus_size, u.size());
  row.alpha = cell.alpha;
  row.beta = cell.beta;
  row.repetitions = cell.r;
  row.algorithm = cell.algorithm;
  try {
    auto perfect = std::make_shared<PerfectOracle>(inst.facts);
    auto raw = std::make_shared<CountingOracle>(perfect, "raw");
    const std::uint64_t noise_seed = detail::derive_seed(
        inst.seed, detail::combine(detail::hash_string(fmt::format("{},{}", cell.alpha, cell.beta)),
                                   static_cast<std::uint64_t>(cell.r)));
    OraclePtr stack = raw;
    if (cell.alpha > 0 || cell.beta > 0) {
      stack = std::make_shared<NoisyOracle>(stack, NoiseParams{cell.alpha, cell.beta, noise_seed});
    }
    if (cell.r > 1) stack = std::make_shared<MajorityOracle>(stack, VoteParams{cell.r});
    auto audit = std::make_shared<AuditingOracle>(stack, perfect);
    CountingOracle counted(audit, "algorithm");

    const IdSet all = inst.all_ids();
    IdSet surviving;
    if (cell.algorithm == Algorithm::Qxr) {
      const RepairResult r = qxr(counted, all, inst.scopes, policy);
      surviving = r.surviving;
      row.rounds = r.rounds;
      row.converged = r.converged;
      std::size_t k = 0;
      for (const auto& m : r.mus_family) k = std::max(k, m.fact_ids.size());
      row.budget = r.rounds == 0 ? inst.scopes.size()
                                 : qxr_query_budget(r.rounds, inst.scopes.size(), k, all.size());
    } else {
      const PairwiseResult p = pairwise_baseline(counted, all);
      surviving = p.surviving;
      row.budget = all.size() * (all.size() - 1) / 2;
    }
    row.queries = counted.total_calls();
    row.within_budget = cell.algorithm == Algorithm::Qxr ? row.queries <= row.budget
                                                         : row.queries == row.budget;
    row.raw_calls = raw->total_calls();
    row.audited_calls = audit->calls();
    row.audited_errors = audit->errors();
    row.scopes_consistent = all_scopes_consistent(inst, surviving);
    row.m = metrics(surviving, inst.gold_consistent);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

struct Moments {
  double sum = 0, sum_sq = 0;
  std::size_t n = 0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  double mean() const { return n == 0 ? 0 : sum / static_cast<double>(n); }
  double se() const {
    if (n < 2) return 0;
    const double m = mean();
    const double var = std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
    return std::sqrt(var / static_cast<double>(n));
  }
};

}  // namespace

SweepResult run_sweep(const SweepGrid& grid) {
  if (grid.n_facts.empty() || grid.pattern_mixes.empty() || grid.noise.empty() ||
      grid.repetitions.empty() || grid.algorithms.empty() || grid.instances_per_cell == 0) {
    throw std::invalid_argument("sweep grid is empty");
  }
  for (int r : grid.repetitions) {
    if (r < 1 || r % 2 == 0) throw std::invalid_argument(fmt::format("repetitions must be odd, got {}", r));
  }

  struct Suite {
    std::string mix;
    std::vector<Instance> instances;
  };
  std::vector<Suite> suites;
  for (std::size_t ni = 0; ni < grid.n_facts.size(); ++ni) {
    for (std::size_t mi = 0; mi < grid.pattern_mixes.size(); ++mi) {
      GenConfig c = grid.base;
      c.n_facts = grid.n_facts[ni];
      c.planted = grid.pattern_mixes[mi];
      c.seed = detail::derive_seed(grid.seed, detail::combine(c.n_facts, mi));
      c.id = fmt::format("n{}-m{}", c.n_facts, mi);
      suites.push_back({mix_label(c.planted), generate_suite(c, grid.instances_per_cell)});
    }
  }

  std::vector<Cell> cells;
  for (std::size_t s = 0; s < suites.size(); ++s) {
    for (const auto& [alpha, beta] : grid.noise) {
      for (int r : grid.repetitions) {
        for (auto alg : grid.algorithms) {
          for (std::size_t i = 0; i < suites[s].instances.size(); ++i) {
            cells.push_back({s, i, alpha, beta, r, alg});
          }
        }
      }
    }
  }

  std::vector<SweepRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      rows[i] = run_cell(suites[c.suite].instances[c.instance], suites[c.suite].mix, c, grid.policy);
    }
  };
  unsigned threads = grid.threads != 0 ? grid.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cells.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SweepResult out;
  out.rows = std::move(rows);
  out.summary = summarize(out.rows);
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<SweepRow>& rows) {
  using Key = std::tuple<std::size_t, std::string, double, double, int, int>;
  struct Acc {
    SummaryRow head;
    Moments p, r, f1, q, rounds;
    std::size_t converged = 0;
    std::uint64_t calls = 0, errors = 0;
  };
  std::map<Key, Acc> groups;
  for (const auto& row : rows) {
    const Key key{row.n_facts, row.pattern_mix, row.alpha, row.beta, row.repetitions,
                  static_cast<int>(row.algorithm)};
    auto& acc = groups[key];
    acc.head.n_facts = row.n_facts;
    acc.head.pattern_mix = row.pattern_mix;
    acc.head.alpha = row.alpha;
    acc.head.beta = row.beta;
    acc.head.repetitions = row.repetitions;
    acc.head.algorithm = row.algorithm;
    ++acc.head.runs;
    if (!row.error.empty()) {
      ++acc.head.failures;
      continue;
    }
    acc.p.add(row.m.precision);
    acc.r.add(row.m.recall);
    acc.f1.add(row.m.f1);
    acc.q.add(static_cast<double>(row.queries));
    acc.rounds.add(row.rounds);
    acc.converged += row.converged ? 1 : 0;
    acc.calls += row.audited_calls;
    acc.errors += row.audited_errors;
    acc.head.all_within_budget = acc.head.all_within_budget && row.within_budget;
  }

  std::vector<SummaryRow> out;
  for (auto& [_, acc] : groups) {
    SummaryRow s = acc.head;
    s.mean_precision = acc.p.mean();
    s.se_precision = acc.p.se();
    s.mean_recall = acc.r.mean();
    s.se_recall = acc.r.se();
    s.mean_f1 = acc.f1.mean();
    s.se_f1 = acc.f1.se();
    s.mean_queries = acc.q.mean();
    s.se_queries = acc.q.se();
    s.mean_rounds = acc.rounds.mean();
    const std::size_t ok = s.runs - s.failures;
    s.converged_fraction = ok == 0 ? 0 : static_cast<double>(acc.converged) / static_cast<double>(ok);
    if (acc.calls > 0) {
      const double p = static_cast<double>(acc.errors) / static_cast<double>(acc.calls);
      s.empirical_error = p;
      s.se_error = std::sqrt(p * (1 - p) / static_cast<double>(acc.calls));
    }
    const double eps = std::max(s.alpha, s.beta);
    if (eps < 0.5) {
      s.binomial_error = binomial_majority_error(s.repetitions, eps);
      s.hoeffding_bound = hoeffding_majority_bound(s.repetitions, eps);
      s.bound_ok = s.empirical_error <= s.hoeffding_bound + 3 * s.se_error;
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_rows_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "instance_id,instance_seed,n_facts,pattern_mix,max_mus_size,alpha,beta,repetitions,"
         "algorithm,precision,recall,f1,surviving,gold,overlap,rounds,converged,queries,"
         "raw_calls,budget,within_budget,audited_calls,audited_errors,scopes_consistent,error\n";
  for (const auto& r : rows) {
    std::string error = r.error;
    std::replace(error.begin(), error.end(), '"', '\'');
    out << fmt::format("{},{},{},{},{},{},{},{},{},{:.6f},{:.6f},{:.6f},{},{},{},{},{},{},{},{},{},{},{},{},\"{}\"\n",
                       r.instance_id, r.instance_seed, r.n_facts, r.pattern_mix, r.max_mus_size,
                       r.alpha, r.beta, r.repetitions, to_string(r.algorithm), r.m.precision,
                       r.m.recall, r.m.f1, r.m.surviving, r.m.gold, r.m.overlap, r.rounds,
                       r.converged, r.queries, r.raw_calls, r.budget, r.within_budget,
                       r.audited_calls, r.audited_errors, r.scopes_consistent, error);
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary) {
  out << "n_facts,pattern_mix,alpha,beta,repetitions,algorithm,runs,failures,mean_precision,"
         "se_precision,mean_recall,se_recall,mean_f1,se_f1,mean_queries,se_queries,mean_rounds,"
         "converged_fraction,empirical_error,se_error,binomial_error,hoeffding_bound,bound_ok,"
         "all_within_budget\n";
  for (const auto& s : summary) {
    out << fmt::format(
        "{},{},{},{},{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.3f},{:.3f},{:.3f},"
        "{:.4f},{:.6f},{:.6f},{:.6f},{:.6f},{},{}\n",
        s.n_facts, s.pattern_mix, s.alpha, s.beta, s.repetitions, to_string(s.algorithm), s.runs,
        s.failures, s.mean_precision, s.se_precision, s.mean_recall, s.se_recall, s.mean_f1,
        s.se_f1, s.mean_queries, s.se_queries, s.mean_rounds, s.converged_fraction,
        s.empirical_error, s.se_error, s.binomial_error, s.hoeffding_bound,
        s.bound_ok ? (*s.bound_ok ? "true" : "false") : "n/a", s.all_within_budget);
  }
}

void write_scaling_csv(std::ostream& out, const std::vector<SummaryRow>& summary) {
  out << "algorithm,n_facts,alpha,beta,repetitions,mean_queries,se_queries,pairs\n";
  std::vector<const SummaryRow*> sorted;
  for (const auto& s : summary) sorted.push_back(&s);
  std::stable_sort(sorted.begin(), sorted.end(), [](const SummaryRow* a, const SummaryRow* b) {
    return std::tie(a->algorithm, a->alpha, a->beta, a->repetitions, a->pattern_mix, a->n_facts) <
           std::tie(b->algorithm, b->alpha, b->beta, b->repetitions, b->pattern_mix, b->n_facts);
  });
  for (const auto* s : sorted) {
    out << fmt::format("{},{},{},{},{},{:.3f},{:.3f},{}\n", to_string(s->algorithm), s->n_facts,
                       s->alpha, s->beta, s->repetitions, s->mean_queries, s->se_queries,
                       s->n_facts * (s->n_facts - 1) / 2);
  }
}

std::string_view code_version() { return QXR_CODE_VERSION; }

}  // namespace qxr
