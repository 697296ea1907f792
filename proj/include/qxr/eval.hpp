#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qxr/datagen.hpp"
#include "qxr/llm.hpp"
#include "qxr/oracle.hpp"
#include "qxr/repair.hpp"

namespace qxr {

struct Metrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t surviving = 0;
  std::size_t gold = 0;
  std::size_t overlap = 0;
};

/// P = |F' n G| / |F'| (1 when F' is empty), R = |F' n G| / |G|, F1 their harmonic mean
/// (0 when both are 0). Throws std::invalid_argument when `gold` is empty.
Metrics metrics(std::span<const FactId> surviving, std::span<const FactId> gold);

struct PairwiseResult {
  IdSet surviving;
  IdSet removed;
  std::vector<std::pair<FactId, FactId>> edges;  ///< pairs judged inconsistent
  std::uint64_t queries = 0;
};

/// Queries every pair once, then removes facts by greedy max-degree vertex cover over the
/// contradiction edges (ties to the smallest id). Requires |F| >= 2.
PairwiseResult pairwise_baseline(Oracle& oracle, std::span<const FactId> facts);

struct DirectResult {
  IdSet surviving;
  std::vector<std::string> warnings;  ///< one per returned string that matched no fact
};

/// Lowercase, punctuation removed, whitespace collapsed.
std::string normalize_fact_text(std::string_view text);

/// Asks the model once for a consistent subset of the facts named by `ids` and maps the
/// returned texts back to ids: exact match first, then normalized match.
DirectResult direct_llm_baseline(LlmClient& client, std::span<const Fact> pool,
                                 std::span<const FactId> ids);

/// Oracle stacks described by strings:
///   perfect | noisy:A,B[,seed=S] | majority:R:<inner spec> | llm:<config path>
struct OracleSpec {
  enum class Kind { Perfect, Noisy, Majority, Llm };
  Kind kind = Kind::Perfect;
  double alpha = 0;
  double beta = 0;
  std::optional<std::uint64_t> seed;
  int repetitions = 1;
  std::shared_ptr<const OracleSpec> inner;
  std::filesystem::path llm_config;

  static OracleSpec parse(std::string_view text);
  std::string to_string() const;
  bool uses_llm() const;
  /// Largest repetition count anywhere in the stack.
  int max_repetitions() const;
};

class OracleSpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Builds the stack over a dense pool. Noisy layers draw their stream from the spec's seed
/// (or a fixed default) combined with `instance_seed`. `llm` supplies the client for llm specs (required for them).
/// Throws OracleSpecError for LLM majority votes unless `assume_independent` is set.
OraclePtr build_oracle(const OracleSpec& spec, std::span<const Fact> pool,
                       std::uint64_t instance_seed, std::shared_ptr<LlmClient> llm = nullptr,
                       bool assume_independent = false);

enum class Algorithm { Qxr, Pairwise };
std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view s);

struct SweepGrid {
  std::vector<std::size_t> n_facts = {30};
  std::vector<std::vector<PlantSpec>> pattern_mixes = {{{Pattern::NegationPair, 2}}};
  std::vector<std::pair<double, double>> noise = {{0.0, 0.0}};
  std::vector<int> repetitions = {1};
  std::vector<Algorithm> algorithms = {Algorithm::Qxr, Algorithm::Pairwise};
  std::size_t instances_per_cell = 10;
  std::uint64_t seed = 0;
  GenConfig base;  ///< everything but n_facts, planted and seed
  RepairPolicy policy;
  unsigned threads = 0;  ///< 0 selects hardware concurrency
};

/// Reads a grid from JSON; absent keys keep their values in `base`.
SweepGrid sweep_grid_from_json(const nlohmann::json& j, SweepGrid base = {});
nlohmann::json to_json(const SweepGrid& grid);

/// "negation_pair:2" -> {NegationPair, 2}; a bare pattern name means count 1.
PlantSpec parse_plant_spec(std::string_view text);
/// "negation_pair:2+temporal_cycle:1"; "none" for an empty mix.
std::string mix_label(const std::vector<PlantSpec>& mix);

struct SweepRow {
  std::string instance_id;
  std::uint64_t instance_seed = 0;
  std::size_t n_facts = 0;
  std::string pattern_mix;
  std::size_t max_mus_size = 0;
  double alpha = 0;
  double beta = 0;
  int repetitions = 1;
  Algorithm algorithm = Algorithm::Qxr;
  Metrics m;
  int rounds = 0;
  bool converged = true;
  std::uint64_t queries = 0;       ///< aggregated oracle calls issued by the algorithm
  std::uint64_t raw_calls = 0;     ///< calls reaching the base oracle (r per aggregated call)
  std::uint64_t budget = 0;        ///< QXR query budget; C(N,2) for pairwise
  bool within_budget = true;
  std::uint64_t audited_calls = 0;
  std::uint64_t audited_errors = 0;  ///< aggregated verdicts disagreeing with ground truth
  bool scopes_consistent = false;    ///< ground truth on every F' n C_i
  std::string error;
};

struct SummaryRow {
  std::size_t n_facts = 0;
  std::string pattern_mix;
  double alpha = 0;
  double beta = 0;
  int repetitions = 1;
  Algorithm algorithm = Algorithm::Qxr;
  std::size_t runs = 0;
  std::size_t failures = 0;
  double mean_precision = 0, se_precision = 0;
  double mean_recall = 0, se_recall = 0;
  double mean_f1 = 0, se_f1 = 0;
  double mean_queries = 0, se_queries = 0;
  double mean_rounds = 0;
  double converged_fraction = 0;
  double empirical_error = 0, se_error = 0;  ///< pooled over all audited calls
  double binomial_error = 0;                 ///< exact for eps = max(alpha, beta)
  double hoeffding_bound = 0;                ///< exp(-2 r gamma^2)
  std::optional<bool> bound_ok;              ///< empty when gamma <= 0
  bool all_within_budget = true;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SummaryRow> summary;
};

/// Runs every (N, mix, noise, r, algorithm) cell over `instances_per_cell` generated
/// instances on a worker pool. Per-run failures land in SweepRow::error.
SweepResult run_sweep(const SweepGrid& grid);

/// Groups rows into summary rows (sorted by key); exposed for tests.
std::vector<SummaryRow> summarize(const std::vector<SweepRow>& rows);

void write_rows_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary);
/// algorithm,n_facts,alpha,beta,repetitions,mean_queries,se_queries,pairs
void write_scaling_csv(std::ostream& out, const std::vector<SummaryRow>& summary);

std::string_view code_version();

}  // namespace qxr
