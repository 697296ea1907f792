#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qxr/fact.hpp"
#include "qxr/oracle.hpp"
#include "qxr/quickxplain.hpp"

namespace qxr {

/// Constraint scopes C_1..C_m over a fact set; each scope must end up internally consistent.
struct ScopeFamily {
  std::vector<IdSet> scopes;

  static ScopeFamily single(IdSet facts) { return ScopeFamily{{std::move(facts)}}; }
  std::size_t size() const { return scopes.size(); }
  bool operator==(const ScopeFamily&) const = default;
};

enum class HittingStrategy { Greedy, Exact };

struct RepairPolicy {
  int round_cap = 0;    ///< 0 selects 4 * m
  int retry_limit = 3;  ///< scope re-queries after an empty extraction
  HittingStrategy hitting = HittingStrategy::Greedy;
  QxOptions qx;
  /// When set, every extracted MUS is checked with verify_mus against this oracle.
  /// Its calls are not part of the run's statistics.
  Oracle* verifier = nullptr;
};

struct RepairResult {
  IdSet surviving;
  IdSet removed;
  std::vector<Mus> mus_family;
  int rounds = 0;
  bool converged = true;
  OracleStats stats;
  std::vector<std::string> warnings;
};

enum class EmptyExtractionAction { Requery, TreatAsCons };

struct RetryState {
  int attempts = 0;
  int limit = 3;
  bool exhausted = false;
};

/// Decides what to do after qx came back empty on a scope that was judged inconsistent.
/// Re-queries the scope verdict (counting one attempt) unless the limit is spent:
/// cons -> TreatAsCons; incons -> Requery (run qx again); limit spent -> TreatAsCons with
/// `exhausted` set.
EmptyExtractionAction handle_empty_extraction(Oracle& oracle, std::span<const FactId> scope,
                                              RetryState& state);

/// QXR: while some scope is judged inconsistent, extract one conflict per inconsistent scope,
/// remove a hitting set of the round's conflicts from F and from every scope, and repeat.
/// Scopes emptied by removals are dropped. Stops at the round cap with converged = false.
RepairResult qxr(Oracle& oracle, std::span<const FactId> facts, const ScopeFamily& scopes,
                 const RepairPolicy& policy = {});

/// rounds * m * (2k(ceil(log2 N) + 2) + 1).
std::uint64_t qxr_query_budget(int rounds, std::size_t num_scopes, std::size_t max_mus_size,
                               std::size_t num_facts);

/// Largest |F'| with every (F' n C_i) consistent under `oracle`, by exhaustive search over
/// removal sets in increasing size. Returns the removal set. Throws BudgetExceeded for
/// more than `max_facts` facts.
IdSet exhaustive_min_removal(Oracle& oracle, std::span<const FactId> facts,
                             const ScopeFamily& scopes, std::size_t max_facts = 16);

nlohmann::json to_json(const RepairResult& result);
nlohmann::json to_json(const OracleStats& stats);

}  // namespace qxr
