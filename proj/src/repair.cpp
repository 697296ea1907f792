#include "qxr/repair.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

#include "qxr/detail/combinations.hpp"
#include "qxr/hitting_set.hpp"
#include "qxr/semantics.hpp"

namespace qxr {

namespace {

// Non-owning handle so wrappers can sit on top of a caller-owned oracle.
OraclePtr borrow(Oracle& oracle) { return OraclePtr(OraclePtr{}, &oracle); }

OracleStats merge(const std::vector<const CountingOracle*>& counters) {
  OracleStats out;
  for (const auto* c : counters) {
    const OracleStats s = c->stats();
    out.total_calls += s.total_calls;
    for (const auto& [size, n] : s.calls_by_subset_size) out.calls_by_subset_size[size] += n;
    for (const auto& [label, n] : s.breakdown) out.breakdown[label] += n;
  }
  return out;
}

}  // namespace

EmptyExtractionAction handle_empty_extraction(Oracle& oracle, std::span<const FactId> scope,
                                              RetryState& state) {
  if (state.attempts >= state.limit) {
    state.exhausted = true;
    return EmptyExtractionAction::TreatAsCons;
  }
  ++state.attempts;
  if (is_cons(oracle.query(scope))) return EmptyExtractionAction::TreatAsCons;
  return EmptyExtractionAction::Requery;
}

RepairResult qxr(Oracle& oracle, std::span<const FactId> facts, const ScopeFamily& scopes,
                 const RepairPolicy& policy) {
  IdSet kept(facts.begin(), facts.end());
  normalize(kept);
  if (scopes.scopes.empty()) throw std::invalid_argument("scope family must not be empty");

  std::vector<IdSet> live;
  std::vector<int> live_index;
  for (std::size_t j = 0; j < scopes.size(); ++j) {
    IdSet c = scopes.scopes[j];
    normalize(c);
    if (!is_subset(c, kept)) {
      throw std::invalid_argument(fmt::format("scope {} mentions facts outside F", j));
    }
    if (c.empty()) continue;
    live.push_back(std::move(c));
    live_index.push_back(static_cast<int>(j));
  }

  const int cap = policy.round_cap > 0 ? policy.round_cap : 4 * static_cast<int>(scopes.size());
  CountingOracle scope_checks(borrow(oracle), "scope_checks");
  CountingOracle extraction(borrow(oracle), "qx");

  RepairResult result;
  IdSet removed;
  while (true) {
    std::vector<std::size_t> inconsistent;
    for (std::size_t j = 0; j < live.size(); ++j) {
      if (!is_cons(scope_checks.query(live[j]))) inconsistent.push_back(j);
    }
    if (inconsistent.empty()) break;
    if (result.rounds >= cap) {
      result.converged = false;
      result.warnings.push_back(fmt::format(
          "round cap {} reached with {} scope(s) still judged inconsistent", cap,
          inconsistent.size()));
      break;
    }

    std::vector<Mus> round;
    for (std::size_t j : inconsistent) {
      IdSet conflict = qx(extraction, live[j], {}, policy.qx);
      RetryState retry{0, policy.retry_limit, false};
      while (conflict.empty()) {
        if (handle_empty_extraction(scope_checks, live[j], retry) ==
            EmptyExtractionAction::TreatAsCons) {
          result.warnings.push_back(
              retry.exhausted
                  ? fmt::format("scope {}: empty extraction after {} retries, treated as consistent",
                                live_index[j], retry.attempts)
                  : fmt::format("scope {}: re-query judged it consistent after an empty extraction",
                                live_index[j]));
          break;
        }
        conflict = qx(extraction, live[j], {}, policy.qx);
      }
      if (!conflict.empty()) round.push_back(Mus{std::move(conflict), live_index[j], false});
    }
    if (round.empty()) break;
    ++result.rounds;

    std::vector<IdSet> family;
    family.reserve(round.size());
    for (const auto& m : round) family.push_back(m.fact_ids);
    const IdSet hitting = policy.hitting == HittingStrategy::Exact ? exact_hitting_set(family)
                                                                   : greedy_hitting_set(family);

    kept = set_difference(kept, hitting);
    removed = set_union(removed, hitting);
    std::vector<IdSet> next;
    std::vector<int> next_index;
    for (std::size_t j = 0; j < live.size(); ++j) {
      IdSet c = set_difference(live[j], hitting);
      if (c.empty()) continue;
      next.push_back(std::move(c));
      next_index.push_back(live_index[j]);
    }
    live = std::move(next);
    live_index = std::move(next_index);

    for (auto& m : round) {
      if (policy.verifier != nullptr) m.verified = verify_mus(*policy.verifier, m.fact_ids);
      result.mus_family.push_back(std::move(m));
    }
  }

  result.surviving = std::move(kept);
  result.removed = std::move(removed);
  result.stats = merge({&scope_checks, &extraction});
  return result;
}

std::uint64_t qxr_query_budget(int rounds, std::size_t num_scopes, std::size_t max_mus_size,
                               std::size_t num_facts) {
  return static_cast<std::uint64_t>(std::max(rounds, 0)) * num_scopes *
         (qx_query_budget(max_mus_size, num_facts) + 1);
}

IdSet exhaustive_min_removal(Oracle& oracle, std::span<const FactId> facts,
                             const ScopeFamily& scopes, std::size_t max_facts) {
  IdSet f(facts.begin(), facts.end());
  normalize(f);
  if (f.size() > max_facts) {
    throw BudgetExceeded(
        fmt::format("exhaustive repair over {} facts exceeds the budget of {}", f.size(), max_facts));
  }
  std::vector<IdSet> normalized = scopes.scopes;
  for (auto& c : normalized) normalize(c);

  IdSet best;
  for (std::size_t k = 0; k <= f.size(); ++k) {
    const bool found =
        detail::for_each_combination(f.size(), k, [&](std::span<const std::size_t> idx) {
          IdSet removal;
          for (auto i : idx) removal.push_back(f[i]);
          const IdSet kept = set_difference(f, removal);
          for (const auto& c : normalized) {
            IdSet part;
            std::set_intersection(kept.begin(), kept.end(), c.begin(), c.end(),
                                  std::back_inserter(part));
            if (!part.empty() && !is_cons(oracle.query(part))) return false;
          }
          best = std::move(removal);
          return true;
        });
    if (found) return best;
  }
  return f;
}

nlohmann::json to_json(const OracleStats& stats) {
  nlohmann::json by_size = nlohmann::json::object();
  for (const auto& [size, n] : stats.calls_by_subset_size) by_size[std::to_string(size)] = n;
  return {{"total_calls", stats.total_calls},
          {"calls_by_subset_size", by_size},
          {"breakdown", stats.breakdown}};
}

nlohmann::json to_json(const RepairResult& result) {
  nlohmann::json family = nlohmann::json::array();
  for (const auto& m : result.mus_family) {
    family.push_back(
        {{"fact_ids", m.fact_ids}, {"source_scope", m.source_scope}, {"verified", m.verified}});
  }
  return {{"surviving", result.surviving},     {"removed", result.removed},
          {"mus_family", family},              {"rounds", result.rounds},
          {"converged", result.converged},     {"stats", to_json(result.stats)},
          {"warnings", result.warnings}};
}

}  // namespace qxr
