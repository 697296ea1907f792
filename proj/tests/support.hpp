#pragma once

// Fixture builders and reference computations shared by the unit tests and the acceptance
// binary. The reference routines here are written independently of the library code they
// check (different algorithms, no shared helpers beyond plain types).

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qxr/fact.hpp"
#include "qxr/semantics.hpp"

namespace qxr::testing {

/// Builds a dense fact pool with named entities.
class PoolBuilder {
 public:
  EntityIndex entity(const std::string& name, EntityKind kind) {
    if (auto it = index_.find(name); it != index_.end()) return it->second;
    entities.push_back(Entity{name, kind});
    const auto i = static_cast<EntityIndex>(entities.size() - 1);
    index_[name] = i;
    return i;
  }

  FactId add(LogicalForm logic) {
    const auto id = static_cast<FactId>(facts.size());
    facts.push_back(make_fact(id, std::move(logic), entities));
    return id;
  }

  FactId unary(Predicate p, const std::string& name, bool positive = true,
               EntityKind kind = EntityKind::Animal) {
    return add(Unary{Atom{p, entity(name, kind)}, positive});
  }

  FactId works_for(const std::string& person, const std::string& org, bool positive = true) {
    return add(Binary{Relation::WorksFor, entity(person, EntityKind::Person),
                      entity(org, EntityKind::Org), positive});
  }

  FactId before(const std::string& a, const std::string& b) {
    return add(Before{entity(a, EntityKind::Event), entity(b, EntityKind::Event)});
  }

  FactId bound(const std::string& name, BoundKind kind, std::uint32_t value) {
    return add(NumericBound{entity(name, EntityKind::Loc), kind, value});
  }

  Atom atom(Predicate p, const std::string& name, EntityKind kind = EntityKind::Animal) {
    return Atom{p, entity(name, kind)};
  }

  /// Consistent filler: "<prefix>k works for <prefix>Org k" style facts on fresh entities.
  std::vector<FactId> distractors(int n, const std::string& prefix = "D") {
    std::vector<FactId> ids;
    for (int k = 0; k < n; ++k) {
      ids.push_back(works_for(prefix + std::to_string(k), prefix + "Org" + std::to_string(k)));
    }
    return ids;
  }

  IdSet all() const {
    IdSet ids;
    for (const auto& f : facts) ids.push_back(f.id);
    return ids;
  }

  EntityTable entities;
  std::vector<Fact> facts;

 private:
  std::map<std::string, EntityIndex> index_;
};

/// The three-edge temporal cycle: each pair is satisfiable, the triple is not
/// (an ordering of a 3-cycle, the same shape as a 2-colouring of a triangle).
inline IdSet xor_triple(PoolBuilder& b, const std::string& prefix = "E") {
  return {b.before(prefix + "a", prefix + "b"), b.before(prefix + "b", prefix + "c"),
          b.before(prefix + "c", prefix + "a")};
}

inline bool truth(std::span<const Fact> pool, std::span<const FactId> ids) {
  const auto ptrs = gather(pool, ids);
  return is_cons(ground_truth_consistent(ptrs));
}

/// Binomial upper tail P(Bin(r, eps) >= (r+1)/2) by dynamic programming over trials.
inline double reference_majority_error(int r, double eps) {
  std::vector<double> dist(static_cast<std::size_t>(r) + 1, 0.0);
  dist[0] = 1.0;
  for (int trial = 0; trial < r; ++trial) {
    for (int k = trial + 1; k >= 1; --k) {
      dist[static_cast<std::size_t>(k)] =
          dist[static_cast<std::size_t>(k)] * (1 - eps) + dist[static_cast<std::size_t>(k - 1)] * eps;
    }
    dist[0] *= (1 - eps);
  }
  double tail = 0;
  for (int k = (r + 1) / 2; k <= r; ++k) tail += dist[static_cast<std::size_t>(k)];
  return tail;
}

/// Size of a minimum hitting set, by breadth-first growth of candidate sets.
inline std::size_t reference_min_hitting_size(const std::vector<IdSet>& family) {
  if (family.empty()) return 0;
  IdSet universe;
  for (const auto& s : family) universe.insert(universe.end(), s.begin(), s.end());
  std::sort(universe.begin(), universe.end());
  universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
  const auto n = universe.size();
  std::size_t best = n;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    const auto size = static_cast<std::size_t>(__builtin_popcountll(mask));
    if (size >= best) continue;
    bool ok = true;
    for (const auto& s : family) {
      bool hit = false;
      for (auto id : s) {
        const auto pos = static_cast<std::size_t>(
            std::lower_bound(universe.begin(), universe.end(), id) - universe.begin());
        if (mask >> pos & 1U) hit = true;
      }
      if (!hit) {
        ok = false;
        break;
      }
    }
    if (ok) best = size;
  }
  return best;
}

/// Whether `u` is a MUS by definition: inconsistent, and every subset missing one element
/// is consistent (sufficient by monotonicity).
inline bool reference_is_mus(std::span<const Fact> pool, const IdSet& u) {
  if (u.empty() || truth(pool, u)) return false;
  for (std::size_t i = 0; i < u.size(); ++i) {
    IdSet rest;
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (j != i) rest.push_back(u[j]);
    }
    if (!truth(pool, rest)) return false;
  }
  return true;
}

}  // namespace qxr::testing
