#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "qxr/fact.hpp"

namespace qxr {

/// Thrown by exhaustive reference procedures when an input exceeds their enumeration budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Semantic rules shared by both consistency procedures:
//  - a unary or binary literal and its negation cannot both hold;
//  - IsTiger(x) and IsDog(x) each imply IsAnimal(x);
//  - ExactlyOne(X, Y, Z) holds iff exactly one of the three atoms is true;
//  - the Before relation over entities must admit a strict linear order;
//  - per entity, every at_least bound must not exceed any at_most bound.

/// Ground-truth consistency A(S). Exact for every input; monotone in S.
Verdict ground_truth_consistent(std::span<const Fact* const> facts);
Verdict ground_truth_consistent(std::span<const Fact> facts);

struct BruteForceLimits {
  std::size_t max_atoms = 22;
  std::size_t max_ordered_entities = 9;
};

/// Independent model-enumeration check of the same semantics. Enumerates every truth
/// assignment to the unary/binary atoms, every order of the entities mentioned in Before
/// facts, and every integer count per bounded entity.
/// Throws BudgetExceeded when S mentions more atoms or ordered entities than `limits` allow.
Verdict brute_force_consistent(std::span<const Fact* const> facts, BruteForceLimits limits = {});
Verdict brute_force_consistent(std::span<const Fact> facts, BruteForceLimits limits = {});

/// All minimal unsatisfiable subsets of `pool` restricted to `ids`, of size at most `max_size`,
/// each sorted ascending, in increasing (size, lexicographic) order.
/// Requires |ids| <= 16 or max_size <= 4; throws BudgetExceeded otherwise.
std::vector<IdSet> enumerate_all_mus(std::span<const Fact> pool, std::span<const FactId> ids,
                                     std::size_t max_size);

/// Convenience: every fact in a dense pool.
std::vector<IdSet> enumerate_all_mus(std::span<const Fact> pool, std::size_t max_size);

}  // namespace qxr
