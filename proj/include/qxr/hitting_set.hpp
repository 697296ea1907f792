#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "qxr/fact.hpp"

namespace qxr {

class UnhittableFamily : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Greedy hitting set: repeatedly takes the id contained in the most not-yet-hit sets,
/// ties to the smallest id. |H| <= (1 + ln m) |H*| for m sets.
/// Throws UnhittableFamily if any member set is empty.
IdSet greedy_hitting_set(std::span<const IdSet> family);

/// Minimum-cardinality hitting set by exhaustive search over the union of the family;
/// among minima, the lexicographically smallest sorted id list.
/// Throws BudgetExceeded when the union has more than `max_universe` ids.
IdSet exact_hitting_set(std::span<const IdSet> family, std::size_t max_universe = 20);

/// Number of distinct minimum-cardinality hitting sets (same budget as exact_hitting_set).
std::size_t count_minimum_hitting_sets(std::span<const IdSet> family,
                                       std::size_t max_universe = 20);

bool hits_all(std::span<const FactId> candidate, std::span<const IdSet> family);

}  // namespace qxr
