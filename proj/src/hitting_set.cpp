#include "qxr/hitting_set.hpp"

#include <algorithm>
#include <cstdint>
#include <map>

#include <fmt/format.h>

#include "qxr/detail/combinations.hpp"
#include "qxr/semantics.hpp"

namespace qxr {

namespace {

void require_nonempty_members(std::span<const IdSet> family) {
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (family[i].empty()) {
      throw UnhittableFamily(fmt::format("set {} of the family is empty and cannot be hit", i));
    }
  }
}

IdSet universe_of(std::span<const IdSet> family, std::size_t max_universe) {
  IdSet u;
  for (const auto& s : family) u.insert(u.end(), s.begin(), s.end());
  normalize(u);
  if (u.size() > max_universe) {
    throw BudgetExceeded(fmt::format("hitting-set universe of {} ids exceeds the budget of {}",
                                     u.size(), max_universe));
  }
  return u;
}

// Each member set as a bitmask over positions in the universe.
std::vector<std::uint32_t> as_masks(std::span<const IdSet> family, const IdSet& universe) {
  std::vector<std::uint32_t> masks;
  masks.reserve(family.size());
  for (const auto& s : family) {
    std::uint32_t m = 0;
    for (FactId id : s) {
      const auto pos = std::lower_bound(universe.begin(), universe.end(), id) - universe.begin();
      m |= std::uint32_t{1} << pos;
    }
    masks.push_back(m);
  }
  return masks;
}

}  // namespace

bool hits_all(std::span<const FactId> candidate, std::span<const IdSet> family) {
  IdSet c(candidate.begin(), candidate.end());
  normalize(c);
  return std::all_of(family.begin(), family.end(), [&](const IdSet& s) {
    IdSet sorted = s;
    normalize(sorted);
    return intersects(c, sorted);
  });
}

IdSet greedy_hitting_set(std::span<const IdSet> input) {
  require_nonempty_members(input);
  std::vector<IdSet> family(input.begin(), input.end());
  for (auto& s : family) normalize(s);
  std::vector<bool> hit(family.size(), false);
  std::size_t remaining = family.size();
  IdSet chosen;
  while (remaining > 0) {
    std::map<FactId, std::size_t> coverage;  // ordered: first max is the smallest id
    for (std::size_t i = 0; i < family.size(); ++i) {
      if (hit[i]) continue;
      for (FactId id : family[i]) ++coverage[id];
    }
    FactId best = coverage.begin()->first;
    std::size_t best_count = 0;
    for (const auto& [id, count] : coverage) {
      if (count > best_count) {
        best = id;
        best_count = count;
      }
    }
    chosen.push_back(best);
    for (std::size_t i = 0; i < family.size(); ++i) {
      if (!hit[i] && std::binary_search(family[i].begin(), family[i].end(), best)) {
        hit[i] = true;
        --remaining;
      }
    }
  }
  normalize(chosen);
  return chosen;
}

IdSet exact_hitting_set(std::span<const IdSet> family, std::size_t max_universe) {
  require_nonempty_members(family);
  const IdSet universe = universe_of(family, std::min<std::size_t>(max_universe, 31));
  const auto masks = as_masks(family, universe);
  for (std::size_t k = 0; k <= universe.size(); ++k) {
    IdSet best;
    const bool found = detail::for_each_combination(
        universe.size(), k, [&](std::span<const std::size_t> idx) {
          std::uint32_t pick = 0;
          for (auto i : idx) pick |= std::uint32_t{1} << i;
          for (auto m : masks) {
            if ((m & pick) == 0) return false;
          }
          for (auto i : idx) best.push_back(universe[i]);
          return true;
        });
    if (found) return best;
  }
  return {};  // unreachable: the whole universe hits every nonempty member
}

std::size_t count_minimum_hitting_sets(std::span<const IdSet> family, std::size_t max_universe) {
  require_nonempty_members(family);
  if (family.empty()) return 1;
  const IdSet universe = universe_of(family, std::min<std::size_t>(max_universe, 31));
  const auto masks = as_masks(family, universe);
  for (std::size_t k = 1; k <= universe.size(); ++k) {
    std::size_t count = 0;
    detail::for_each_combination(universe.size(), k, [&](std::span<const std::size_t> idx) {
      std::uint32_t pick = 0;
      for (auto i : idx) pick |= std::uint32_t{1} << i;
      if (std::all_of(masks.begin(), masks.end(), [&](auto m) { return (m & pick) != 0; })) {
        ++count;
      }
      return false;
    });
    if (count > 0) return count;
  }
  return 0;
}

}  // namespace qxr
