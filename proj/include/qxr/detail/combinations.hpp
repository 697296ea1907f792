#pragma once

#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace qxr::detail {

/// Calls fn(indices) for every k-combination of {0..n-1} in lexicographic order.
/// Stops early and returns true as soon as fn returns true.
template <typename Fn>
bool for_each_combination(std::size_t n, std::size_t k, Fn&& fn) {
  if (k > n) return false;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  while (true) {
    if (fn(std::span<const std::size_t>(idx))) return true;
    if (k == 0) return false;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace qxr::detail
