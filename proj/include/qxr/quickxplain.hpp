#pragma once

#include <functional>
#include <span>
#include <utility>

#include "qxr/fact.hpp"
#include "qxr/oracle.hpp"

namespace qxr {

/// A minimal unsatisfiable subset as reported by extraction.
struct Mus {
  IdSet fact_ids;         ///< sorted ascending
  int source_scope = -1;  ///< index into the scope family it was extracted from
  bool verified = false;  ///< set only after an explicit verify_mus pass

  bool operator==(const Mus&) const = default;
};

enum class QxVariant {
  /// Divide and conquer with the classical "background already inconsistent" guard.
  /// Subset-minimal under a perfect oracle.
  Guarded,
  /// The bare recursion: return {} if O(B u S) = cons, S if |S| = 1, else recurse on
  /// (S1, B u S2) then (S2, B u D1). Kept for comparison; can return non-minimal sets.
  Literal,
};

using QxTrace = std::function<void(const IdSet& queried, Verdict verdict)>;

struct QxOptions {
  QxVariant variant = QxVariant::Guarded;
  QxTrace trace;  ///< called once per oracle query when set
};

/// Ceil split by position: first ceil(|S|/2) ids, then the rest. Requires |S| >= 2.
std::pair<IdSet, IdSet> split(std::span<const FactId> ids);

/// Localizes one conflict inside `candidates` relative to `background`.
/// Returns {} when candidates is empty or O(background u candidates) = cons.
/// Under a perfect oracle with a consistent background the result D is subset-minimal:
/// O(B u D) = incons and O(B u D \ {d}) = cons for every d in D.
IdSet qx(Oracle& oracle, std::span<const FactId> candidates, std::span<const FactId> background,
         const QxOptions& options = {});

/// True iff O(U) = incons and O(U \ {f}) = cons for every f in U. Costs |U| + 1 queries.
/// Requires U nonempty.
bool verify_mus(Oracle& oracle, std::span<const FactId> ids);

/// 2k(ceil(log2 N) + 2): explicit per-extraction query budget for a conflict of size k in N facts.
std::uint64_t qx_query_budget(std::size_t mus_size, std::size_t num_facts);

/// ceil(log2 n), 0 for n <= 1.
unsigned ceil_log2(std::size_t n);

}  // namespace qxr
