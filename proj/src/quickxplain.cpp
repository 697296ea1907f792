#include "qxr/quickxplain.hpp"

#include <bit>
#include <stdexcept>

#include <fmt/format.h>

namespace qxr {

namespace {

class Extractor {
 public:
  Extractor(Oracle& oracle, const QxOptions& options) : oracle_(oracle), options_(options) {}

  Verdict ask(std::span<const FactId> statements, std::span<const FactId> background) {
    const Verdict v = oracle_.query(statements, background);
    if (options_.trace) options_.trace(query_set(statements, background), v);
    return v;
  }

  // Precondition: B u S is inconsistent. `background_grew` is true when the caller extended B
  // since the last time it was known to be consistent.
  IdSet guarded(const IdSet& s, const IdSet& b, bool background_grew) {
    if (background_grew && !b.empty() && !is_cons(ask(b, {}))) return {};
    if (s.size() == 1) return s;
    auto [s1, s2] = split(s);
    IdSet d1 = guarded(s1, set_union(b, s2), true);
    IdSet d2 = guarded(s2, set_union(b, d1), !d1.empty());
    return set_union(d1, d2);
  }

  IdSet literal(const IdSet& s, const IdSet& b) {
    if (s.empty()) return {};
    if (is_cons(ask(s, b))) return {};
    if (s.size() == 1) return s;
    auto [s1, s2] = split(s);
    IdSet d1 = literal(s1, set_union(b, s2));
    IdSet d2 = literal(s2, set_union(b, d1));
    return set_union(d1, d2);
  }

 private:
  Oracle& oracle_;
  const QxOptions& options_;
};

}  // namespace

std::pair<IdSet, IdSet> split(std::span<const FactId> ids) {
  if (ids.size() < 2) {
    throw std::invalid_argument(fmt::format("split needs at least two ids, got {}", ids.size()));
  }
  const std::size_t half = (ids.size() + 1) / 2;
  return {IdSet(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(half)),
          IdSet(ids.begin() + static_cast<std::ptrdiff_t>(half), ids.end())};
}

IdSet qx(Oracle& oracle, std::span<const FactId> candidates, std::span<const FactId> background,
         const QxOptions& options) {
  IdSet s(candidates.begin(), candidates.end());
  IdSet b(background.begin(), background.end());
  normalize(s);
  normalize(b);
  s = set_difference(s, b);

  Extractor ex(oracle, options);
  if (options.variant == QxVariant::Literal) return ex.literal(s, b);

  if (s.empty()) return {};
  if (is_cons(ex.ask(s, b))) return {};
  return ex.guarded(s, b, false);
}

bool verify_mus(Oracle& oracle, std::span<const FactId> ids) {
  if (ids.empty()) throw std::invalid_argument("verify_mus needs a nonempty set");
  IdSet u(ids.begin(), ids.end());
  normalize(u);
  bool minimal = !is_cons(oracle.query(u));
  // Every proper-subset query is issued so the cost is always |U| + 1.
  for (std::size_t i = 0; i < u.size(); ++i) {
    IdSet rest;
    rest.reserve(u.size() - 1);
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (j != i) rest.push_back(u[j]);
    }
    if (!is_cons(oracle.query(rest))) minimal = false;
  }
  return minimal;
}

unsigned ceil_log2(std::size_t n) {
  if (n <= 1) return 0;
  return static_cast<unsigned>(std::bit_width(n - 1));
}

std::uint64_t qx_query_budget(std::size_t mus_size, std::size_t num_facts) {
  return 2ULL * mus_size * (ceil_log2(num_facts) + 2ULL);
}

}  // namespace qxr
