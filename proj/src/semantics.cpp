#include "qxr/semantics.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "qxr/detail/combinations.hpp"

namespace qxr {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

using BinaryKey = std::tuple<Relation, EntityIndex, EntityIndex>;

// ---------------------------------------------------------------------------
// Propositional part: unary literals, taxonomy implications and ExactlyOne rules
// as CNF, decided by unit propagation with chronological backtracking.

using Lit = int;  // 2*var + (negated ? 1 : 0)
using Clause = std::vector<Lit>;

constexpr Lit pos_lit(int var) { return 2 * var; }
constexpr Lit neg_lit(int var) { return 2 * var + 1; }

class Cnf {
 public:
  explicit Cnf(int num_vars) : num_vars_(num_vars) {}

  void add(Clause c) { clauses_.push_back(std::move(c)); }

  bool satisfiable() const {
    std::vector<std::int8_t> assignment(static_cast<std::size_t>(num_vars_), -1);
    return search(assignment);
  }

 private:
  static int value(const std::vector<std::int8_t>& a, Lit l) {
    const auto v = a[static_cast<std::size_t>(l / 2)];
    if (v < 0) return -1;
    return (l % 2 == 0) ? v : 1 - v;
  }

  // false on conflict
  bool propagate(std::vector<std::int8_t>& a) const {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& c : clauses_) {
        int unassigned = 0;
        Lit last = -1;
        bool sat = false;
        for (Lit l : c) {
          const int v = value(a, l);
          if (v == 1) { sat = true; break; }
          if (v < 0) { ++unassigned; last = l; }
        }
        if (sat) continue;
        if (unassigned == 0) return false;
        if (unassigned == 1) {
          a[static_cast<std::size_t>(last / 2)] = (last % 2 == 0) ? 1 : 0;
          changed = true;
        }
      }
    }
    return true;
  }

  bool search(std::vector<std::int8_t>& a) const {
    if (!propagate(a)) return false;
    const auto it = std::find(a.begin(), a.end(), std::int8_t{-1});
    if (it == a.end()) return true;
    for (std::int8_t choice : {std::int8_t{1}, std::int8_t{0}}) {
      auto trial = a;
      trial[static_cast<std::size_t>(it - a.begin())] = choice;
      if (search(trial)) return true;
    }
    return false;
  }

  int num_vars_;
  std::vector<Clause> clauses_;
};

bool has_cycle(const std::map<EntityIndex, std::vector<EntityIndex>>& succ) {
  enum class Mark { White, Grey, Black };
  std::map<EntityIndex, Mark> mark;
  for (const auto& [v, _] : succ) mark[v] = Mark::White;

  // iterative DFS
  for (const auto& [root, _] : succ) {
    if (mark[root] != Mark::White) continue;
    std::vector<std::pair<EntityIndex, std::size_t>> stack{{root, 0}};
    mark[root] = Mark::Grey;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      const auto found = succ.find(v);
      if (found == succ.end() || next >= found->second.size()) {
        mark[v] = Mark::Black;
        stack.pop_back();
        continue;
      }
      const EntityIndex w = found->second[next++];
      const Mark m = mark.contains(w) ? mark[w] : Mark::White;
      if (m == Mark::Grey) return true;
      if (m == Mark::White) {
        mark[w] = Mark::Grey;
        stack.emplace_back(w, 0);
      }
    }
  }
  return false;
}

bool implies_animal(Predicate p) { return p == Predicate::IsTiger || p == Predicate::IsDog; }

}  // namespace

Verdict ground_truth_consistent(std::span<const Fact* const> facts) {
  std::map<BinaryKey, std::uint8_t> binary_polarity;  // bit0 positive, bit1 negative
  std::map<EntityIndex, std::vector<EntityIndex>> before;
  std::map<EntityIndex, std::pair<std::int64_t, std::int64_t>> bounds;  // (max lo, min hi)
  std::map<Atom, int> atom_var;
  std::vector<std::pair<Atom, bool>> unit_literals;
  std::vector<ExactlyOne> rules;

  auto var_of = [&](const Atom& a) {
    auto [it, inserted] = atom_var.try_emplace(a, static_cast<int>(atom_var.size()));
    return it->second;
  };

  for (const Fact* f : facts) {
    const bool contradiction = std::visit(
        Overloaded{
            [&](const Unary& u) {
              var_of(u.atom);
              unit_literals.emplace_back(u.atom, u.positive);
              return false;
            },
            [&](const Binary& b) {
              auto& bits = binary_polarity[{b.relation, b.first, b.second}];
              bits |= b.positive ? 1 : 2;
              return bits == 3;
            },
            [&](const Before& b) {
              if (b.earlier == b.later) return true;
              before[b.earlier].push_back(b.later);
              before.try_emplace(b.later);
              return false;
            },
            [&](const ExactlyOne& r) {
              for (const auto& a : r.atoms) var_of(a);
              rules.push_back(r);
              return false;
            },
            [&](const NumericBound& n) {
              auto [it, _] = bounds.try_emplace(
                  n.entity, std::pair<std::int64_t, std::int64_t>{0, INT64_MAX});
              if (n.kind == BoundKind::AtLeast) {
                it->second.first = std::max<std::int64_t>(it->second.first, n.value);
              } else {
                it->second.second = std::min<std::int64_t>(it->second.second, n.value);
              }
              return it->second.first > it->second.second;
            },
        },
        f->logic);
    if (contradiction) return Verdict::Incons;
  }

  if (has_cycle(before)) return Verdict::Incons;

  Cnf cnf(static_cast<int>(atom_var.size()));
  for (const auto& [atom, positive] : unit_literals) {
    const int v = atom_var.at(atom);
    cnf.add({positive ? pos_lit(v) : neg_lit(v)});
  }
  for (const auto& [atom, v] : atom_var) {
    if (!implies_animal(atom.predicate)) continue;
    const auto animal = atom_var.find(Atom{Predicate::IsAnimal, atom.entity});
    if (animal != atom_var.end()) cnf.add({neg_lit(v), pos_lit(animal->second)});
  }
  for (const auto& r : rules) {
    const int x = atom_var.at(r.atoms[0]);
    const int y = atom_var.at(r.atoms[1]);
    const int z = atom_var.at(r.atoms[2]);
    cnf.add({pos_lit(x), pos_lit(y), pos_lit(z)});
    cnf.add({neg_lit(x), neg_lit(y)});
    cnf.add({neg_lit(x), neg_lit(z)});
    cnf.add({neg_lit(y), neg_lit(z)});
  }
  return cnf.satisfiable() ? Verdict::Cons : Verdict::Incons;
}

Verdict ground_truth_consistent(std::span<const Fact> facts) {
  std::vector<const Fact*> refs;
  refs.reserve(facts.size());
  for (const auto& f : facts) refs.push_back(&f);
  return ground_truth_consistent(refs);
}

// ---------------------------------------------------------------------------

Verdict brute_force_consistent(std::span<const Fact* const> facts, BruteForceLimits limits) {
  // Atom universe: unary atoms (facts and rule members) then binary atoms.
  std::vector<Atom> unary_atoms;
  std::vector<BinaryKey> binary_atoms;
  std::set<EntityIndex> ordered_entities;
  std::map<EntityIndex, std::vector<const NumericBound*>> bounded;
  for (const Fact* f : facts) {
    if (const auto* u = std::get_if<Unary>(&f->logic)) unary_atoms.push_back(u->atom);
    if (const auto* r = std::get_if<ExactlyOne>(&f->logic)) {
      unary_atoms.insert(unary_atoms.end(), std::begin(r->atoms), std::end(r->atoms));
    }
    if (const auto* b = std::get_if<Binary>(&f->logic)) {
      binary_atoms.emplace_back(b->relation, b->first, b->second);
    }
    if (const auto* b = std::get_if<Before>(&f->logic)) {
      ordered_entities.insert(b->earlier);
      ordered_entities.insert(b->later);
    }
    if (const auto* n = std::get_if<NumericBound>(&f->logic)) bounded[n->entity].push_back(n);
  }
  std::sort(unary_atoms.begin(), unary_atoms.end());
  unary_atoms.erase(std::unique(unary_atoms.begin(), unary_atoms.end()), unary_atoms.end());
  std::sort(binary_atoms.begin(), binary_atoms.end());
  binary_atoms.erase(std::unique(binary_atoms.begin(), binary_atoms.end()), binary_atoms.end());

  const std::size_t n_atoms = unary_atoms.size() + binary_atoms.size();
  if (n_atoms > limits.max_atoms) {
    throw BudgetExceeded(fmt::format("{} atoms exceed the brute-force budget of {}", n_atoms,
                                     limits.max_atoms));
  }
  if (ordered_entities.size() > limits.max_ordered_entities) {
    throw BudgetExceeded(fmt::format("{} ordered entities exceed the brute-force budget of {}",
                                     ordered_entities.size(), limits.max_ordered_entities));
  }

  auto unary_bit = [&](const Atom& a) {
    return static_cast<std::size_t>(
        std::lower_bound(unary_atoms.begin(), unary_atoms.end(), a) - unary_atoms.begin());
  };
  auto binary_bit = [&](const BinaryKey& k) {
    return unary_atoms.size() +
           static_cast<std::size_t>(
               std::lower_bound(binary_atoms.begin(), binary_atoms.end(), k) - binary_atoms.begin());
  };

  std::vector<std::pair<std::size_t, std::size_t>> implications;  // (premise bit, animal bit)
  for (const auto& a : unary_atoms) {
    if (!implies_animal(a.predicate)) continue;
    const Atom animal{Predicate::IsAnimal, a.entity};
    if (std::binary_search(unary_atoms.begin(), unary_atoms.end(), animal)) {
      implications.emplace_back(unary_bit(a), unary_bit(animal));
    }
  }

  auto holds = [](std::uint64_t model, std::size_t bit) { return ((model >> bit) & 1U) != 0; };

  bool propositional_model = false;
  for (std::uint64_t model = 0; model < (std::uint64_t{1} << n_atoms); ++model) {
    bool ok = std::all_of(implications.begin(), implications.end(), [&](const auto& imp) {
      return !holds(model, imp.first) || holds(model, imp.second);
    });
    for (std::size_t i = 0; ok && i < facts.size(); ++i) {
      const auto& logic = facts[i]->logic;
      if (const auto* u = std::get_if<Unary>(&logic)) {
        ok = holds(model, unary_bit(u->atom)) == u->positive;
      } else if (const auto* b = std::get_if<Binary>(&logic)) {
        ok = holds(model, binary_bit({b->relation, b->first, b->second})) == b->positive;
      } else if (const auto* r = std::get_if<ExactlyOne>(&logic)) {
        int count = 0;
        for (const auto& a : r->atoms) count += holds(model, unary_bit(a)) ? 1 : 0;
        ok = count == 1;
      }
    }
    if (ok) {
      propositional_model = true;
      break;
    }
  }
  if (!propositional_model) return Verdict::Incons;

  // Some order of the mentioned entities must place every earlier before its later.
  std::vector<EntityIndex> order(ordered_entities.begin(), ordered_entities.end());
  bool order_found = false;
  do {
    std::map<EntityIndex, std::size_t> position;
    for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;
    order_found = std::all_of(facts.begin(), facts.end(), [&](const Fact* f) {
      const auto* b = std::get_if<Before>(&f->logic);
      return b == nullptr || position[b->earlier] < position[b->later];
    });
  } while (!order_found && std::next_permutation(order.begin(), order.end()));
  if (!order_found) return Verdict::Incons;

  for (const auto& [entity, list] : bounded) {
    std::uint32_t top = 0;
    for (const auto* n : list) top = std::max(top, n->value);
    bool count_found = false;
    for (std::uint64_t count = 0; count <= std::uint64_t{top} + 1 && !count_found; ++count) {
      count_found = std::all_of(list.begin(), list.end(), [&](const NumericBound* n) {
        return n->kind == BoundKind::AtLeast ? count >= n->value : count <= n->value;
      });
    }
    if (!count_found) return Verdict::Incons;
  }
  return Verdict::Cons;
}

Verdict brute_force_consistent(std::span<const Fact> facts, BruteForceLimits limits) {
  std::vector<const Fact*> refs;
  refs.reserve(facts.size());
  for (const auto& f : facts) refs.push_back(&f);
  return brute_force_consistent(refs, limits);
}

// ---------------------------------------------------------------------------

std::vector<IdSet> enumerate_all_mus(std::span<const Fact> pool, std::span<const FactId> ids,
                                     std::size_t max_size) {
  IdSet universe(ids.begin(), ids.end());
  normalize(universe);
  if (universe.size() > 16 && max_size > 4) {
    throw BudgetExceeded(fmt::format(
        "MUS enumeration over {} facts with size cap {} exceeds the budget", universe.size(),
        max_size));
  }
  max_size = std::min(max_size, universe.size());

  std::vector<IdSet> found;
  IdSet candidate;
  std::vector<const Fact*> refs;
  for (std::size_t k = 1; k <= max_size; ++k) {
    detail::for_each_combination(universe.size(), k, [&](std::span<const std::size_t> idx) {
      candidate.clear();
      for (auto i : idx) candidate.push_back(universe[i]);
      // A superset of a known MUS is never minimal.
      for (const auto& m : found) {
        if (is_subset(m, candidate)) return false;
      }
      refs = gather(pool, candidate);
      if (is_cons(ground_truth_consistent(refs))) return false;
      // By monotonicity, checking the maximal proper subsets covers all proper subsets.
      for (std::size_t drop = 0; drop < refs.size(); ++drop) {
        std::vector<const Fact*> sub;
        sub.reserve(refs.size() - 1);
        for (std::size_t j = 0; j < refs.size(); ++j) {
          if (j != drop) sub.push_back(refs[j]);
        }
        if (!is_cons(ground_truth_consistent(sub))) return false;
      }
      found.push_back(candidate);
      return false;
    });
  }
  return found;
}

std::vector<IdSet> enumerate_all_mus(std::span<const Fact> pool, std::size_t max_size) {
  IdSet all(pool.size());
  std::iota(all.begin(), all.end(), FactId{0});
  return enumerate_all_mus(pool, all, max_size);
}

}  // namespace qxr
