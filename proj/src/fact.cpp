#include "qxr/fact.hpp"

#include <algorithm>
#include <array>
#include <iterator>

#include <fmt/format.h>

namespace qxr {

namespace {

constexpr std::array kEntityKinds = {
    std::pair{EntityKind::Person, std::string_view{"PERSON"}},
    std::pair{EntityKind::Org, std::string_view{"ORG"}},
    std::pair{EntityKind::Loc, std::string_view{"LOC"}},
    std::pair{EntityKind::Event, std::string_view{"EVENT"}},
    std::pair{EntityKind::Animal, std::string_view{"ANIMAL"}},
};

constexpr std::array kPredicates = {
    std::pair{Predicate::IsTiger, std::string_view{"IsTiger"}},
    std::pair{Predicate::IsDog, std::string_view{"IsDog"}},
    std::pair{Predicate::IsActor, std::string_view{"IsActor"}},
    std::pair{Predicate::IsPolitician, std::string_view{"IsPolitician"}},
    std::pair{Predicate::IsAnimal, std::string_view{"IsAnimal"}},
};

constexpr std::array kRelations = {
    std::pair{Relation::WorksFor, std::string_view{"WorksFor"}},
    std::pair{Relation::LocatedIn, std::string_view{"LocatedIn"}},
};

constexpr std::array kBoundKinds = {
    std::pair{BoundKind::AtLeast, std::string_view{"at_least"}},
    std::pair{BoundKind::AtMost, std::string_view{"at_most"}},
};

template <typename Table, typename E>
std::string_view name_of(const Table& table, E value) {
  for (const auto& [v, name] : table) {
    if (v == value) return name;
  }
  return "?";
}

template <typename E, typename Table>
std::optional<E> value_of(const Table& table, std::string_view s) {
  for (const auto& [v, name] : table) {
    if (name == s) return v;
  }
  return std::nullopt;
}

const std::string& entity_name(const EntityTable& entities, EntityIndex i) {
  if (i < 0 || static_cast<std::size_t>(i) >= entities.size()) throw UnknownEntityError(i);
  return entities[static_cast<std::size_t>(i)].name;
}

std::string_view category_phrase(Predicate p) {
  switch (p) {
    case Predicate::IsTiger: return "a tiger";
    case Predicate::IsDog: return "a dog";
    case Predicate::IsActor: return "an actor";
    case Predicate::IsPolitician: return "a politician";
    case Predicate::IsAnimal: return "an animal";
  }
  return "?";
}

}  // namespace

UnknownEntityError::UnknownEntityError(EntityIndex index)
    : std::out_of_range(fmt::format("unknown entity index {}", index)), index_(index) {}

std::string_view to_string(Verdict v) { return v == Verdict::Cons ? "cons" : "incons"; }
std::string_view to_string(EntityKind k) { return name_of(kEntityKinds, k); }
std::string_view to_string(Predicate p) { return name_of(kPredicates, p); }
std::string_view to_string(Relation r) { return name_of(kRelations, r); }
std::string_view to_string(BoundKind b) { return name_of(kBoundKinds, b); }

std::optional<EntityKind> parse_entity_kind(std::string_view s) {
  return value_of<EntityKind>(kEntityKinds, s);
}
std::optional<Predicate> parse_predicate(std::string_view s) {
  return value_of<Predicate>(kPredicates, s);
}
std::optional<Relation> parse_relation(std::string_view s) {
  return value_of<Relation>(kRelations, s);
}
std::optional<BoundKind> parse_bound_kind(std::string_view s) {
  return value_of<BoundKind>(kBoundKinds, s);
}

std::string render_atom(const Atom& atom, bool positive, const EntityTable& entities) {
  return fmt::format("{} {} {}", entity_name(entities, atom.entity), positive ? "is" : "is not",
                     category_phrase(atom.predicate));
}

std::string render_text(const LogicalForm& logic, const EntityTable& entities) {
  struct Renderer {
    const EntityTable& entities;

    std::string operator()(const Unary& u) const {
      return render_atom(u.atom, u.positive, entities) + ".";
    }
    std::string operator()(const Binary& b) const {
      const auto& a = entity_name(entities, b.first);
      const auto& c = entity_name(entities, b.second);
      switch (b.relation) {
        case Relation::WorksFor:
          return fmt::format("{} {} {}.", a, b.positive ? "works for" : "does not work for", c);
        case Relation::LocatedIn:
          return fmt::format("{} {} {}.", a, b.positive ? "is located in" : "is not located in", c);
      }
      return {};
    }
    std::string operator()(const Before& b) const {
      return fmt::format("{} happened before {}.", entity_name(entities, b.earlier),
                         entity_name(entities, b.later));
    }
    std::string operator()(const ExactlyOne& r) const {
      return fmt::format("Exactly one of the following holds: {}; {}; {}.",
                         render_atom(r.atoms[0], true, entities),
                         render_atom(r.atoms[1], true, entities),
                         render_atom(r.atoms[2], true, entities));
    }
    std::string operator()(const NumericBound& n) const {
      return fmt::format("{} has {} {} cases.", entity_name(entities, n.entity),
                         n.kind == BoundKind::AtLeast ? "at least" : "at most", n.value);
    }
  };
  return std::visit(Renderer{entities}, logic);
}

Fact make_fact(FactId id, LogicalForm logic, const EntityTable& entities) {
  Fact f;
  f.id = id;
  f.text = render_text(logic, entities);
  f.logic = std::move(logic);
  return f;
}

std::vector<const Fact*> gather(std::span<const Fact> pool, std::span<const FactId> ids) {
  std::vector<const Fact*> out;
  out.reserve(ids.size());
  for (FactId id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= pool.size()) {
      throw std::out_of_range(fmt::format("fact id {} outside pool of {}", id, pool.size()));
    }
    out.push_back(&pool[static_cast<std::size_t>(id)]);
  }
  return out;
}

void normalize(IdSet& ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
}

IdSet set_union(std::span<const FactId> a, std::span<const FactId> b) {
  IdSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IdSet set_difference(std::span<const FactId> a, std::span<const FactId> b) {
  IdSet out;
  out.reserve(a.size());
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool is_subset(std::span<const FactId> sub, std::span<const FactId> super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

bool intersects(std::span<const FactId> a, std::span<const FactId> b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i; else ++j;
  }
  return false;
}

}  // namespace qxr
