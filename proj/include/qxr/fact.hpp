#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qxr {

using FactId = std::int32_t;
using EntityIndex = std::int32_t;

/// Sorted, duplicate-free list of fact ids.
using IdSet = std::vector<FactId>;

enum class EntityKind { Person, Org, Loc, Event, Animal };

struct Entity {
  std::string name;
  EntityKind kind = EntityKind::Person;

  bool operator==(const Entity&) const = default;
};

using EntityTable = std::vector<Entity>;

enum class Predicate { IsTiger, IsDog, IsActor, IsPolitician, IsAnimal };
enum class Relation { WorksFor, LocatedIn };
enum class BoundKind { AtLeast, AtMost };

/// A unary atom P(x). Rule atoms and unary literals share this type.
struct Atom {
  Predicate predicate = Predicate::IsTiger;
  EntityIndex entity = 0;

  auto operator<=>(const Atom&) const = default;
};

struct Unary {
  Atom atom;
  bool positive = true;
  bool operator==(const Unary&) const = default;
};

struct Binary {
  Relation relation = Relation::WorksFor;
  EntityIndex first = 0;
  EntityIndex second = 0;
  bool positive = true;
  bool operator==(const Binary&) const = default;
};

/// `earlier` happened strictly before `later`.
struct Before {
  EntityIndex earlier = 0;
  EntityIndex later = 0;
  bool operator==(const Before&) const = default;
};

/// Exactly one of three distinct unary atoms holds.
struct ExactlyOne {
  Atom atoms[3];
  bool operator==(const ExactlyOne& o) const {
    return atoms[0] == o.atoms[0] && atoms[1] == o.atoms[1] && atoms[2] == o.atoms[2];
  }
};

struct NumericBound {
  EntityIndex entity = 0;
  BoundKind kind = BoundKind::AtLeast;
  std::uint32_t value = 0;
  bool operator==(const NumericBound&) const = default;
};

using LogicalForm = std::variant<Unary, Binary, Before, ExactlyOne, NumericBound>;

struct Fact {
  FactId id = 0;
  std::string text;
  LogicalForm logic;

  bool operator==(const Fact&) const = default;
};

enum class Verdict { Cons, Incons };

inline constexpr bool is_cons(Verdict v) { return v == Verdict::Cons; }
std::string_view to_string(Verdict v);

class UnknownEntityError : public std::out_of_range {
 public:
  explicit UnknownEntityError(EntityIndex index);
  EntityIndex index() const { return index_; }

 private:
  EntityIndex index_;
};

std::string_view to_string(EntityKind k);
std::string_view to_string(Predicate p);
std::string_view to_string(Relation r);
std::string_view to_string(BoundKind b);

std::optional<EntityKind> parse_entity_kind(std::string_view s);
std::optional<Predicate> parse_predicate(std::string_view s);
std::optional<Relation> parse_relation(std::string_view s);
std::optional<BoundKind> parse_bound_kind(std::string_view s);

/// Deterministic natural-language rendering of a logical form.
/// Throws UnknownEntityError if the form references an entity outside `entities`.
std::string render_text(const LogicalForm& logic, const EntityTable& entities);

/// Clause rendering of a single atom, without trailing period ("Rex is a tiger").
std::string render_atom(const Atom& atom, bool positive, const EntityTable& entities);

/// Builds a fact whose text is rendered from `logic`.
Fact make_fact(FactId id, LogicalForm logic, const EntityTable& entities);

/// Gathers pointers to the facts named by `ids` out of a dense pool (pool[i].id == i).
std::vector<const Fact*> gather(std::span<const Fact> pool, std::span<const FactId> ids);

/// Sorts and deduplicates in place.
void normalize(IdSet& ids);
IdSet set_union(std::span<const FactId> a, std::span<const FactId> b);
IdSet set_difference(std::span<const FactId> a, std::span<const FactId> b);
bool is_subset(std::span<const FactId> sub, std::span<const FactId> super);
bool intersects(std::span<const FactId> a, std::span<const FactId> b);

}  // namespace qxr
