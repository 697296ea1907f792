#include "qxr/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "qxr/detail/hashing.hpp"
#include "qxr/detail/rng.hpp"
#include "qxr/hitting_set.hpp"

namespace qxr {

namespace {

using detail::Rng;

const std::vector<std::string_view> kPersonNames = {
    "Ann",   "Ben",    "Carla", "Dmitri", "Elena", "Farid", "Grace", "Hiro",   "Ines",
    "Jonas", "Keiko",  "Luis",  "Maya",   "Nikos", "Olga",  "Priya", "Quentin", "Rosa",
    "Sven",  "Tariq",  "Uma",   "Victor", "Wanda", "Xavier", "Yara", "Zane"};
const std::vector<std::string_view> kOrgNames = {
    "Acme",     "Globex",   "Initech", "Umbrella", "Hooli",    "Vandelay", "Stark Industries",
    "Soylent",  "Cyberdyne", "Tyrell", "Wonka",    "Oscorp",   "Aperture", "Monarch",
    "Nakatomi", "Pied Piper", "Massive Dynamic", "Gringotts", "Duff", "Prestige Worldwide"};
const std::vector<std::string_view> kLocNames = {
    "Paris", "Lima",  "Oslo",  "Cairo", "Quito", "Hanoi", "Perth", "Dakar", "Riga",  "Bern",
    "Kyoto", "Accra", "Lagos", "Porto", "Tunis", "Sofia", "Minsk", "Delhi", "Seoul", "Havana"};
const std::vector<std::string_view> kEventNames = {
    "Summit",    "Election", "Festival", "Conference", "Marathon",   "Treaty Signing",
    "Product Launch", "Merger", "Strike", "Flood",     "Concert",    "Trial",
    "Expedition", "Auction", "Parade",   "Census",     "Referendum", "Eclipse",
    "Tournament", "Hearing"};
const std::vector<std::string_view> kAnimalNames = {
    "Rex",   "Shadow", "Luna", "Bruno", "Max",  "Bella", "Rocky",  "Daisy", "Simba", "Nala",
    "Buddy", "Coco",   "Zeus", "Milo",  "Kira", "Oscar", "Pepper", "Ruby",  "Thor",  "Biscuit"};

const std::vector<std::string_view>& pool_for(EntityKind k) {
  switch (k) {
    case EntityKind::Person: return kPersonNames;
    case EntityKind::Org: return kOrgNames;
    case EntityKind::Loc: return kLocNames;
    case EntityKind::Event: return kEventNames;
    case EntityKind::Animal: return kAnimalNames;
  }
  return kPersonNames;
}

/// Hands out unique entity names, drawing from per-kind pools and then numbered variants.
class EntityBook {
 public:
  explicit EntityBook(Rng& rng) : rng_(rng) {}

  EntityIndex fresh(EntityKind kind) {
    const auto& pool = pool_for(kind);
    std::vector<std::string_view> unused;
    for (auto name : pool) {
      if (!used_.contains(std::string(name))) unused.push_back(name);
    }
    std::string name;
    if (!unused.empty()) {
      name = std::string(rng_.pick(unused));
    } else {
      const auto base = pool[rng_.below(pool.size())];
      for (int n = 2;; ++n) {
        name = fmt::format("{} {}", base, n);
        if (!used_.contains(name)) break;
      }
    }
    used_.insert(name);
    table_.push_back(Entity{name, kind});
    return static_cast<EntityIndex>(table_.size() - 1);
  }

  EntityTable& table() { return table_; }

 private:
  Rng& rng_;
  std::set<std::string> used_;
  EntityTable table_;
};

/// Ground truth for the on-topic distractors; every emitted distractor is true here.
struct World {
  std::vector<EntityIndex> persons, orgs, locs, events, animals;
  std::map<EntityIndex, bool> tiger;  // animals: tiger or dog
  std::map<EntityIndex, bool> actor, politician;
  std::set<std::pair<EntityIndex, EntityIndex>> works_for;
  std::map<EntityIndex, EntityIndex> located_in;  // orgs and events -> loc
  std::map<EntityIndex, std::size_t> rank;        // events, strictly ordered
  std::map<EntityIndex, std::uint32_t> count;     // events and locs

  bool unary_truth(const Atom& a) const {
    if (tiger.contains(a.entity)) {
      switch (a.predicate) {
        case Predicate::IsTiger: return tiger.at(a.entity);
        case Predicate::IsDog: return !tiger.at(a.entity);
        case Predicate::IsAnimal: return true;
        default: return false;
      }
    }
    switch (a.predicate) {
      case Predicate::IsActor: return actor.at(a.entity);
      case Predicate::IsPolitician: return politician.at(a.entity);
      default: return false;
    }
  }
};

World build_world(std::size_t budget, EntityBook& book, Rng& rng) {
  World w;
  if (budget == 0) return w;
  auto make = [&](std::vector<EntityIndex>& into, EntityKind kind, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) into.push_back(book.fresh(kind));
  };
  make(w.persons, EntityKind::Person, std::max<std::size_t>(2, budget / 6 + 1));
  make(w.orgs, EntityKind::Org, std::max<std::size_t>(2, budget / 10 + 1));
  make(w.locs, EntityKind::Loc, std::max<std::size_t>(2, budget / 10 + 1));
  make(w.events, EntityKind::Event, std::max<std::size_t>(3, budget / 6 + 1));
  make(w.animals, EntityKind::Animal, std::max<std::size_t>(2, budget / 8 + 1));

  for (auto a : w.animals) w.tiger[a] = rng.chance(0.5);
  for (auto p : w.persons) {
    w.actor[p] = rng.chance(0.4);
    w.politician[p] = rng.chance(0.3);
    for (auto o : w.orgs) {
      if (rng.chance(0.3)) w.works_for.emplace(p, o);
    }
  }
  for (auto o : w.orgs) w.located_in[o] = rng.pick(w.locs);
  for (auto e : w.events) w.located_in[e] = rng.pick(w.locs);
  std::vector<EntityIndex> order = w.events;
  rng.shuffle(order);
  for (std::size_t i = 0; i < order.size(); ++i) w.rank[order[i]] = i;
  for (auto e : w.events) w.count[e] = static_cast<std::uint32_t>(rng.between(50, 5000));
  for (auto l : w.locs) w.count[l] = static_cast<std::uint32_t>(rng.between(50, 5000));
  return w;
}

LogicalForm sample_true_fact(const World& w, Rng& rng) {
  const double kind = rng.unit();
  if (kind < 0.35) {
    const bool animal = rng.chance(0.5);
    if (animal) {
      static const std::vector<Predicate> preds = {Predicate::IsTiger, Predicate::IsDog,
                                                   Predicate::IsAnimal, Predicate::IsActor};
      const Atom a{rng.pick(preds), rng.pick(w.animals)};
      return Unary{a, w.unary_truth(a)};
    }
    static const std::vector<Predicate> preds = {Predicate::IsActor, Predicate::IsPolitician,
                                                 Predicate::IsAnimal};
    const Atom a{rng.pick(preds), rng.pick(w.persons)};
    return Unary{a, w.unary_truth(a)};
  }
  if (kind < 0.60) {
    if (rng.chance(0.5)) {
      const auto p = rng.pick(w.persons);
      const auto o = rng.pick(w.orgs);
      return Binary{Relation::WorksFor, p, o, w.works_for.contains({p, o})};
    }
    const auto x = rng.chance(0.5) ? rng.pick(w.orgs) : rng.pick(w.events);
    const auto l = rng.pick(w.locs);
    return Binary{Relation::LocatedIn, x, l, w.located_in.at(x) == l};
  }
  if (kind < 0.85) {
    auto a = rng.pick(w.events);
    auto b = rng.pick(w.events);
    while (b == a) b = rng.pick(w.events);
    if (w.rank.at(a) > w.rank.at(b)) std::swap(a, b);
    return Before{a, b};
  }
  const auto e = rng.chance(0.5) ? rng.pick(w.events) : rng.pick(w.locs);
  const std::uint32_t v = w.count.at(e);
  if (rng.chance(0.5)) {
    return NumericBound{e, BoundKind::AtLeast, static_cast<std::uint32_t>(rng.between(v / 2, v))};
  }
  return NumericBound{e, BoundKind::AtMost,
                      static_cast<std::uint32_t>(rng.between(v, std::int64_t{2} * v))};
}

LogicalForm offtopic_fact(EntityBook& book, Rng& rng) {
  if (rng.chance(0.5)) {
    const auto p = book.fresh(EntityKind::Person);
    const auto o = book.fresh(EntityKind::Org);
    return Binary{Relation::WorksFor, p, o, false};
  }
  const auto o = book.fresh(EntityKind::Org);
  const auto l = book.fresh(EntityKind::Loc);
  return Binary{Relation::LocatedIn, o, l, false};
}

struct Draft {
  std::vector<LogicalForm> forms;
  std::vector<std::vector<std::size_t>> groups;  // planted conflicts, as indices into forms
};

void plant_negation_pair(Draft& d, EntityBook& book, Rng& rng) {
  LogicalForm positive;
  switch (rng.below(4)) {
    case 0: {
      static const std::vector<Predicate> preds = {Predicate::IsTiger, Predicate::IsDog,
                                                   Predicate::IsAnimal};
      positive = Unary{Atom{rng.pick(preds), book.fresh(EntityKind::Animal)}, true};
      break;
    }
    case 1: {
      static const std::vector<Predicate> preds = {Predicate::IsActor, Predicate::IsPolitician};
      positive = Unary{Atom{rng.pick(preds), book.fresh(EntityKind::Person)}, true};
      break;
    }
    case 2: {
      const auto p = book.fresh(EntityKind::Person);
      positive = Binary{Relation::WorksFor, p, book.fresh(EntityKind::Org), true};
      break;
    }
    default: {
      const auto x = book.fresh(rng.chance(0.5) ? EntityKind::Org : EntityKind::Event);
      positive = Binary{Relation::LocatedIn, x, book.fresh(EntityKind::Loc), true};
      break;
    }
  }
  LogicalForm negative = positive;
  std::visit(
      [](auto& f) {
        if constexpr (requires { f.positive; }) f.positive = false;
      },
      negative);
  const std::size_t base = d.forms.size();
  d.forms.push_back(std::move(positive));
  d.forms.push_back(std::move(negative));
  d.groups.push_back({base, base + 1});
}

// Returns (form index of the first edge, its endpoints) so a following cycle can share it.
struct CycleHandle {
  std::size_t first_edge;
  EntityIndex from, to;
};

CycleHandle plant_temporal_cycle(Draft& d, EntityBook& book, const CycleHandle* share) {
  const std::size_t base = d.forms.size();
  if (share != nullptr) {
    // from -> to is reused; close a new cycle to -> x -> from.
    const auto x = book.fresh(EntityKind::Event);
    d.forms.push_back(Before{share->to, x});
    d.forms.push_back(Before{x, share->from});
    d.groups.push_back({share->first_edge, base, base + 1});
    return *share;
  }
  const auto a = book.fresh(EntityKind::Event);
  const auto b = book.fresh(EntityKind::Event);
  const auto c = book.fresh(EntityKind::Event);
  d.forms.push_back(Before{a, b});
  d.forms.push_back(Before{b, c});
  d.forms.push_back(Before{c, a});
  d.groups.push_back({base, base + 1, base + 2});
  return CycleHandle{base, a, b};
}

void plant_exactly_one(Draft& d, EntityBook& book, Rng& rng) {
  // Each atom sits on its own fresh entity, so no taxonomy implication links them.
  ExactlyOne rule;
  for (auto& atom : rule.atoms) {
    if (rng.chance(0.5)) {
      atom = Atom{rng.chance(0.5) ? Predicate::IsActor : Predicate::IsPolitician,
                  book.fresh(EntityKind::Person)};
    } else {
      atom = Atom{rng.chance(0.5) ? Predicate::IsTiger : Predicate::IsDog,
                  book.fresh(EntityKind::Animal)};
    }
  }
  const std::size_t left_out = rng.below(3);
  const std::size_t base = d.forms.size();
  d.forms.push_back(rule);
  std::vector<std::size_t> group{base};
  for (std::size_t i = 0; i < 3; ++i) {
    if (i == left_out) continue;
    group.push_back(d.forms.size());
    d.forms.push_back(Unary{rule.atoms[i], true});
  }
  d.groups.push_back(std::move(group));
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

}  // namespace

std::string_view to_string(Pattern p) {
  switch (p) {
    case Pattern::NegationPair: return "negation_pair";
    case Pattern::TemporalCycle: return "temporal_cycle";
    case Pattern::ExactlyOne: return "exactly_one";
  }
  return "?";
}

std::optional<Pattern> parse_pattern(std::string_view s) {
  for (auto p : {Pattern::NegationPair, Pattern::TemporalCycle, Pattern::ExactlyOne}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

std::string_view to_string(ScopeMode m) {
  return m == ScopeMode::SingleScope ? "single_scope" : "per_cluster";
}

std::optional<ScopeMode> parse_scope_mode(std::string_view s) {
  if (s == "single_scope") return ScopeMode::SingleScope;
  if (s == "per_cluster") return ScopeMode::PerCluster;
  return std::nullopt;
}

std::size_t pattern_size(Pattern p) { return p == Pattern::NegationPair ? 2 : 3; }

IdSet Instance::all_ids() const {
  IdSet ids(facts.size());
  std::iota(ids.begin(), ids.end(), FactId{0});
  return ids;
}

Instance generate(const GenConfig& config) {
  std::size_t planted_facts = 0;
  for (const auto& p : config.planted) {
    if (p.count < 0) throw InfeasibleConfig("planted pattern count must be non-negative");
    planted_facts += pattern_size(p.pattern) * static_cast<std::size_t>(p.count);
  }
  if (planted_facts > config.n_facts) {
    throw InfeasibleConfig(fmt::format("planted patterns need {} facts but n_facts is {}",
                                       planted_facts, config.n_facts));
  }
  if (!(config.offtopic_fraction >= 0.0 && config.offtopic_fraction <= 1.0)) {
    throw InfeasibleConfig(
        fmt::format("off-topic fraction must lie in [0,1], got {}", config.offtopic_fraction));
  }
  if (config.scope_mode == ScopeMode::PerCluster && config.cluster_size < 3) {
    throw InfeasibleConfig("cluster size must be at least 3");
  }

  Rng rng(config.seed);
  EntityBook book(rng);
  Draft draft;

  std::optional<CycleHandle> last_cycle;
  for (const auto& spec : config.planted) {
    for (int i = 0; i < spec.count; ++i) {
      switch (spec.pattern) {
        case Pattern::NegationPair: plant_negation_pair(draft, book, rng); break;
        case Pattern::TemporalCycle: {
          const bool share = config.overlap && last_cycle.has_value();
          last_cycle = plant_temporal_cycle(draft, book, share ? &*last_cycle : nullptr);
          break;
        }
        case Pattern::ExactlyOne: plant_exactly_one(draft, book, rng); break;
      }
    }
  }

  const std::size_t remaining = config.n_facts - draft.forms.size();
  const auto offtopic = static_cast<std::size_t>(
      std::llround(config.offtopic_fraction * static_cast<double>(remaining)));
  const std::size_t ontopic = remaining - offtopic;
  const World world = build_world(ontopic, book, rng);

  std::set<std::string> seen;
  for (const auto& f : draft.forms) seen.insert(render_text(f, book.table()));
  for (std::size_t i = 0; i < ontopic; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
      LogicalForm f = sample_true_fact(world, rng);
      if (seen.insert(render_text(f, book.table())).second) {
        draft.forms.push_back(std::move(f));
        placed = true;
      }
    }
    if (!placed) draft.forms.push_back(offtopic_fact(book, rng));
  }
  for (std::size_t i = 0; i < offtopic; ++i) draft.forms.push_back(offtopic_fact(book, rng));

  // Units keep overlapping conflicts together when packing clusters.
  std::vector<std::size_t> parent(draft.forms.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (const auto& g : draft.groups) {
    for (std::size_t i = 1; i < g.size(); ++i) {
      parent[find_root(parent, g[i])] = find_root(parent, g[0]);
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> unit_map;
  for (std::size_t i = 0; i < draft.forms.size(); ++i) unit_map[find_root(parent, i)].push_back(i);
  std::vector<std::vector<std::size_t>> units;
  for (auto& [_, u] : unit_map) units.push_back(std::move(u));
  rng.shuffle(units);

  std::vector<std::vector<std::size_t>> clusters;
  if (config.scope_mode == ScopeMode::SingleScope) {
    std::vector<std::size_t> all;
    for (const auto& u : units) all.insert(all.end(), u.begin(), u.end());
    rng.shuffle(all);
    clusters.push_back(std::move(all));
  } else {
    std::vector<std::size_t> current;
    for (const auto& u : units) {
      if (!current.empty() && current.size() + u.size() > config.cluster_size) {
        clusters.push_back(std::move(current));
        current.clear();
      }
      current.insert(current.end(), u.begin(), u.end());
    }
    if (!current.empty()) clusters.push_back(std::move(current));
    for (auto& c : clusters) rng.shuffle(c);
  }

  Instance inst;
  inst.id = config.id;
  inst.seed = config.seed;
  std::vector<FactId> new_id(draft.forms.size());
  FactId next = 0;
  for (const auto& c : clusters) {
    IdSet scope;
    for (std::size_t old : c) {
      new_id[old] = next;
      scope.push_back(next);
      ++next;
    }
    if (!scope.empty() || config.scope_mode == ScopeMode::SingleScope) {
      inst.scopes.scopes.push_back(std::move(scope));
    }
  }
  inst.facts.resize(draft.forms.size());
  for (std::size_t old = 0; old < draft.forms.size(); ++old) {
    const FactId id = new_id[old];
    inst.facts[static_cast<std::size_t>(id)] = make_fact(id, draft.forms[old], book.table());
  }
  for (const auto& g : draft.groups) {
    IdSet mus;
    for (std::size_t old : g) mus.push_back(new_id[old]);
    normalize(mus);
    inst.gold_mus.push_back(std::move(mus));
  }
  std::sort(inst.gold_mus.begin(), inst.gold_mus.end());
  inst.gold_consistent = set_difference(inst.all_ids(), greedy_hitting_set(inst.gold_mus));
  inst.entities = std::move(book.table());
  return inst;
}

std::vector<Instance> generate_suite(const GenConfig& config, std::size_t count) {
  std::vector<Instance> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    GenConfig c = config;
    c.seed = detail::derive_seed(config.seed, i);
    c.id = fmt::format("{}-{:04}", config.id, i);
    out.push_back(generate(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Line-delimited JSON records.

InstanceFormatError::InstanceFormatError(std::size_t line, std::string field,
                                         const std::string& detail)
    : std::runtime_error(field.empty() ? fmt::format("line {}: {}", line, detail)
                                       : fmt::format("line {}: field '{}': {}", line, field, detail)),
      line_(line),
      field_(std::move(field)) {}

namespace {

nlohmann::json atom_json(const Atom& a, const EntityTable& e) {
  return {{"predicate", to_string(a.predicate)}, {"entity", e.at(a.entity).name}};
}

nlohmann::json logic_json(const LogicalForm& logic, const EntityTable& e) {
  return std::visit(
      [&](const auto& f) -> nlohmann::json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Unary>) {
          return {{"type", "unary"},
                  {"predicate", to_string(f.atom.predicate)},
                  {"entity", e.at(f.atom.entity).name},
                  {"positive", f.positive}};
        } else if constexpr (std::is_same_v<T, Binary>) {
          return {{"type", "binary"},
                  {"relation", to_string(f.relation)},
                  {"first", e.at(f.first).name},
                  {"second", e.at(f.second).name},
                  {"positive", f.positive}};
        } else if constexpr (std::is_same_v<T, Before>) {
          return {{"type", "before"},
                  {"earlier", e.at(f.earlier).name},
                  {"later", e.at(f.later).name}};
        } else if constexpr (std::is_same_v<T, ExactlyOne>) {
          return {{"type", "exactly_one"},
                  {"atoms",
                   {atom_json(f.atoms[0], e), atom_json(f.atoms[1], e), atom_json(f.atoms[2], e)}}};
        } else {
          return {{"type", "numeric_bound"},
                  {"entity", e.at(f.entity).name},
                  {"bound", to_string(f.kind)},
                  {"value", f.value}};
        }
      },
      logic);
}

class RecordReader {
 public:
  RecordReader(std::size_t line) : line_(line) {}

  [[noreturn]] void fail(const std::string& field, const std::string& detail) const {
    throw InstanceFormatError(line_, field, detail);
  }

  const nlohmann::json& member(const nlohmann::json& obj, const std::string& key,
                               const std::string& path) const {
    if (!obj.is_object()) fail(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing field");
    return *it;
  }

  std::string string_at(const nlohmann::json& obj, const std::string& key,
                        const std::string& path) const {
    const auto& v = member(obj, key, path);
    if (!v.is_string()) fail(join(path, key), "expected a string");
    return v.get<std::string>();
  }

  bool bool_at(const nlohmann::json& obj, const std::string& key, const std::string& path) const {
    const auto& v = member(obj, key, path);
    if (!v.is_boolean()) fail(join(path, key), "expected a boolean");
    return v.get<bool>();
  }

  std::uint64_t uint_at(const nlohmann::json& obj, const std::string& key,
                        const std::string& path) const {
    const auto& v = member(obj, key, path);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(join(path, key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  IdSet ids_at(const nlohmann::json& v, const std::string& path, std::size_t n_facts) const {
    if (!v.is_array()) fail(path, "expected an array of fact ids");
    IdSet ids;
    for (const auto& x : v) {
      if (!x.is_number_integer()) fail(path, "expected integer fact ids");
      const auto id = x.get<std::int64_t>();
      if (id < 0 || static_cast<std::size_t>(id) >= n_facts) {
        fail(path, fmt::format("fact id {} out of range", id));
      }
      ids.push_back(static_cast<FactId>(id));
    }
    normalize(ids);
    return ids;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  std::size_t line_;
};

}  // namespace

nlohmann::json to_json(const Instance& inst) {
  nlohmann::json entities = nlohmann::json::array();
  for (const auto& e : inst.entities) entities.push_back({{"name", e.name}, {"kind", to_string(e.kind)}});
  nlohmann::json facts = nlohmann::json::array();
  for (const auto& f : inst.facts) {
    facts.push_back({{"id", f.id}, {"text", f.text}, {"logic", logic_json(f.logic, inst.entities)}});
  }
  return {{"schema_version", kInstanceSchemaVersion},
          {"id", inst.id},
          {"seed", inst.seed},
          {"entities", entities},
          {"facts", facts},
          {"scopes", inst.scopes.scopes},
          {"gold_mus", inst.gold_mus},
          {"gold_consistent", inst.gold_consistent}};
}

Instance instance_from_json(const nlohmann::json& record, std::size_t line) {
  const RecordReader r(line);
  if (!record.is_object()) r.fail("", "expected a JSON object per line");
  const auto version = r.uint_at(record, "schema_version", "");
  if (version != kInstanceSchemaVersion) {
    r.fail("schema_version", fmt::format("unsupported version {}", version));
  }

  Instance inst;
  inst.id = r.string_at(record, "id", "");
  inst.seed = r.uint_at(record, "seed", "");

  const auto& entities = r.member(record, "entities", "");
  if (!entities.is_array()) r.fail("entities", "expected an array");
  std::map<std::string, EntityIndex> by_name;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    const std::string path = fmt::format("entities[{}]", i);
    Entity e;
    e.name = r.string_at(entities[i], "name", path);
    const auto kind = parse_entity_kind(r.string_at(entities[i], "kind", path));
    if (!kind) r.fail(path + ".kind", "unknown entity kind");
    e.kind = *kind;
    if (!by_name.emplace(e.name, static_cast<EntityIndex>(i)).second) {
      r.fail(path + ".name", fmt::format("duplicate entity name '{}'", e.name));
    }
    inst.entities.push_back(std::move(e));
  }

  auto entity_ref = [&](const nlohmann::json& obj, const std::string& key, const std::string& path) {
    const std::string name = r.string_at(obj, key, path);
    const auto it = by_name.find(name);
    if (it == by_name.end()) r.fail(RecordReader::join(path, key), fmt::format("unknown entity '{}'", name));
    return it->second;
  };
  auto atom_from = [&](const nlohmann::json& obj, const std::string& path) {
    const auto pred = parse_predicate(r.string_at(obj, "predicate", path));
    if (!pred) r.fail(path + ".predicate", "unknown predicate");
    return Atom{*pred, entity_ref(obj, "entity", path)};
  };

  const auto& facts = r.member(record, "facts", "");
  if (!facts.is_array()) r.fail("facts", "expected an array");
  for (std::size_t i = 0; i < facts.size(); ++i) {
    const std::string path = fmt::format("facts[{}]", i);
    const auto& jf = facts[i];
    const auto id = r.uint_at(jf, "id", path);
    if (id != i) r.fail(path + ".id", fmt::format("expected dense id {}, got {}", i, id));
    const std::string lpath = path + ".logic";
    const auto& jl = r.member(jf, "logic", path);
    const std::string type = r.string_at(jl, "type", lpath);
    LogicalForm logic;
    if (type == "unary") {
      logic = Unary{atom_from(jl, lpath), r.bool_at(jl, "positive", lpath)};
    } else if (type == "binary") {
      const auto rel = parse_relation(r.string_at(jl, "relation", lpath));
      if (!rel) r.fail(lpath + ".relation", "unknown relation");
      logic = Binary{*rel, entity_ref(jl, "first", lpath), entity_ref(jl, "second", lpath),
                     r.bool_at(jl, "positive", lpath)};
    } else if (type == "before") {
      logic = Before{entity_ref(jl, "earlier", lpath), entity_ref(jl, "later", lpath)};
    } else if (type == "exactly_one") {
      const auto& atoms = r.member(jl, "atoms", lpath);
      if (!atoms.is_array() || atoms.size() != 3) r.fail(lpath + ".atoms", "expected three atoms");
      ExactlyOne rule;
      for (std::size_t k = 0; k < 3; ++k) rule.atoms[k] = atom_from(atoms[k], fmt::format("{}.atoms[{}]", lpath, k));
      if (rule.atoms[0] == rule.atoms[1] || rule.atoms[0] == rule.atoms[2] ||
          rule.atoms[1] == rule.atoms[2]) {
        r.fail(lpath + ".atoms", "atoms must be distinct");
      }
      logic = rule;
    } else if (type == "numeric_bound") {
      const auto bound = parse_bound_kind(r.string_at(jl, "bound", lpath));
      if (!bound) r.fail(lpath + ".bound", "unknown bound kind");
      const auto value = r.uint_at(jl, "value", lpath);
      if (value > UINT32_MAX) r.fail(lpath + ".value", "value too large");
      logic = NumericBound{entity_ref(jl, "entity", lpath), *bound, static_cast<std::uint32_t>(value)};
    } else {
      r.fail(lpath + ".type", fmt::format("unknown logical form '{}'", type));
    }
    Fact f = make_fact(static_cast<FactId>(id), std::move(logic), inst.entities);
    if (r.string_at(jf, "text", path) != f.text) {
      r.fail(path + ".text", fmt::format("text does not match its logical form (expected \"{}\")", f.text));
    }
    inst.facts.push_back(std::move(f));
  }

  const auto n = inst.facts.size();
  const auto& scopes = r.member(record, "scopes", "");
  if (!scopes.is_array()) r.fail("scopes", "expected an array of id arrays");
  for (std::size_t j = 0; j < scopes.size(); ++j) {
    inst.scopes.scopes.push_back(r.ids_at(scopes[j], fmt::format("scopes[{}]", j), n));
  }
  const auto& gold = r.member(record, "gold_mus", "");
  if (!gold.is_array()) r.fail("gold_mus", "expected an array of id arrays");
  for (std::size_t j = 0; j < gold.size(); ++j) {
    inst.gold_mus.push_back(r.ids_at(gold[j], fmt::format("gold_mus[{}]", j), n));
  }
  inst.gold_consistent = r.ids_at(r.member(record, "gold_consistent", ""), "gold_consistent", n);
  return inst;
}

void write_instances(std::ostream& out, const std::vector<Instance>& instances) {
  for (const auto& inst : instances) out << to_json(inst).dump() << '\n';
}

std::vector<Instance> read_instances(std::istream& in) {
  std::vector<Instance> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw InstanceFormatError(line, "", fmt::format("parse error at byte {}: {}", e.byte, e.what()));
    }
    out.push_back(instance_from_json(record, line));
  }
  return out;
}

void save_instances(const std::filesystem::path& path, const std::vector<Instance>& instances) {
  std::ostringstream os;
  write_instances(os, instances);
  write_file_atomically(path, os.str());
}

std::vector<Instance> load_instances(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  return read_instances(in);
}

void save_instance(const Instance& instance, const std::filesystem::path& path) {
  save_instances(path, {instance});
}

Instance load_instance(const std::filesystem::path& path) {
  auto all = load_instances(path);
  if (all.size() != 1) {
    throw InstanceFormatError(all.size() + 1, "",
                              fmt::format("expected exactly one instance, found {}", all.size()));
  }
  return std::move(all.front());
}

void write_file_atomically(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += fmt::format(".tmp{:x}", detail::hash_string(path.string()) & 0xffff);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error(fmt::format("short write to {}", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace qxr
