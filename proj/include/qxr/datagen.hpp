#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qxr/fact.hpp"
#include "qxr/repair.hpp"

namespace qxr {

enum class Pattern { NegationPair, TemporalCycle, ExactlyOne };
enum class ScopeMode { SingleScope, PerCluster };

std::string_view to_string(Pattern p);
std::optional<Pattern> parse_pattern(std::string_view s);
std::string_view to_string(ScopeMode m);
std::optional<ScopeMode> parse_scope_mode(std::string_view s);

/// Number of facts a pattern plants: 2 for negation pairs, 3 otherwise.
std::size_t pattern_size(Pattern p);

struct PlantSpec {
  Pattern pattern = Pattern::NegationPair;
  int count = 1;
  bool operator==(const PlantSpec&) const = default;
};

struct GenConfig {
  std::size_t n_facts = 30;
  std::vector<PlantSpec> planted;
  double offtopic_fraction = 0.1;
  std::uint64_t seed = 0;
  ScopeMode scope_mode = ScopeMode::SingleScope;
  std::size_t cluster_size = 30;
  /// Consecutive temporal cycles share their first edge; other patterns are unaffected.
  bool overlap = false;
  std::string id = "inst";
};

class InfeasibleConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Instance {
  std::string id;
  std::uint64_t seed = 0;
  EntityTable entities;
  std::vector<Fact> facts;  ///< dense: facts[i].id == i
  ScopeFamily scopes;
  std::vector<IdSet> gold_mus;
  IdSet gold_consistent;

  IdSet all_ids() const;
  bool operator==(const Instance&) const = default;
};

/// Builds one instance: planted patterns on fresh entities, true distractors drawn from a
/// seeded world model, off-topic negated-relation distractors on fresh entities, seeded
/// shuffle, then ids assigned by final position. Throws InfeasibleConfig.
Instance generate(const GenConfig& config);

/// `count` instances with seeds derived from config.seed and ids "<id>-0000", "<id>-0001", ...
std::vector<Instance> generate_suite(const GenConfig& config, std::size_t count);

inline constexpr int kInstanceSchemaVersion = 1;

/// Malformed instance record. `line` is 1-based; `field` names the offending JSON field.
class InstanceFormatError : public std::runtime_error {
 public:
  InstanceFormatError(std::size_t line, std::string field, const std::string& detail);
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

nlohmann::json to_json(const Instance& instance);
Instance instance_from_json(const nlohmann::json& record, std::size_t line = 1);

/// One compact JSON record per line, UTF-8.
void write_instances(std::ostream& out, const std::vector<Instance>& instances);
std::vector<Instance> read_instances(std::istream& in);

void save_instances(const std::filesystem::path& path, const std::vector<Instance>& instances);
std::vector<Instance> load_instances(const std::filesystem::path& path);

void save_instance(const Instance& instance, const std::filesystem::path& path);
Instance load_instance(const std::filesystem::path& path);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomically(const std::filesystem::path& path, std::string_view contents);

}  // namespace qxr
