#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agentmend/model.hpp"

namespace agentmend {

void to_json(nlohmann::json& j, const FixPatternRule& rule);
void from_json(const nlohmann::json& j, FixPatternRule& rule);

/// At most one rule per pattern. On disk: one <ID>.json per rule in a
/// directory, e.g. rules/CV.json.
class RuleStore {
 public:
  /// Missing directory is an error; other files in it are ignored.
  static RuleStore load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir) const;

  /// Replaces any existing rule for the same pattern.
  void put(FixPatternRule rule);
  const FixPatternRule* find(FixPatternId id) const;
  bool contains(FixPatternId id) const { return find(id) != nullptr; }

  std::size_t size() const noexcept { return rules_.size(); }
  bool empty() const noexcept { return rules_.empty(); }
  /// Taxonomy order.
  std::vector<FixPatternId> patterns() const;
  const std::map<FixPatternId, FixPatternRule>& rules() const noexcept { return rules_; }

  bool operator==(const RuleStore&) const = default;

 private:
  std::map<FixPatternId, FixPatternRule> rules_;
};

}  // namespace agentmend
