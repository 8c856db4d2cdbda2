#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace agentmend {

// ---------------------------------------------------------------------------
// Fix-pattern taxonomy
// ---------------------------------------------------------------------------

enum class FixPatternId : std::uint8_t {
  ANA,    // Add New Attribute
  RA,     // Remove Attribute
  AOPC,   // Addition of Precondition Check
  CV,     // Change Version
  IL,     // Install Library
  AOO,    // Addition of Operations
  ROO,    // Removal of Operations
  CDT,    // Change Data Type
  CP,     // Change Prompt
  FS,     // Fix Syntax
  CR,     // Change Reference
  UDMo,   // Use Different Module
  CER,    // Change External Resources
  CF,     // Change Function
  AEH,    // Add Exception Handling
  FAN,    // Fix Attribute Name
  CPV,    // Change Parameter Value
  CID,    // Change Input Data
  AID,    // Add Input Data
  UDM,    // Use Different Model
  CPO,    // Change Parameter Order
  MCTDS,  // Move Code to Different Scope
  FDA,    // Fix Data Access
};

inline constexpr std::size_t kFixPatternCount = 23;

/// All patterns in taxonomy order.
std::span<const FixPatternId> all_fix_patterns() noexcept;

std::string_view abbreviation(FixPatternId id) noexcept;
std::string_view display_name(FixPatternId id) noexcept;

/// Exact abbreviation lookup ("CV", "UDMo").
std::optional<FixPatternId> fix_pattern_from_abbreviation(std::string_view abbr) noexcept;

/// Case-insensitive lookup by abbreviation or display name.
std::optional<FixPatternId> parse_fix_pattern(std::string_view name);

// ---------------------------------------------------------------------------
// Agent components and data sources
// ---------------------------------------------------------------------------

enum class AgentComponent : std::uint8_t { Reasoning, Memory, Planning, Tool };

inline constexpr std::array<AgentComponent, 4> kAllComponents = {
    AgentComponent::Reasoning, AgentComponent::Memory, AgentComponent::Planning,
    AgentComponent::Tool};

std::string_view to_string(AgentComponent c) noexcept;
/// Case-insensitive; nullopt for anything outside the four members.
std::optional<AgentComponent> parse_component(std::string_view name);

enum class FixSource : std::uint8_t { StackOverflow, GitHubCommit, GitHubIssue, HuggingFaceForum };

std::string_view to_string(FixSource s) noexcept;
std::optional<FixSource> parse_fix_source(std::string_view name);

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

struct FixPatternRule {
  FixPatternId pattern{};
  std::string rule_text;
  std::size_t source_summary_count = 0;
  std::chrono::system_clock::time_point generated_at{};

  bool operator==(const FixPatternRule&) const = default;
};

/// One annotated entry of the empirical corpus. Multi-pattern bugs appear as
/// one entry per pattern.
struct AnnotatedFix {
  FixSource source{};
  std::string post_id;
  std::string title;
  std::string body;
  std::optional<std::string> buggy_code;
  std::optional<std::string> fixed_code;
  std::string rationale;
  FixPatternId pattern{};
  AgentComponent component{};
  std::string framework;
  std::string language;

  bool operator==(const AnnotatedFix&) const = default;
};

void to_json(nlohmann::json& j, const AnnotatedFix& fix);
void from_json(const nlohmann::json& j, AnnotatedFix& fix);

/// 1-based inclusive line range.
struct LineRange {
  int start = 0;
  int end = 0;

  bool contains(int line) const noexcept { return line >= start && line <= end; }
  bool operator==(const LineRange&) const = default;
};

struct ComponentRegion {
  LineRange lines;
  AgentComponent component{};

  bool operator==(const ComponentRegion&) const = default;
};

struct Requirement {
  std::string name;
  std::string comparator;  // "==" or ">="
  std::string version;

  std::string to_string() const { return name + comparator + version; }
  bool operator==(const Requirement&) const = default;
};

struct BenchmarkInstance {
  std::string instance_id;
  std::string buggy_source;
  std::string intent;
  std::string gold_source;
  std::string test_source;
  std::vector<Requirement> requirements;
  std::string readme;
  AgentComponent annotated_component{};
  std::optional<std::vector<ComponentRegion>> component_regions;
  std::string source_site;
  std::string subject_framework;

  bool operator==(const BenchmarkInstance&) const = default;
};

/// Throws Error(ManifestInvalid) naming the first violated invariant.
void validate_instance(const BenchmarkInstance& instance);

/// What the fix agent is handed for one repair.
struct RepairTask {
  std::string buggy_source;
  std::string intent;
  std::string test_source;
  std::string source_site;

  static RepairTask from_instance(const BenchmarkInstance& instance);
  /// Throws Error(PreconditionViolation) if any field is empty.
  void validate() const;
};

std::string format_timestamp(std::chrono::system_clock::time_point tp);
std::chrono::system_clock::time_point parse_timestamp(std::string_view iso8601);

}  // namespace agentmend
