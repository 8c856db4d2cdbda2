#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "agentmend/model.hpp"
#include "agentmend/rules.hpp"
#include "agentmend/websearch.hpp"

namespace agentmend {

/// Tool names as the models see them.
namespace tool_names {
inline constexpr const char* kListFixPatterns = "list_fix_patterns";
inline constexpr const char* kFixPatternRule = "fix_pattern_rule";
inline constexpr const char* kWebSearch = "web_search";
inline constexpr const char* kSubmitFixCode = "submit_fix_code";
inline constexpr const char* kCodeCompare = "code_compare";
inline constexpr const char* kValidateApi = "validate_api";
inline constexpr const char* kValidateFormat = "validate_format";
inline constexpr const char* kRenderVerdict = "render_verdict";
}  // namespace tool_names

inline constexpr std::string_view kNoResults = "NO RESULTS";
inline constexpr std::string_view kNoChanges = "NO CHANGES";
inline constexpr std::string_view kNoEvidence = "NO EVIDENCE FOUND";

/// Display names of the stored rules, taxonomy order. Throws StoreEmpty.
std::vector<std::string> tool_list_fix_patterns(const RuleStore& store);

/// Name is matched case-insensitively on display name or ID. Throws
/// UnknownPattern or RuleMissing.
const std::string& tool_fix_pattern_rule(const RuleStore& store, std::string_view pattern_name);

/// One line per result: rank, title, url and snippet. kNoResults when empty.
std::string render_search_results(const std::vector<SearchResult>& results);

/// Searches with the task's source site excluded.
std::string tool_web_search(SearchClient& search, const std::string& query, const RepairTask& task,
                            std::size_t limit = SearchClient::kDefaultLimit);

/// Unified diff buggy.py -> candidate.py, or kNoChanges. No whitespace
/// normalization.
std::string tool_code_compare(std::string_view buggy, std::string_view candidate);

/// Documentation evidence for a symbol from the web, or kNoEvidence. Throws
/// PreconditionViolation for an empty symbol.
std::string tool_validate_api(SearchClient& search, const std::string& symbol, const RepairTask& task,
                              std::size_t limit = SearchClient::kDefaultLimit);

struct FormatReport {
  std::vector<std::string> referenced;  // names the test takes from the module
  std::vector<std::string> missing;     // referenced but not defined

  bool ok() const noexcept { return missing.empty(); }
  /// "PASS", "PASS" plus a "no contract detected" note, or "missing: X" lines.
  std::string render() const;
};

/// Names the test imports from `module` (import targets and attribute
/// accesses on the imported module) checked against the candidate's
/// definitions: def headers, column-0 classes, column-0 assignments and
/// annotations, and column-0 imports.
FormatReport check_format(std::string_view candidate, std::string_view test_source,
                          std::string_view module = "buggy");

/// Throws PreconditionViolation when either input is blank.
std::string tool_validate_format(std::string_view candidate, std::string_view test_source);

}  // namespace agentmend
