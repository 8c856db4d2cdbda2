#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agentmend/diff.hpp"
#include "agentmend/orchestrator.hpp"

namespace agentmend {

// ---------------------------------------------------------------------------
// Test execution
// ---------------------------------------------------------------------------

struct RunnerConfig {
  /// Placeholders: {interpreter}, {test_file}, {instance_dir}.
  std::string command_template = "{interpreter} {test_file}";
  std::string interpreter = "python3";
  double timeout = 300.0;  // seconds
  /// Variables copied from the harness environment; everything else is dropped.
  std::vector<std::string> env_allowlist = {"PATH", "HOME", "LANG", "LC_ALL", "PYTHONPATH", "VIRTUAL_ENV", "TMPDIR"};
  std::map<std::string, std::string> extra_env;
  /// Prefix the command with `unshare -rn` (new, empty network namespace).
  bool isolate_network = false;
  /// Parent of the per-run scratch directories; system temp dir when empty.
  std::filesystem::path scratch_root;
  bool keep_scratch = false;
};

void to_json(nlohmann::json& j, const RunnerConfig& r);
void from_json(const nlohmann::json& j, RunnerConfig& r);

enum class TestStatus { Resolved, Unresolved, ExecutionError, Timeout };
std::string_view to_string(TestStatus s) noexcept;
std::optional<TestStatus> parse_test_status(std::string_view s) noexcept;

struct TestResult {
  TestStatus status = TestStatus::ExecutionError;
  int exit_code = -1;
  std::string stdout_text;
  std::string stderr_text;
  double duration = 0.0;
};

/// Copies the instance into a scratch directory (from `instance_dir` when
/// given, so auxiliary files come along; otherwise from the instance
/// fields), replaces buggy.py with `candidate` and runs the test command
/// there. Resolved iff exit code 0. Throws SandboxSetupError when the scratch
/// copy cannot be made.
TestResult run_tests(const std::string& candidate, const BenchmarkInstance& instance, const RunnerConfig& runner,
                     const std::optional<std::filesystem::path>& instance_dir = std::nullopt);

/// Throws SandboxSetupError when the runner's interpreter is not on PATH.
void check_interpreter(const RunnerConfig& runner);

// ---------------------------------------------------------------------------
// Localization
// ---------------------------------------------------------------------------

struct LocalizationReport {
  bool line_hit = false;
  bool function_hit = false;
  bool component_hit = false;
  bool component_fallback = false;  // no regions; component_hit mirrors function_hit
  diff::ChangedLineSet predicted_lines;
  diff::ChangedLineSet gold_lines;
};

/// Component with the most predicted lines inside the regions. Lines outside
/// every region do not vote; ties go to the earlier enum member. nullopt when
/// no line falls in a region.
std::optional<AgentComponent> majority_component(const diff::ChangedLineSet& lines,
                                                 const std::vector<ComponentRegion>& regions);

LocalizationReport score_localization(const std::string& buggy, const std::string& candidate, const std::string& gold,
                                      const BenchmarkInstance& instance);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct BenchRow {
  std::string instance_id;
  TestStatus status = TestStatus::ExecutionError;
  bool resolved = false;
  bool line_hit = false;
  bool function_hit = false;
  bool component_hit = false;
  bool component_fallback = false;
  int attempts = 0;
  double cost = 0.0;
  double time = 0.0;
  std::optional<std::string> error;

  bool operator==(const BenchRow&) const = default;
};

struct BenchAggregates {
  std::size_t instances = 0;
  std::size_t resolved = 0;
  double repair_rate = 0;
  double line_acc = 0;
  double fn_acc = 0;
  double comp_acc = 0;
  double mean_attempts = 0;
  double mean_cost = 0;
  double mean_time = 0;

  bool operator==(const BenchAggregates&) const = default;
};

struct BenchReport {
  std::string label;  // e.g. the ablation name
  std::vector<BenchRow> rows;
  BenchAggregates aggregates;

  bool operator==(const BenchReport&) const = default;
};

/// Column means over the rows. Throws EmptyInput for no rows.
BenchAggregates aggregate(const std::vector<BenchRow>& rows);

void to_json(nlohmann::json& j, const BenchRow& r);
void from_json(const nlohmann::json& j, BenchRow& r);
void to_json(nlohmann::json& j, const BenchAggregates& a);
void from_json(const nlohmann::json& j, BenchAggregates& a);
/// Stable keys: "label", "rows", "aggregates".
void to_json(nlohmann::json& j, const BenchReport& r);
void from_json(const nlohmann::json& j, BenchReport& r);

/// Header plus one line per report: Config, RP, LI, FN, CP, Attmp, Cost, Time.
std::string render_table(const std::vector<BenchReport>& reports);

struct DeltaReport {
  // Percentage points, base minus ablated.
  double repair_rate = 0;
  double line_acc = 0;
  double fn_acc = 0;
  double comp_acc = 0;
  // Plain differences, base minus ablated.
  double mean_attempts = 0;
  double mean_cost = 0;
  double mean_time = 0;
};

void to_json(nlohmann::json& j, const DeltaReport& d);

/// Throws CorpusMismatch unless both reports cover the same instance ids.
DeltaReport compare_configs(const BenchReport& base, const BenchReport& ablated);

// ---------------------------------------------------------------------------
// Corpus evaluation
// ---------------------------------------------------------------------------

struct BenchConfig {
  RepairConfig repair;
  RunnerConfig runner;
  std::size_t parallelism = 1;
  bool gold_sanity = false;
  std::optional<std::filesystem::path> run_dir;  // per-instance artifacts when set
  RunMetadata run_metadata;                      // instance_id is filled per instance
};

/// Builds the chat client for one instance, so mocks can replay a per-instance
/// script on their own clock.
using ClientFactory = std::function<std::shared_ptr<ChatClient>(const BenchmarkInstance&)>;

/// repair -> run_tests -> score_localization per instance. Instance failures
/// become ExecutionError rows. Throws EmptyCorpus, or GoldSanityFailed when
/// the optional pre-flight finds a gold fix that does not pass its test.
BenchReport evaluate_corpus(const std::filesystem::path& corpus_dir, const ClientFactory& clients,
                            const AgentDeps& deps, const BenchConfig& config);

}  // namespace agentmend
