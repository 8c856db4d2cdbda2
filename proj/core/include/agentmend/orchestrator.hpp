#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agentmend/agents.hpp"

namespace agentmend {

struct RepairConfig {
  AgentSettings agents;
  int max_iterations = 3;
  bool zero_shot = false;  // one chat call, no tools, no critic
};

enum class AgentRole { Fix, Critic, ZeroShot };
std::string_view to_string(AgentRole r) noexcept;

struct SessionRecord {
  AgentRole agent = AgentRole::Fix;
  int iteration = 1;
  AgentTranscript transcript;

  bool operator==(const SessionRecord&) const = default;
};

struct RepairOutcome {
  CandidateFix final_candidate;
  int attempts = 0;  // fix-agent submissions
  std::vector<Verdict> verdicts;
  bool accepted = false;
  std::vector<SessionRecord> transcripts;  // chronological
  SessionUsage usage;
  double wall_time = 0.0;
  std::optional<std::string> error;  // set on partial outcomes

  bool operator==(const RepairOutcome&) const = default;
};

/// A repair that stopped early. partial() holds everything completed,
/// including the failing session's transcript.
class RepairFailure : public Error {
 public:
  RepairFailure(Errc code, std::string detail, RepairOutcome partial)
      : Error(code, std::move(detail)), partial_(std::move(partial)) {}
  const RepairOutcome& partial() const noexcept { return partial_; }

 private:
  RepairOutcome partial_;
};

/// Fix agent then critic, up to max_iterations times. A rejection's
/// reasoning is passed to the next fix attempt; after the last rejection the
/// last candidate is returned with accepted = false. Under NoCritic (and in
/// zero-shot mode) one fix attempt is accepted by configuration.
RepairOutcome repair(ChatClient& client, const RepairTask& task, const AgentDeps& deps, const RepairConfig& config);

struct RunMetadata {
  std::string instance_id;
  nlohmann::json config = nlohmann::json::object();  // effective configuration
  std::map<std::string, std::string> prompt_hashes;
  Ablation ablation = Ablation::None;
  bool zero_shot = false;
};

namespace run_files {
inline constexpr const char* kCandidate = "candidate.py";
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kTranscripts = "transcripts.jsonl";
inline constexpr const char* kVerdicts = "verdicts.json";
}  // namespace run_files

/// Writes candidate.py, manifest.json, transcripts.jsonl and verdicts.json
/// into run_dir (created if needed). Returns the manifest path. Throws IoError.
std::filesystem::path persist_run(const RepairOutcome& outcome, const std::filesystem::path& run_dir,
                                  const RunMetadata& meta);

struct LoadedRun {
  RepairOutcome outcome;
  nlohmann::json manifest;
};

LoadedRun load_run(const std::filesystem::path& run_dir);

}  // namespace agentmend
