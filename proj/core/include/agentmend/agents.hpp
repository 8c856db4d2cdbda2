#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agentmend/llm.hpp"
#include "agentmend/model.hpp"
#include "agentmend/prompts.hpp"
#include "agentmend/react.hpp"
#include "agentmend/rules.hpp"
#include "agentmend/tools.hpp"
#include "agentmend/websearch.hpp"

namespace agentmend {

/// Run configurations: full system, no fix rules, no web search, no critic.
enum class Ablation { None, NoFixRules, NoWebSearch, NoCritic };

std::string_view to_string(Ablation a) noexcept;  // "none", "nfr", "nws", "nca"
std::optional<Ablation> parse_ablation(std::string_view s);

struct CandidateFix {
  std::string source;
  int produced_at_iteration = 1;

  bool operator==(const CandidateFix&) const = default;
};

enum class Decision { Accept, Reject };
std::string_view to_string(Decision d) noexcept;

struct Finding {
  std::string tool;
  std::string text;

  bool operator==(const Finding&) const = default;
};

struct Verdict {
  Decision decision = Decision::Reject;
  std::string reasoning;
  std::vector<Finding> findings;
  bool synthesized = false;  // no critic ran; Accept by configuration
  bool overridden = false;   // Accept turned into Reject by the format guard

  bool accepted() const noexcept { return decision == Decision::Accept; }
  bool operator==(const Verdict&) const = default;
};

void to_json(nlohmann::json& j, const CandidateFix& c);
void from_json(const nlohmann::json& j, CandidateFix& c);
void to_json(nlohmann::json& j, const Verdict& v);
void from_json(const nlohmann::json& j, Verdict& v);

/// What the agents reach through their tools. Pointers may be null when the
/// active ablation does not use them.
struct AgentDeps {
  const RuleStore* rules = nullptr;
  SearchClient* search = nullptr;
  const PromptLibrary* prompts = &PromptLibrary::builtin();
  std::size_t search_limit = SearchClient::kDefaultLimit;
};

struct AgentSettings {
  Ablation ablation = Ablation::None;
  int fix_step_budget = 12;
  int critic_step_budget = 8;
  bool critic_sees_intent = true;
};

/// Throws PreconditionViolation when a dependency the ablation needs is null.
void check_deps(const AgentDeps& deps, Ablation ablation);

std::vector<ToolSchema> fix_agent_tools(Ablation ablation);
/// Empty under NoCritic.
std::vector<ToolSchema> critic_tools(Ablation ablation);

struct FixAttempt {
  CandidateFix candidate;
  AgentTranscript transcript;
};

/// One fix-agent session. Throws SessionError(NoFixProduced) when the budget
/// runs out without a submission; provider errors arrive as SessionError.
FixAttempt run_fix_agent(ChatClient& client, const RepairTask& task, const std::optional<std::string>& critic_feedback,
                         int iteration, const AgentDeps& deps, const AgentSettings& settings);

/// Single chat call without tools; the first fenced code block of the reply
/// is the candidate. Throws SessionError(NoFixProduced) without one.
FixAttempt run_zero_shot(ChatClient& client, const RepairTask& task, const AgentDeps& deps);

struct CriticReview {
  Verdict verdict;
  AgentTranscript transcript;
};

/// One fresh critic session over the current candidate. A session that ends
/// without render_verdict yields Reject "critic budget exhausted".
CriticReview run_critic(ChatClient& client, const std::string& buggy, const CandidateFix& candidate,
                        const std::string& test_source, const RepairTask& task, const AgentDeps& deps,
                        const AgentSettings& settings);

inline constexpr std::string_view kCriticBudgetExhausted = "critic budget exhausted";

/// First ``` fenced block (any info string), or nullopt.
std::optional<std::string> extract_code_block(std::string_view reply);

}  // namespace agentmend
