#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agentmend/error.hpp"
#include "agentmend/llm.hpp"

namespace agentmend {

enum class Termination { ToolTerminal, StepBudget, Error };

std::string_view to_string(Termination t) noexcept;

struct ToolInvocation {
  ToolCallRequest request;
  std::string result;
  double wall_time = 0.0;
  bool is_error = false;

  bool operator==(const ToolInvocation&) const = default;
};

struct AgentTranscript {
  std::vector<ChatTurn> turns;
  std::vector<ToolInvocation> invocations;
  std::vector<UsageRecord> usage;  // one per chat call
  Termination terminated_by = Termination::Error;
  std::optional<std::string> error;

  std::size_t chat_calls() const noexcept { return usage.size(); }
  bool operator==(const AgentTranscript&) const = default;
};

void to_json(nlohmann::json& j, const ToolInvocation& inv);
void from_json(const nlohmann::json& j, ToolInvocation& inv);
void to_json(nlohmann::json& j, const AgentTranscript& t);
void from_json(const nlohmann::json& j, AgentTranscript& t);

/// An error that ends a session, carrying whatever transcript exists.
class SessionError : public Error {
 public:
  SessionError(Errc code, std::string detail, AgentTranscript transcript)
      : Error(code, std::move(detail)), transcript_(std::move(transcript)) {}
  const AgentTranscript& transcript() const noexcept { return transcript_; }

 private:
  AgentTranscript transcript_;
};

struct ToolOutcome {
  std::string text;
  bool terminal = false;
};

/// Handlers throw agentmend::Error for failures the model should see; the
/// message becomes the tool result and the session continues.
using ToolHandler = std::function<ToolOutcome(const nlohmann::json& arguments)>;
using ToolDispatch = std::map<std::string, ToolHandler>;

inline constexpr int kMaxUnknownToolRetries = 2;

/// Reason-act loop. Each step is one chat call followed by execution of the
/// requested tools in order. Ends when a terminal tool succeeds
/// (ToolTerminal) or after `step_budget` chat calls (StepBudget).
///
/// Throws SessionError: UnknownTool on the third call to an undeclared tool,
/// or the provider's code (terminated_by Error) when a chat call fails.
AgentTranscript react_run(ChatClient& client, const std::string& system_prompt, const std::string& user_payload,
                          std::span<const ToolSchema> tools, const ToolDispatch& dispatch, int step_budget);

}  // namespace agentmend
