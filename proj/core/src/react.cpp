#include "agentmend/react.hpp"

#include <set>

#include <spdlog/spdlog.h>

namespace agentmend {

std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::ToolTerminal: return "tool_terminal";
    case Termination::StepBudget: return "step_budget";
    case Termination::Error: return "error";
  }
  return "error";
}

namespace {

Termination parse_termination(const std::string& s) {
  if (s == "tool_terminal") return Termination::ToolTerminal;
  if (s == "step_budget") return Termination::StepBudget;
  if (s == "error") return Termination::Error;
  throw Error(Errc::ManifestInvalid, "terminated_by: " + s);
}

constexpr const char* kNudge =
    "No tool was called. Continue by calling one of the available tools; finish with the submitting tool.";

}  // namespace

void to_json(nlohmann::json& j, const ToolInvocation& inv) {
  j = nlohmann::json{{"request", inv.request}, {"result", inv.result}, {"wall_time", inv.wall_time},
                     {"is_error", inv.is_error}};
}

void from_json(const nlohmann::json& j, ToolInvocation& inv) {
  inv.request = j.at("request").get<ToolCallRequest>();
  inv.result = j.at("result").get<std::string>();
  inv.wall_time = j.value("wall_time", 0.0);
  inv.is_error = j.value("is_error", false);
}

void to_json(nlohmann::json& j, const AgentTranscript& t) {
  j = nlohmann::json{{"turns", t.turns},
                     {"invocations", t.invocations},
                     {"usage", t.usage},
                     {"terminated_by", to_string(t.terminated_by)}};
  if (t.error) j["error"] = *t.error;
}

void from_json(const nlohmann::json& j, AgentTranscript& t) {
  t.turns = j.at("turns").get<std::vector<ChatTurn>>();
  t.invocations = j.value("invocations", std::vector<ToolInvocation>{});
  t.usage = j.value("usage", std::vector<UsageRecord>{});
  t.terminated_by = parse_termination(j.at("terminated_by").get<std::string>());
  t.error = j.contains("error") ? std::optional(j["error"].get<std::string>()) : std::nullopt;
}

AgentTranscript react_run(ChatClient& client, const std::string& system_prompt, const std::string& user_payload,
                          std::span<const ToolSchema> tools, const ToolDispatch& dispatch, int step_budget) {
  if (step_budget < 1) throw Error(Errc::PreconditionViolation, "step budget must be at least 1");
  std::set<std::string> declared;
  for (const auto& t : tools) declared.insert(t.name);
  std::set<std::string> handled;
  for (const auto& [name, h] : dispatch) handled.insert(name);
  if (declared != handled) throw Error(Errc::PreconditionViolation, "tool schemas and dispatch table differ");

  AgentTranscript tx;
  tx.turns.push_back(ChatTurn::system(system_prompt));
  tx.turns.push_back(ChatTurn::user(user_payload));
  int unknown_calls = 0;
  auto& clock = client.clock();

  for (int step = 0; step < step_budget; ++step) {
    ChatResult result;
    try {
      result = client.chat(tx.turns, tools);
    } catch (const Error& e) {
      tx.terminated_by = Termination::Error;
      tx.error = e.what();
      throw SessionError(e.code(), e.detail(), std::move(tx));
    }
    tx.usage.push_back(result.usage);
    const auto calls = result.turn.tool_calls;
    tx.turns.push_back(std::move(result.turn));

    if (calls.empty()) {
      tx.turns.push_back(ChatTurn::user(kNudge));
      continue;
    }

    bool terminal = false;
    for (const auto& call : calls) {
      ToolInvocation inv{call, {}, 0.0, false};
      if (terminal) {
        inv.result = "error: session already finished; call ignored";
        inv.is_error = true;
      } else if (const auto it = dispatch.find(call.tool_name); it == dispatch.end()) {
        ++unknown_calls;
        inv.result = "error: unknown tool \"" + call.tool_name + "\"; available tools:";
        for (const auto& name : declared) inv.result += " " + name;
        inv.is_error = true;
        if (unknown_calls > kMaxUnknownToolRetries) {
          tx.turns.push_back(ChatTurn::tool_result(call.call_id, inv.result));
          tx.invocations.push_back(std::move(inv));
          tx.terminated_by = Termination::Error;
          tx.error = "unknown tool " + call.tool_name;
          // Keep the pairing invariant for any calls after this one.
          bool after = false;
          for (const auto& rest : calls) {
            if (after) tx.turns.push_back(ChatTurn::tool_result(rest.call_id, "error: session aborted"));
            if (&rest == &call) after = true;
          }
          throw SessionError(Errc::UnknownTool, call.tool_name, std::move(tx));
        }
      } else {
        const auto start = clock.now();
        try {
          auto outcome = it->second(call.arguments);
          inv.result = std::move(outcome.text);
          terminal = outcome.terminal;
        } catch (const Error& e) {
          inv.result = std::string("error: ") + e.what();
          inv.is_error = true;
        }
        inv.wall_time = clock.now() - start;
      }
      spdlog::debug("tool {} -> {} chars{}", call.tool_name, inv.result.size(), inv.is_error ? " (error)" : "");
      tx.turns.push_back(ChatTurn::tool_result(call.call_id, inv.result));
      tx.invocations.push_back(std::move(inv));
    }
    if (terminal) {
      tx.terminated_by = Termination::ToolTerminal;
      return tx;
    }
  }
  tx.terminated_by = Termination::StepBudget;
  return tx;
}

}  // namespace agentmend
