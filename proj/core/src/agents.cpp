#include "agentmend/agents.hpp"

#include <spdlog/spdlog.h>

#include "agentmend/error.hpp"
#include "agentmend/text.hpp"

namespace agentmend {

std::string_view to_string(Ablation a) noexcept {
  switch (a) {
    case Ablation::None: return "none";
    case Ablation::NoFixRules: return "nfr";
    case Ablation::NoWebSearch: return "nws";
    case Ablation::NoCritic: return "nca";
  }
  return "none";
}

std::optional<Ablation> parse_ablation(std::string_view s) {
  const auto l = text::to_lower(text::trim(s));
  if (l == "none" || l == "full") return Ablation::None;
  if (l == "nfr") return Ablation::NoFixRules;
  if (l == "nws") return Ablation::NoWebSearch;
  if (l == "nca") return Ablation::NoCritic;
  return std::nullopt;
}

std::string_view to_string(Decision d) noexcept { return d == Decision::Accept ? "accept" : "reject"; }

void to_json(nlohmann::json& j, const CandidateFix& c) {
  j = nlohmann::json{{"source", c.source}, {"produced_at_iteration", c.produced_at_iteration}};
}

void from_json(const nlohmann::json& j, CandidateFix& c) {
  c.source = j.at("source").get<std::string>();
  c.produced_at_iteration = j.at("produced_at_iteration").get<int>();
}

void to_json(nlohmann::json& j, const Verdict& v) {
  auto findings = nlohmann::json::array();
  for (const auto& f : v.findings) findings.push_back({{"tool", f.tool}, {"text", f.text}});
  j = nlohmann::json{{"decision", to_string(v.decision)}, {"reasoning", v.reasoning}, {"findings", findings},
                     {"synthesized", v.synthesized},      {"overridden", v.overridden}};
}

void from_json(const nlohmann::json& j, Verdict& v) {
  const auto d = j.at("decision").get<std::string>();
  if (d != "accept" && d != "reject") throw Error(Errc::ManifestInvalid, "decision: " + d);
  v.decision = d == "accept" ? Decision::Accept : Decision::Reject;
  v.reasoning = j.value("reasoning", std::string{});
  v.findings.clear();
  for (const auto& f : j.value("findings", nlohmann::json::array())) {
    v.findings.push_back(Finding{f.at("tool").get<std::string>(), f.at("text").get<std::string>()});
  }
  v.synthesized = j.value("synthesized", false);
  v.overridden = j.value("overridden", false);
}

// --- toolsets --------------------------------------------------------------

namespace {

ToolSchema schema(const char* name, std::string description, std::vector<ToolParam> params = {}) {
  return ToolSchema{name, std::move(description), std::move(params)};
}

bool uses_rules(Ablation a) { return a != Ablation::NoFixRules; }
bool uses_search(Ablation a) { return a != Ablation::NoWebSearch; }

std::string string_arg(const nlohmann::json& args, const char* name) {
  if (!args.is_object() || !args.contains(name) || !args[name].is_string()) {
    throw Error(Errc::PreconditionViolation, std::string("missing string argument \"") + name + "\"");
  }
  return args[name].get<std::string>();
}

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

}  // namespace

void check_deps(const AgentDeps& deps, Ablation ablation) {
  if (deps.prompts == nullptr) throw Error(Errc::PreconditionViolation, "prompt library missing");
  if (uses_rules(ablation) && deps.rules == nullptr) {
    throw Error(Errc::PreconditionViolation, "rule store required for ablation " + std::string(to_string(ablation)));
  }
  if (uses_search(ablation) && deps.search == nullptr) {
    throw Error(Errc::PreconditionViolation, "search client required for ablation " + std::string(to_string(ablation)));
  }
}

std::vector<ToolSchema> fix_agent_tools(Ablation ablation) {
  using namespace tool_names;
  std::vector<ToolSchema> tools;
  if (uses_rules(ablation)) {
    tools.push_back(schema(kListFixPatterns, "List the names of all known fix patterns. Rule bodies are not included."));
    tools.push_back(schema(kFixPatternRule, "Get the full rule for one fix pattern: when it applies and how to fix.",
                           {{"pattern_name", "string", "Pattern display name or abbreviation", true}}));
  }
  if (uses_search(ablation)) {
    tools.push_back(schema(kWebSearch, "Search the web for API changes, error messages or documentation.",
                           {{"query", "string", "Search query", true}}));
  }
  tools.push_back(schema(kSubmitFixCode, "Submit the complete corrected program. Ends the session.",
                         {{"code", "string", "Full source of the fixed buggy.py", true}}));
  return tools;
}

std::vector<ToolSchema> critic_tools(Ablation ablation) {
  using namespace tool_names;
  if (ablation == Ablation::NoCritic) return {};
  std::vector<ToolSchema> tools;
  tools.push_back(schema(kCodeCompare, "Unified diff between the buggy program and the proposed fix."));
  if (uses_search(ablation)) {
    tools.push_back(schema(kValidateApi, "Find documentation evidence for how a function, method or class is used.",
                           {{"symbol", "string", "Symbol or call to look up", true}}));
  }
  tools.push_back(schema(kValidateFormat, "Check that the fix defines every name the test file imports from it."));
  tools.push_back(schema(kRenderVerdict, "Give the final verdict. Ends the session.",
                         {{"decision", "string", "\"accept\" or \"reject\"", true},
                          {"reasoning", "string", "Why; required when rejecting", true}}));
  return tools;
}

// --- fix agent -------------------------------------------------------------

FixAttempt run_fix_agent(ChatClient& client, const RepairTask& task, const std::optional<std::string>& critic_feedback,
                         int iteration, const AgentDeps& deps, const AgentSettings& settings) {
  task.validate();
  check_deps(deps, settings.ablation);
  if (iteration < 1) throw Error(Errc::PreconditionViolation, "iteration must be positive");

  std::optional<CandidateFix> submitted;
  ToolDispatch dispatch;
  using namespace tool_names;
  if (uses_rules(settings.ablation)) {
    dispatch[kListFixPatterns] = [&](const nlohmann::json&) {
      return ToolOutcome{join(tool_list_fix_patterns(*deps.rules), "\n")};
    };
    dispatch[kFixPatternRule] = [&](const nlohmann::json& args) {
      return ToolOutcome{tool_fix_pattern_rule(*deps.rules, string_arg(args, "pattern_name"))};
    };
  }
  if (uses_search(settings.ablation)) {
    dispatch[kWebSearch] = [&](const nlohmann::json& args) {
      return ToolOutcome{tool_web_search(*deps.search, string_arg(args, "query"), task, deps.search_limit)};
    };
  }
  dispatch[kSubmitFixCode] = [&](const nlohmann::json& args) {
    auto code = string_arg(args, "code");
    if (text::is_blank(code)) throw Error(Errc::EmptyCode, "submitted code is empty");
    submitted = CandidateFix{std::move(code), iteration};
    return ToolOutcome{"Fix saved as attempt " + std::to_string(iteration) + ".", true};
  };

  const auto& prompts = *deps.prompts;
  const auto payload = prompts.render(prompt_names::kFixAgent,
                                      {{"intent", task.intent},
                                       {"buggy_code", task.buggy_source},
                                       {"test_code", task.test_source},
                                       {"critic_feedback", critic_feedback ? *critic_feedback : "None; this is the first attempt."}});
  const auto tools = fix_agent_tools(settings.ablation);
  auto tx = react_run(client, prompts.get(prompt_names::kFixAgentSystem), payload, tools, dispatch,
                      settings.fix_step_budget);
  if (!submitted) {
    throw SessionError(Errc::NoFixProduced,
                       "fix agent used " + std::to_string(tx.chat_calls()) + " steps without submitting",
                       std::move(tx));
  }
  return FixAttempt{std::move(*submitted), std::move(tx)};
}

std::optional<std::string> extract_code_block(std::string_view reply) {
  const auto open = reply.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  const auto body_start = reply.find('\n', open);
  if (body_start == std::string_view::npos) return std::nullopt;
  const auto close = reply.find("```", body_start + 1);
  if (close == std::string_view::npos) return std::nullopt;
  auto body = reply.substr(body_start + 1, close - body_start - 1);
  if (text::is_blank(body)) return std::nullopt;
  return std::string(body);
}

FixAttempt run_zero_shot(ChatClient& client, const RepairTask& task, const AgentDeps& deps) {
  task.validate();
  if (deps.prompts == nullptr) throw Error(Errc::PreconditionViolation, "prompt library missing");
  AgentTranscript tx;
  tx.turns.push_back(ChatTurn::user(deps.prompts->render(
      prompt_names::kZeroShot,
      {{"intent", task.intent}, {"buggy_code", task.buggy_source}, {"test_code", task.test_source}})));
  ChatResult result;
  try {
    result = client.chat(tx.turns, {});
  } catch (const Error& e) {
    tx.terminated_by = Termination::Error;
    tx.error = e.what();
    throw SessionError(e.code(), e.detail(), std::move(tx));
  }
  tx.usage.push_back(result.usage);
  auto code = extract_code_block(result.turn.content);
  tx.turns.push_back(std::move(result.turn));
  if (!code) {
    tx.terminated_by = Termination::StepBudget;
    throw SessionError(Errc::NoFixProduced, "reply has no code block", std::move(tx));
  }
  tx.terminated_by = Termination::ToolTerminal;
  return FixAttempt{CandidateFix{std::move(*code), 1}, std::move(tx)};
}

// --- critic ----------------------------------------------------------------

CriticReview run_critic(ChatClient& client, const std::string& buggy, const CandidateFix& candidate,
                        const std::string& test_source, const RepairTask& task, const AgentDeps& deps,
                        const AgentSettings& settings) {
  if (text::is_blank(candidate.source)) throw Error(Errc::PreconditionViolation, "candidate is empty");
  if (settings.ablation == Ablation::NoCritic) {
    throw Error(Errc::PreconditionViolation, "critic invoked under the no-critic configuration");
  }
  check_deps(deps, settings.ablation);

  std::optional<Verdict> rendered;
  std::vector<Finding> findings;
  std::vector<std::string> violations;
  ToolDispatch dispatch;
  using namespace tool_names;

  dispatch[kCodeCompare] = [&](const nlohmann::json&) {
    auto out = tool_code_compare(buggy, candidate.source);
    findings.push_back({kCodeCompare, out});
    return ToolOutcome{std::move(out)};
  };
  if (uses_search(settings.ablation)) {
    dispatch[kValidateApi] = [&](const nlohmann::json& args) {
      auto out = tool_validate_api(*deps.search, string_arg(args, "symbol"), task, deps.search_limit);
      findings.push_back({kValidateApi, out});
      return ToolOutcome{std::move(out)};
    };
  }
  dispatch[kValidateFormat] = [&](const nlohmann::json&) {
    if (text::is_blank(test_source)) throw Error(Errc::PreconditionViolation, "test source is empty");
    const auto report = check_format(candidate.source, test_source);
    for (const auto& name : report.missing) violations.push_back("missing: " + name);
    auto out = report.render();
    findings.push_back({kValidateFormat, out});
    return ToolOutcome{std::move(out)};
  };
  dispatch[kRenderVerdict] = [&](const nlohmann::json& args) {
    const auto decision = text::to_lower(text::trim(string_arg(args, "decision")));
    if (decision != "accept" && decision != "reject") {
      throw Error(Errc::PreconditionViolation, "decision must be \"accept\" or \"reject\"");
    }
    const auto reasoning = args.is_object() && args.contains("reasoning") && args["reasoning"].is_string()
                               ? args["reasoning"].get<std::string>()
                               : std::string{};
    if (decision == "reject" && text::is_blank(reasoning)) {
      throw Error(Errc::PreconditionViolation, "a rejection needs reasoning");
    }
    rendered = Verdict{decision == "accept" ? Decision::Accept : Decision::Reject, reasoning, {}, false, false};
    return ToolOutcome{"Verdict recorded.", true};
  };

  const auto& prompts = *deps.prompts;
  const auto payload = prompts.render(prompt_names::kCritic,
                                      {{"intent", settings.critic_sees_intent ? task.intent : "(not provided)"},
                                       {"buggy_code", buggy},
                                       {"candidate_code", candidate.source},
                                       {"test_code", test_source}});
  const auto tools = critic_tools(settings.ablation);
  auto tx = react_run(client, prompts.get(prompt_names::kCriticSystem), payload, tools, dispatch,
                      settings.critic_step_budget);

  Verdict verdict;
  if (!rendered) {
    verdict.decision = Decision::Reject;
    verdict.reasoning = std::string(kCriticBudgetExhausted);
  } else {
    verdict = std::move(*rendered);
  }
  verdict.findings = std::move(findings);
  if (verdict.accepted() && !violations.empty()) {
    spdlog::info("format guard: critic accepted a candidate with {} format violation(s)", violations.size());
    verdict.decision = Decision::Reject;
    verdict.overridden = true;
    std::string reason = "The fix does not keep the interface the test file needs: " + join(violations, "; ") + ".";
    if (!text::is_blank(verdict.reasoning)) reason += " Critic notes: " + verdict.reasoning;
    verdict.reasoning = std::move(reason);
  }
  return CriticReview{std::move(verdict), std::move(tx)};
}

}  // namespace agentmend
