#include <gtest/gtest.h>

#include <set>

#include "agentmend/agents.hpp"
#include "agentmend/error.hpp"
#include "agentmend/tools.hpp"
#include "test_support.hpp"

using namespace agentmend;
using namespace agentmend::testing;

namespace {

std::set<std::string> names(const std::vector<ToolSchema>& tools) {
  std::set<std::string> out;
  for (const auto& t : tools) out.insert(t.name);
  return out;
}

RuleStore small_store() {
  RuleStore s;
  s.put({FixPatternId::CV, "Pin the library version that still has the symbol.", 2, {}});
  s.put({FixPatternId::AOO, "Add the missing operation.", 1, {}});
  return s;
}

RateLimiter& unlimited() {
  static RateLimiter r(0);
  return r;
}

std::shared_ptr<SearchClient> fixture_search() {
  return std::make_shared<SearchClient>(std::make_shared<FixtureSearchBackend>(nlohmann::json{
                                            {"openai chat api",
                                             {{{"title", "Leak"}, {"url", "https://stackoverflow.com/q/1"}, {"snippet", "answer"}},
                                              {{"title", "Docs"}, {"url", "https://platform.openai.com/docs"}, {"snippet", "use client.chat"}}}},
                                            {"only leaks", {{{"title", "Leak"}, {"url", "https://meta.stackoverflow.com/q/2"}}}},
                                            {"quota", {{"error", "quota"}}},
                                            {"client.chat documentation",
                                             {{{"title", "Docs"}, {"url", "https://platform.openai.com/docs"}, {"snippet", "client.chat.completions.create"}}}}}),
                                        &unlimited());
}

RepairTask task() {
  return RepairTask{"def run_agent(x):\n    return x\n", "run_agent doubles its input.",
                    "from buggy import run_agent\nassert run_agent(2) == 4\n", "stackoverflow.com"};
}

const std::string kFixed = "def run_agent(x):\n    return 2 * x\n";

struct Env {
  RuleStore rules = small_store();
  std::shared_ptr<SearchClient> search = fixture_search();
  AgentDeps deps() {
    AgentDeps d;
    d.rules = &rules;
    d.search = search.get();
    return d;
  }
};

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return Errc::IoError;
}

ToolDispatch echo_dispatch(bool* finished = nullptr) {
  ToolDispatch d;
  d["echo"] = [](const nlohmann::json& a) { return ToolOutcome{a.dump()}; };
  d["finish"] = [finished](const nlohmann::json&) {
    if (finished) *finished = true;
    return ToolOutcome{"done", true};
  };
  d["boom"] = [](const nlohmann::json&) -> ToolOutcome { throw Error(Errc::QuotaExceeded, "no quota"); };
  return d;
}

std::vector<ToolSchema> echo_tools() {
  return {ToolSchema{"echo", "", {}}, ToolSchema{"finish", "", {}}, ToolSchema{"boom", "", {}}};
}

}  // namespace

// --- toolsets ----------------------------------------------------------------

TEST(Toolsets, FullConfiguration) {
  EXPECT_EQ(names(fix_agent_tools(Ablation::None)),
            (std::set<std::string>{"list_fix_patterns", "fix_pattern_rule", "web_search", "submit_fix_code"}));
  EXPECT_EQ(names(critic_tools(Ablation::None)),
            (std::set<std::string>{"code_compare", "validate_api", "validate_format", "render_verdict"}));
}

TEST(Toolsets, Ablations) {
  EXPECT_EQ(names(fix_agent_tools(Ablation::NoFixRules)), (std::set<std::string>{"web_search", "submit_fix_code"}));
  EXPECT_EQ(names(fix_agent_tools(Ablation::NoWebSearch)),
            (std::set<std::string>{"list_fix_patterns", "fix_pattern_rule", "submit_fix_code"}));
  EXPECT_EQ(names(critic_tools(Ablation::NoWebSearch)),
            (std::set<std::string>{"code_compare", "validate_format", "render_verdict"}));
  EXPECT_EQ(names(critic_tools(Ablation::NoFixRules)), names(critic_tools(Ablation::None)));
  EXPECT_TRUE(critic_tools(Ablation::NoCritic).empty());
  EXPECT_EQ(names(fix_agent_tools(Ablation::NoCritic)), names(fix_agent_tools(Ablation::None)));
}

TEST(Toolsets, AblationNames) {
  for (auto a : {Ablation::None, Ablation::NoFixRules, Ablation::NoWebSearch, Ablation::NoCritic}) {
    EXPECT_EQ(parse_ablation(to_string(a)), a);
  }
  EXPECT_EQ(parse_ablation("full"), Ablation::None);
  EXPECT_FALSE(parse_ablation("xyz"));
}

// --- react engine --------------------------------------------------------------

TEST(React, ThreeToolsThenTerminal) {
  Env env;
  auto m = mock_client({call_reply("list_fix_patterns"), call_reply("fix_pattern_rule", {{"pattern_name", "CV"}}),
                        call_reply("submit_fix_code", {{"code", kFixed}})});
  const auto attempt = run_fix_agent(*m.client, task(), std::nullopt, 1, env.deps(), {});
  EXPECT_EQ(attempt.transcript.invocations.size(), 3u);
  EXPECT_EQ(attempt.transcript.terminated_by, Termination::ToolTerminal);
  EXPECT_EQ(attempt.candidate.source, kFixed);
  EXPECT_EQ(attempt.candidate.produced_at_iteration, 1);
  EXPECT_EQ(attempt.transcript.invocations[1].result, "Pin the library version that still has the symbol.");
  EXPECT_EQ(session_violation(attempt.transcript.turns), std::nullopt);
}

TEST(React, StepBudget) {
  auto m = mock_client({call_reply("echo"), call_reply("echo"), call_reply("echo"), call_reply("echo")});
  const auto tools = echo_tools();
  const auto tx = react_run(*m.client, "s", "u", tools, echo_dispatch(), 4);
  EXPECT_EQ(tx.terminated_by, Termination::StepBudget);
  EXPECT_EQ(tx.chat_calls(), 4u);
  EXPECT_EQ(session_violation(tx.turns), std::nullopt);
}

TEST(React, TextRepliesGetNudged) {
  auto m = mock_client({text_reply("thinking"), call_reply("finish")});
  const auto tools = echo_tools();
  const auto tx = react_run(*m.client, "s", "u", tools, echo_dispatch(), 5);
  EXPECT_EQ(tx.terminated_by, Termination::ToolTerminal);
  EXPECT_EQ(tx.turns[3].role, Role::User);
}

TEST(React, ThirdUnknownToolIsFatal) {
  auto m = mock_client({call_reply("nope"), call_reply("nope"), call_reply("nope"), call_reply("finish")});
  const auto tools = echo_tools();
  try {
    (void)react_run(*m.client, "s", "u", tools, echo_dispatch(), 10);
    FAIL();
  } catch (const SessionError& e) {
    EXPECT_EQ(e.code(), Errc::UnknownTool);
    EXPECT_EQ(e.transcript().invocations.size(), 3u);
    EXPECT_TRUE(e.transcript().invocations[0].is_error);
    EXPECT_EQ(e.transcript().terminated_by, Termination::Error);
    EXPECT_EQ(session_violation(e.transcript().turns), std::nullopt);
  }
}

TEST(React, HandlerErrorIsFedBack) {
  auto m = mock_client({call_reply("boom"), call_reply("finish")});
  const auto tools = echo_tools();
  const auto tx = react_run(*m.client, "s", "u", tools, echo_dispatch(), 5);
  EXPECT_TRUE(tx.invocations[0].is_error);
  EXPECT_EQ(tx.invocations[0].result.rfind("error: QuotaExceeded", 0), 0u) << tx.invocations[0].result;
  EXPECT_EQ(tx.terminated_by, Termination::ToolTerminal);
}

TEST(React, CallsAfterTerminalAreIgnored) {
  auto m = mock_client({call_reply({{"finish", {}}, {"echo", {{"a", 1}}}})});
  const auto tools = echo_tools();
  const auto tx = react_run(*m.client, "s", "u", tools, echo_dispatch(), 5);
  ASSERT_EQ(tx.invocations.size(), 2u);
  EXPECT_TRUE(tx.invocations[1].is_error);
  EXPECT_EQ(session_violation(tx.turns), std::nullopt);
}

TEST(React, ProviderErrorCarriesTranscript) {
  auto m = mock_client({call_reply("echo"), error_reply("refusal")});
  const auto tools = echo_tools();
  try {
    (void)react_run(*m.client, "s", "u", tools, echo_dispatch(), 5);
    FAIL();
  } catch (const SessionError& e) {
    EXPECT_EQ(e.code(), Errc::ProviderRefusal);
    EXPECT_EQ(e.transcript().invocations.size(), 1u);
  }
}

TEST(React, Preconditions) {
  auto m = mock_client({});
  const auto tools = echo_tools();
  EXPECT_EQ(code_of([&] { (void)react_run(*m.client, "s", "u", tools, echo_dispatch(), 0); }),
            Errc::PreconditionViolation);
  auto partial = echo_dispatch();
  partial.erase("boom");
  EXPECT_EQ(code_of([&] { (void)react_run(*m.client, "s", "u", tools, partial, 3); }), Errc::PreconditionViolation);
}

TEST(React, TranscriptJsonRoundTrip) {
  auto m = mock_client({call_reply("echo", {{"x", 1}}), call_reply("finish")});
  const auto tools = echo_tools();
  const auto tx = react_run(*m.client, "s", "u", tools, echo_dispatch(), 5);
  const nlohmann::json j = tx;
  EXPECT_EQ(j.get<AgentTranscript>(), tx);
}

// --- individual tools ------------------------------------------------------------

TEST(Tools, ListFixPatterns) {
  EXPECT_EQ(tool_list_fix_patterns(RuleStore::load(fixtures() / "rules")).size(), 23u);
  EXPECT_EQ(tool_list_fix_patterns(small_store()),
            (std::vector<std::string>{"Change Version", "Addition of Operations"}));
  EXPECT_EQ(code_of([] { (void)tool_list_fix_patterns(RuleStore{}); }), Errc::StoreEmpty);
}

TEST(Tools, FixPatternRule) {
  const auto s = small_store();
  EXPECT_EQ(tool_fix_pattern_rule(s, "Change Version"), s.find(FixPatternId::CV)->rule_text);
  EXPECT_EQ(tool_fix_pattern_rule(s, "cv"), s.find(FixPatternId::CV)->rule_text);
  EXPECT_EQ(code_of([&] { (void)tool_fix_pattern_rule(s, "Retrain Model"); }), Errc::UnknownPattern);
  EXPECT_EQ(code_of([&] { (void)tool_fix_pattern_rule(s, "Fix Syntax"); }), Errc::RuleMissing);
}

TEST(Tools, WebSearchExcludesSourceSite) {
  auto search = fixture_search();
  const auto out = tool_web_search(*search, "openai chat api", task());
  EXPECT_EQ(out, "1. Docs — https://platform.openai.com/docs: use client.chat\n");
  EXPECT_EQ(tool_web_search(*search, "only leaks", task()), "NO RESULTS");
  EXPECT_EQ(code_of([&] { (void)tool_web_search(*search, "quota", task()); }), Errc::QuotaExceeded);
}

TEST(Tools, CodeCompare) {
  EXPECT_EQ(tool_code_compare("a\n", "a\n"), "NO CHANGES");
  const auto diff = tool_code_compare("a\nb\n", "a\nB\n");
  EXPECT_NE(diff.find("@@ -1,2 +1,2 @@"), std::string::npos);
  EXPECT_NE(tool_code_compare("if x:\n    y\n", "if x:\n  y\n"), "NO CHANGES");
}

TEST(Tools, ValidateApi) {
  auto search = fixture_search();
  const auto out = tool_validate_api(*search, "client.chat", task());
  EXPECT_NE(out.find("client.chat.completions.create"), std::string::npos);
  EXPECT_EQ(tool_validate_api(*search, "unknown_symbol", task()), "NO EVIDENCE FOUND");
  EXPECT_EQ(code_of([&] { (void)tool_validate_api(*search, " ", task()); }), Errc::PreconditionViolation);
}

TEST(Tools, ValidateFormatExamples) {
  const std::string test = "from buggy import run_agent\nrun_agent()\n";
  EXPECT_EQ(tool_validate_format("def run_agent():\n    pass\n", test), "PASS");
  EXPECT_EQ(tool_validate_format("def main():\n    pass\n", test), "missing: run_agent\n");
  EXPECT_EQ(tool_validate_format("def main():\n    pass\n", "print(1)\n"), "PASS\nnote: no contract detected");
  EXPECT_THROW((void)tool_validate_format("", test), Error);
}

TEST(Tools, ValidateFormatContractForms) {
  const std::string test =
      "import buggy as m\n"
      "from buggy import (\n"
      "    Agent,\n"
      "    CONFIG as cfg,  # aliased\n"
      ")\n"
      "m.build()\n"
      "m.LIMIT\n";
  const std::string ok =
      "import os\n"
      "LIMIT: int = 3\n"
      "CONFIG = {}\n"
      "class Agent:\n"
      "    pass\n"
      "async def build():\n"
      "    pass\n";
  const auto good = check_format(ok, test);
  EXPECT_TRUE(good.ok()) << good.render();
  EXPECT_EQ(std::set<std::string>(good.referenced.begin(), good.referenced.end()),
            (std::set<std::string>{"Agent", "CONFIG", "build", "LIMIT"}));
  const auto bad = check_format("def build():\n    LIMIT = 3\n", test);
  EXPECT_EQ(std::set<std::string>(bad.missing.begin(), bad.missing.end()),
            (std::set<std::string>{"Agent", "CONFIG", "LIMIT"}));
}

TEST(Tools, ValidateFormatTupleAndImportedNames) {
  const std::string test = "from buggy import a, b, OpenAI\n";
  EXPECT_TRUE(check_format("a, b = 1, 2\nfrom openai import OpenAI\n", test).ok());
}

// --- fix agent -----------------------------------------------------------------

TEST(FixAgent, FeedbackIsInPayload) {
  Env env;
  auto m = mock_client({call_reply("submit_fix_code", {{"code", kFixed}})});
  const auto attempt = run_fix_agent(*m.client, task(), std::string("API renamed in v0.2"), 2, env.deps(), {});
  EXPECT_EQ(attempt.candidate.produced_at_iteration, 2);
  EXPECT_NE(attempt.transcript.turns[1].content.find("API renamed in v0.2"), std::string::npos);
  auto m2 = mock_client({call_reply("submit_fix_code", {{"code", kFixed}})});
  const auto first = run_fix_agent(*m2.client, task(), std::nullopt, 1, env.deps(), {});
  EXPECT_NE(first.transcript.turns[1].content.find("first attempt"), std::string::npos);
}

TEST(FixAgent, NoSubmissionIsNoFixProduced) {
  Env env;
  AgentSettings s;
  s.fix_step_budget = 2;
  auto m = mock_client({call_reply("list_fix_patterns"), call_reply("list_fix_patterns")});
  try {
    (void)run_fix_agent(*m.client, task(), std::nullopt, 1, env.deps(), s);
    FAIL();
  } catch (const SessionError& e) {
    EXPECT_EQ(e.code(), Errc::NoFixProduced);
    EXPECT_EQ(e.transcript().terminated_by, Termination::StepBudget);
  }
}

TEST(FixAgent, EmptySubmissionIsRejectedThenRetried) {
  Env env;
  auto m = mock_client({call_reply("submit_fix_code", {{"code", "  "}}), call_reply("submit_fix_code", {{"code", kFixed}})});
  const auto attempt = run_fix_agent(*m.client, task(), std::nullopt, 1, env.deps(), {});
  EXPECT_EQ(attempt.transcript.invocations[0].result.rfind("error: EmptyCode", 0), 0u);
  EXPECT_EQ(attempt.candidate.source, kFixed);
}

TEST(FixAgent, AblatedToolsAreOffered) {
  Env env;
  AgentSettings s;
  s.ablation = Ablation::NoFixRules;
  AgentDeps deps = env.deps();
  deps.rules = nullptr;
  auto m = mock_client({call_reply("submit_fix_code", {{"code", kFixed}})});
  (void)run_fix_agent(*m.client, task(), std::nullopt, 1, deps, s);
  EXPECT_EQ(m.provider->offered_tools().at(0), (std::vector<std::string>{"web_search", "submit_fix_code"}));
  deps.search = nullptr;
  EXPECT_EQ(code_of([&] { (void)run_fix_agent(*m.client, task(), std::nullopt, 1, deps, s); }),
            Errc::PreconditionViolation);
}

TEST(FixAgent, SearchNeverLeaksSourceSite) {
  Env env;
  auto m = mock_client({call_reply("web_search", {{"query", "openai chat api"}}),
                        call_reply("web_search", {{"query", "only leaks"}}),
                        call_reply("submit_fix_code", {{"code", kFixed}})});
  (void)run_fix_agent(*m.client, task(), std::nullopt, 1, env.deps(), {});
  const auto log = env.search->log();
  ASSERT_EQ(log.size(), 2u);
  for (const auto& entry : log) {
    EXPECT_TRUE(entry.exclude.contains("stackoverflow.com"));
    for (const auto& r : entry.results) EXPECT_FALSE(host_matches_domain(host_of(r.url), "stackoverflow.com"));
  }
}

TEST(ZeroShot, ExtractsCodeBlock) {
  Env env;
  auto m = mock_client({text_reply("Here:\n```python\n" + kFixed + "```\nDone.")});
  const auto a = run_zero_shot(*m.client, task(), env.deps());
  EXPECT_EQ(a.candidate.source, kFixed);
  auto m2 = mock_client({text_reply("no code")});
  EXPECT_EQ(code_of([&] { (void)run_zero_shot(*m2.client, task(), env.deps()); }), Errc::NoFixProduced);
  EXPECT_FALSE(extract_code_block("```\n```"));
}

// --- critic ----------------------------------------------------------------------

TEST(Critic, ScriptedAccept) {
  Env env;
  auto m = mock_client({call_reply({{"code_compare", {}}, {"validate_format", {}}}),
                        call_reply("render_verdict", {{"decision", "accept"}, {"reasoning", "ok"}})});
  const auto t = task();
  const auto review = run_critic(*m.client, t.buggy_source, {kFixed, 1}, t.test_source, t, env.deps(), {});
  EXPECT_TRUE(review.verdict.accepted());
  ASSERT_EQ(review.verdict.findings.size(), 2u);
  EXPECT_EQ(review.verdict.findings[0].tool, "code_compare");
  EXPECT_EQ(review.verdict.findings[1].text, "PASS");
}

TEST(Critic, ScriptedRejectKeepsReasoning) {
  Env env;
  auto m = mock_client({call_reply("render_verdict", {{"decision", "reject"}, {"reasoning", "API renamed in v0.2"}})});
  const auto t = task();
  const auto review = run_critic(*m.client, t.buggy_source, {kFixed, 1}, t.test_source, t, env.deps(), {});
  EXPECT_FALSE(review.verdict.accepted());
  EXPECT_EQ(review.verdict.reasoning, "API renamed in v0.2");
  EXPECT_FALSE(review.verdict.overridden);
}

TEST(Critic, FormatGuardOverridesAccept) {
  Env env;
  auto m = mock_client({call_reply("validate_format"),
                        call_reply("render_verdict", {{"decision", "accept"}, {"reasoning", "looks right"}})});
  const auto t = task();
  const auto review =
      run_critic(*m.client, t.buggy_source, {"def main(x):\n    return 2 * x\n", 1}, t.test_source, t, env.deps(), {});
  EXPECT_FALSE(review.verdict.accepted());
  EXPECT_TRUE(review.verdict.overridden);
  EXPECT_NE(review.verdict.reasoning.find("missing: run_agent"), std::string::npos);
  ASSERT_EQ(review.verdict.findings.size(), 1u);
  EXPECT_EQ(review.verdict.findings[0].text, "missing: run_agent\n");
}

TEST(Critic, BudgetExhaustedIsReject) {
  Env env;
  AgentSettings s;
  s.critic_step_budget = 1;
  auto m = mock_client({call_reply("code_compare")});
  const auto t = task();
  const auto review = run_critic(*m.client, t.buggy_source, {kFixed, 1}, t.test_source, t, env.deps(), s);
  EXPECT_FALSE(review.verdict.accepted());
  EXPECT_EQ(review.verdict.reasoning, kCriticBudgetExhausted);
}

TEST(Critic, InvalidVerdictIsFedBack) {
  Env env;
  auto m = mock_client({call_reply("render_verdict", {{"decision", "maybe"}}),
                        call_reply("render_verdict", {{"decision", "reject"}}),
                        call_reply("render_verdict", {{"decision", "Accept"}, {"reasoning", ""}})});
  const auto t = task();
  const auto review = run_critic(*m.client, t.buggy_source, {kFixed, 1}, t.test_source, t, env.deps(), {});
  EXPECT_TRUE(review.verdict.accepted());
  EXPECT_TRUE(review.transcript.invocations[0].is_error);
  EXPECT_TRUE(review.transcript.invocations[1].is_error);
}

TEST(Critic, IntentToggle) {
  Env env;
  AgentSettings s;
  s.critic_sees_intent = false;
  auto m = mock_client({call_reply("render_verdict", {{"decision", "accept"}, {"reasoning", ""}})});
  const auto t = task();
  (void)run_critic(*m.client, t.buggy_source, {kFixed, 1}, t.test_source, t, env.deps(), s);
  EXPECT_EQ(m.provider->requests()[0][1].content.find(t.intent), std::string::npos);
}

TEST(Critic, RefusedUnderNoCritic) {
  Env env;
  AgentSettings s;
  s.ablation = Ablation::NoCritic;
  auto m = mock_client({});
  const auto t = task();
  EXPECT_EQ(code_of([&] { (void)run_critic(*m.client, t.buggy_source, {kFixed, 1}, t.test_source, t, env.deps(), s); }),
            Errc::PreconditionViolation);
}

TEST(VerdictJson, RoundTrip) {
  Verdict v{Decision::Reject, "r", {{"code_compare", "diff"}}, false, true};
  const nlohmann::json j = v;
  EXPECT_EQ(j.get<Verdict>(), v);
  EXPECT_THROW((void)(nlohmann::json{{"decision", "maybe"}}.get<Verdict>()), Error);
}
