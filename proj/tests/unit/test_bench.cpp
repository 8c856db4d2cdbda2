#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "agentmend/bench.hpp"
#include "agentmend/corpus.hpp"
#include "agentmend/error.hpp"
#include "agentmend/process.hpp"
#include "agentmend/text.hpp"
#include "test_support.hpp"

using namespace agentmend;
using namespace agentmend::testing;

namespace {

std::map<std::string, std::string> base_env() {
  const char* path = std::getenv("PATH");
  return {{"PATH", path ? path : "/usr/bin:/bin"}};
}

BenchmarkInstance tiny_instance() {
  BenchmarkInstance inst;
  inst.instance_id = "tiny";
  inst.buggy_source = "x = 1\n";
  inst.gold_source = "x = 2\n";
  inst.intent = "x is two";
  inst.test_source = "import buggy\nassert buggy.x == 2\n";
  inst.readme = "r\n";
  inst.annotated_component = AgentComponent::Tool;
  inst.source_site = "stackoverflow.com";
  return inst;
}

RunnerConfig sh_runner(std::string script, double timeout = 10) {
  RunnerConfig r;
  r.command_template = "sh -c \"" + script + "\"";
  r.timeout = timeout;
  return r;
}

// 12 lines; f spans 6-10 and a Tool region covers 6-10.
const std::string kTwelve =
    "import os\n"         // 1
    "\n"                  // 2
    "CONST = 1\n"         // 3
    "\n"                  // 4
    "\n"                  // 5
    "def f(a):\n"         // 6
    "    b = a\n"         // 7
    "    c = b + 1\n"     // 8
    "    d = c * 2\n"     // 9
    "    return d\n"      // 10
    "\n"                  // 11
    "print(f(1))\n";      // 12

std::string edit_line(const std::string& src, int line, const std::string& text) {
  auto lines = text::split_lines(src);
  lines[line - 1] = text;
  return text::join_lines(lines);
}

BenchmarkInstance twelve_instance(bool with_regions = true) {
  BenchmarkInstance inst = tiny_instance();
  inst.buggy_source = kTwelve;
  inst.gold_source = edit_line(kTwelve, 8, "    c = b + 2");
  if (with_regions) {
    inst.component_regions = std::vector<ComponentRegion>{{{1, 3}, AgentComponent::Memory}, {{6, 10}, AgentComponent::Tool}};
  }
  return inst;
}

BenchRow row(std::string id, bool resolved, bool l, bool f, bool c, int attempts = 1, double cost = 0.1, double t = 1) {
  BenchRow r;
  r.instance_id = std::move(id);
  r.status = resolved ? TestStatus::Resolved : TestStatus::Unresolved;
  r.resolved = resolved;
  r.line_hit = l;
  r.function_hit = f;
  r.component_hit = c;
  r.attempts = attempts;
  r.cost = cost;
  r.time = t;
  return r;
}

}  // namespace

// --- process runner ------------------------------------------------------------

TEST(Process, CapturesOutputAndExitCode) {
  ProcessSpec spec;
  spec.argv = {"sh", "-c", "echo out; echo err >&2; exit 3"};
  spec.env = base_env();
  const auto r = run_process(spec);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_EQ(r.stdout_text, "out\n");
  EXPECT_EQ(r.stderr_text, "err\n");
  EXPECT_FALSE(r.timed_out);
}

TEST(Process, EnvironmentIsExactlyTheSpec) {
  ProcessSpec spec;
  spec.argv = {"sh", "-c", "echo \"$ONLY_THIS:$HOME\""};
  spec.env = base_env();
  spec.env["ONLY_THIS"] = "yes";
  EXPECT_EQ(run_process(spec).stdout_text, "yes:\n");
}

TEST(Process, TimeoutKillsProcessGroup) {
  ProcessSpec spec;
  spec.argv = {"sh", "-c", "sleep 30 & sleep 30"};
  spec.env = base_env();
  spec.timeout = 0.5;
  const auto start = std::chrono::steady_clock::now();
  const auto r = run_process(spec);
  EXPECT_TRUE(r.timed_out);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(5));
}

TEST(Process, SpawnFailure) {
  ProcessSpec spec;
  spec.argv = {"definitely-not-a-command-xyz"};
  spec.env = base_env();
  EXPECT_TRUE(run_process(spec).spawn_failed);
}

TEST(Process, OutputCap) {
  ProcessSpec spec;
  spec.argv = {"sh", "-c", "yes | head -c 100000"};
  spec.env = base_env();
  spec.max_output = 1000;
  const auto r = run_process(spec);
  EXPECT_EQ(r.stdout_text.size(), 1000u);
  EXPECT_EQ(r.exit_code, 0);
}

TEST(Process, SplitCommand) {
  EXPECT_EQ(split_command("sh -c \"cmp -s a b\""), (std::vector<std::string>{"sh", "-c", "cmp -s a b"}));
  EXPECT_EQ(split_command("  a  'b c'  d\"e f\" "), (std::vector<std::string>{"a", "b c", "de f"}));
  EXPECT_EQ(find_executable("sh", base_env()["PATH"]).empty(), false);
  EXPECT_TRUE(find_executable("definitely-not-a-command-xyz", base_env()["PATH"]).empty());
}

// --- run_tests -------------------------------------------------------------------

TEST(RunTests, StubStatuses) {
  const auto inst = tiny_instance();
  EXPECT_EQ(run_tests("x", inst, sh_runner("exit 0")).status, TestStatus::Resolved);
  EXPECT_EQ(run_tests("x", inst, sh_runner("exit 1")).status, TestStatus::Unresolved);
  EXPECT_EQ(run_tests("x", inst, sh_runner("sleep 5", 2)).status, TestStatus::Timeout);
}

TEST(RunTests, CandidateReplacesBuggyInScratchCopy) {
  const auto inst = tiny_instance();
  const auto runner = sh_runner("cmp -s buggy.py fixed.py");
  EXPECT_EQ(run_tests(inst.gold_source, inst, runner).status, TestStatus::Resolved);
  EXPECT_EQ(run_tests(inst.buggy_source, inst, runner).status, TestStatus::Unresolved);
}

TEST(RunTests, PythonInterpreter) {
  const auto inst = tiny_instance();
  RunnerConfig r;
  r.timeout = 30;
  EXPECT_EQ(run_tests(inst.gold_source, inst, r).status, TestStatus::Resolved);
  EXPECT_EQ(run_tests(inst.buggy_source, inst, r).status, TestStatus::Unresolved);
}

TEST(RunTests, InstanceDirIsCopiedWithAuxFiles) {
  TempDir dir;
  const auto inst = tiny_instance();
  write_instance(inst, dir.path());
  text::write_file(dir / "data.txt", "aux");
  EXPECT_EQ(run_tests("x", inst, sh_runner("test -f data.txt"), dir.path()).status, TestStatus::Resolved);
  EXPECT_EQ(text::read_file(dir / "buggy.py"), inst.buggy_source);  // original untouched
}

TEST(RunTests, MissingInstanceDirIsSetupError) {
  try {
    (void)run_tests("x", tiny_instance(), sh_runner("exit 0"), std::filesystem::path("/nonexistent/instance"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SandboxSetupError);
  }
}

TEST(RunTests, ScratchIsRemoved) {
  TempDir root;
  auto runner = sh_runner("exit 0");
  runner.scratch_root = root.path();
  (void)run_tests("x", tiny_instance(), runner);
  EXPECT_TRUE(std::filesystem::is_empty(root.path()));
  runner.keep_scratch = true;
  (void)run_tests("x", tiny_instance(), runner);
  EXPECT_FALSE(std::filesystem::is_empty(root.path()));
}

TEST(RunTests, InterpreterCheck) {
  RunnerConfig r;
  r.interpreter = "no-such-python-xyz";
  EXPECT_THROW(check_interpreter(r), Error);
  r.interpreter = "sh";
  EXPECT_NO_THROW(check_interpreter(r));
}

TEST(RunnerConfig, JsonRoundTrip) {
  RunnerConfig r = sh_runner("exit 0", 12);
  r.extra_env = {{"A", "b"}};
  r.isolate_network = true;
  const nlohmann::json j = r;
  const auto back = j.get<RunnerConfig>();
  EXPECT_EQ(back.command_template, r.command_template);
  EXPECT_EQ(back.timeout, 12);
  EXPECT_EQ(back.extra_env, r.extra_env);
  EXPECT_TRUE(back.isolate_network);
}

// --- localization -----------------------------------------------------------------

TEST(Localization, GoldIsAllHits) {
  const auto inst = twelve_instance();
  const auto rep = score_localization(inst.buggy_source, inst.gold_source, inst.gold_source, inst);
  EXPECT_TRUE(rep.line_hit);
  EXPECT_TRUE(rep.function_hit);
  EXPECT_TRUE(rep.component_hit);
}

TEST(Localization, NoEditIsNoHits) {
  const auto inst = twelve_instance();
  const auto rep = score_localization(inst.buggy_source, inst.buggy_source, inst.gold_source, inst);
  EXPECT_TRUE(rep.predicted_lines.empty());
  EXPECT_FALSE(rep.line_hit || rep.function_hit || rep.component_hit);
}

TEST(Localization, TwelveLineWorkedExample) {
  const auto inst = twelve_instance();
  const auto candidate = edit_line(kTwelve, 9, "    d = c * 3");
  const auto rep = score_localization(inst.buggy_source, candidate, inst.gold_source, inst);
  EXPECT_EQ(rep.gold_lines, (diff::ChangedLineSet{8}));
  EXPECT_EQ(rep.predicted_lines, (diff::ChangedLineSet{9}));
  EXPECT_FALSE(rep.line_hit);
  EXPECT_TRUE(rep.function_hit);
  EXPECT_TRUE(rep.component_hit);
}

TEST(Localization, ModuleScopeAndOtherComponent) {
  const auto inst = twelve_instance();
  const auto candidate = edit_line(kTwelve, 3, "CONST = 2");
  const auto rep = score_localization(inst.buggy_source, candidate, inst.gold_source, inst);
  EXPECT_FALSE(rep.function_hit);
  EXPECT_FALSE(rep.component_hit);
}

TEST(Localization, FallbackWithoutRegions) {
  const auto inst = twelve_instance(false);
  const auto candidate = edit_line(kTwelve, 9, "    d = c * 3");
  const auto rep = score_localization(inst.buggy_source, candidate, inst.gold_source, inst);
  EXPECT_TRUE(rep.component_fallback);
  EXPECT_EQ(rep.component_hit, rep.function_hit);
}

TEST(Localization, MajorityComponent) {
  const std::vector<ComponentRegion> regions{{{1, 2}, AgentComponent::Memory}, {{3, 4}, AgentComponent::Tool},
                                             {{5, 6}, AgentComponent::Reasoning}};
  EXPECT_EQ(majority_component({1, 3, 4}, regions), AgentComponent::Tool);
  EXPECT_EQ(majority_component({1, 5}, regions), AgentComponent::Reasoning);  // tie: enum order
  EXPECT_EQ(majority_component({9, 10}, regions), std::nullopt);
  EXPECT_EQ(majority_component({2, 9, 10}, regions), AgentComponent::Memory);
}

TEST(Localization, LineHitInFunctionImpliesFunctionHit) {
  std::mt19937 rng(5);
  const auto inst = twelve_instance();
  for (int i = 0; i < 200; ++i) {
    std::string cand = kTwelve;
    const int edits = 1 + rng() % 3;
    for (int k = 0; k < edits; ++k) cand = edit_line(cand, 1 + rng() % 12, "# edit " + std::to_string(rng() % 5));
    const auto rep = score_localization(inst.buggy_source, cand, inst.gold_source, inst);
    if (rep.predicted_lines.empty()) EXPECT_FALSE(rep.line_hit || rep.function_hit || rep.component_hit);
    if (rep.line_hit) EXPECT_TRUE(rep.function_hit);  // the gold line 8 is inside f
  }
}

// --- aggregation -------------------------------------------------------------------

TEST(Aggregate, ColumnMeans) {
  const std::vector<BenchRow> rows{row("a", true, true, true, true, 1, 0.2, 10), row("b", false, false, true, true, 3, 0.4, 20)};
  const auto a = aggregate(rows);
  EXPECT_EQ(a.instances, 2u);
  EXPECT_EQ(a.resolved, 1u);
  EXPECT_DOUBLE_EQ(a.repair_rate, 0.5);
  EXPECT_DOUBLE_EQ(a.line_acc, 0.5);
  EXPECT_DOUBLE_EQ(a.fn_acc, 1.0);
  EXPECT_DOUBLE_EQ(a.mean_attempts, 2.0);
  EXPECT_NEAR(a.mean_cost, 0.3, 1e-15);
  EXPECT_DOUBLE_EQ(a.mean_time, 15.0);
  EXPECT_THROW((void)aggregate({}), Error);
}

TEST(Aggregate, ReportJsonRoundTripAndTable) {
  BenchReport r;
  r.label = "none";
  r.rows = {row("a", true, true, true, true), row("b", false, false, false, true, 2)};
  r.rows[1].error = "boom";
  r.aggregates = aggregate(r.rows);
  const nlohmann::json j = r;
  EXPECT_EQ(j["rows"][0]["localization_provenance"], "automated");
  EXPECT_EQ(j.get<BenchReport>(), r);
  const auto table = render_table({r});
  EXPECT_NE(table.find("Config"), std::string::npos);
  EXPECT_NE(table.find("0.5000  0.5000  0.5000  1.0000   1.50"), std::string::npos) << table;
}

TEST(Compare, DeltasAndMismatch) {
  BenchReport base{"none", {row("a", true, true, true, true), row("b", true, true, true, true)}, {}};
  base.aggregates = aggregate(base.rows);
  BenchReport abl{"nfr", {row("a", true, true, true, true), row("b", false, false, true, true, 2)}, {}};
  abl.aggregates = aggregate(abl.rows);
  const auto d = compare_configs(base, abl);
  EXPECT_DOUBLE_EQ(d.repair_rate, 50.0);
  EXPECT_DOUBLE_EQ(d.fn_acc, 0.0);
  EXPECT_DOUBLE_EQ(d.mean_attempts, -0.5);
  const auto zero = compare_configs(base, base);
  EXPECT_EQ(zero.repair_rate, 0.0);
  EXPECT_EQ(zero.mean_time, 0.0);
  BenchReport other{"x", {row("c", true, true, true, true), row("b", true, true, true, true)}, {}};
  other.aggregates = aggregate(other.rows);
  EXPECT_THROW((void)compare_configs(base, other), Error);
}

// --- corpus evaluation ------------------------------------------------------------------

namespace {

struct MiniEnv {
  RuleStore rules = RuleStore::load(fixtures() / "rules");
  std::shared_ptr<SearchClient> search;
  MiniEnv() {
    static RateLimiter unlimited(0);
    search = std::make_shared<SearchClient>(FixtureSearchBackend::load(fixtures() / "mini" / "search.json"), &unlimited);
  }
  AgentDeps deps() {
    AgentDeps d;
    d.rules = &rules;
    d.search = search.get();
    return d;
  }
  static ClientFactory factory(const std::filesystem::path& dir) {
    return [dir](const BenchmarkInstance& inst) {
      return mock_client(MockProvider::load_script(dir / (inst.instance_id + ".json"))).client;
    };
  }
};

}  // namespace

TEST(Evaluate, MiniCorpusEndToEnd) {
  MiniEnv env;
  TempDir runs;
  BenchConfig cfg;
  cfg.runner = sh_runner("cmp -s buggy.py fixed.py");
  cfg.parallelism = 2;
  cfg.gold_sanity = true;
  cfg.run_dir = runs.path();
  const auto report = evaluate_corpus(fixtures() / "mini" / "corpus", MiniEnv::factory(fixtures() / "mini" / "scripts"),
                                      env.deps(), cfg);
  ASSERT_EQ(report.rows.size(), 3u);
  EXPECT_EQ(report.label, "none");
  for (const auto& r : report.rows) {
    EXPECT_FALSE(r.error) << *r.error;
    EXPECT_EQ(r.resolved, r.status == TestStatus::Resolved);
  }
  EXPECT_EQ(report.rows[0].attempts, 1);
  EXPECT_EQ(report.rows[1].attempts, 2);
  EXPECT_EQ(report.rows[2].attempts, 3);
  EXPECT_EQ(report.aggregates.resolved, 3u);
  EXPECT_TRUE(std::filesystem::exists(runs / "mini-2" / "manifest.json"));
  const auto loaded = load_run(runs / "mini-2");
  EXPECT_TRUE(loaded.outcome.verdicts[0].overridden);
  // Leakage: the source-site hits in the fixture never reached the agent.
  for (const auto& entry : env.search->log()) {
    for (const auto& r : entry.results) EXPECT_FALSE(host_matches_domain(host_of(r.url), "discuss.huggingface.co"));
  }
}

TEST(Evaluate, ErrorsBecomeExecutionErrorRows) {
  MiniEnv env;
  BenchConfig cfg;
  cfg.runner = sh_runner("cmp -s buggy.py fixed.py");
  const ClientFactory exhausted = [](const BenchmarkInstance&) { return mock_client({}).client; };
  const auto report = evaluate_corpus(fixtures() / "mini" / "corpus", exhausted, env.deps(), cfg);
  for (const auto& r : report.rows) {
    EXPECT_EQ(r.status, TestStatus::ExecutionError);
    EXPECT_FALSE(r.resolved);
    ASSERT_TRUE(r.error);
    EXPECT_NE(r.error->find("ScriptExhausted"), std::string::npos);
  }
  EXPECT_EQ(report.aggregates.repair_rate, 0.0);
}

TEST(Evaluate, EmptyCorpusAndGoldSanity) {
  MiniEnv env;
  TempDir empty;
  BenchConfig cfg;
  cfg.runner = sh_runner("exit 0");
  try {
    (void)evaluate_corpus(empty.path(), MiniEnv::factory(fixtures()), env.deps(), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyCorpus);
  }
  cfg.runner = sh_runner("exit 1");
  cfg.gold_sanity = true;
  try {
    (void)evaluate_corpus(fixtures() / "mini" / "corpus", MiniEnv::factory(fixtures()), env.deps(), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::GoldSanityFailed);
    EXPECT_NE(e.detail().find("mini-1"), std::string::npos);
  }
}

TEST(Evaluate, ReplayFullConfigurationAggregates) {
  RuleStore rules = RuleStore::load(fixtures() / "rules");
  static RateLimiter unlimited(0);
  SearchClient search(FixtureSearchBackend::load(fixtures() / "replay" / "search.json"), &unlimited);
  AgentDeps deps;
  deps.rules = &rules;
  deps.search = &search;
  BenchConfig cfg;
  cfg.parallelism = 4;
  cfg.runner.timeout = 60;
  const auto pricing = PricingTable::from_json(
      nlohmann::json::parse(std::ifstream(fixtures() / "replay" / "config.json"))["pricing"]);
  const auto price = *pricing.lookup("replay-model");
  const auto dir = fixtures() / "replay" / "transcripts" / "none";
  const ClientFactory factory = [&](const BenchmarkInstance& inst) {
    return mock_client(MockProvider::load_script(dir / (inst.instance_id + ".json")), price).client;
  };
  const auto report = evaluate_corpus(fixtures() / "replay" / "corpus", factory, deps, cfg);
  EXPECT_EQ(report.aggregates.instances, 37u);
  EXPECT_EQ(report.aggregates.resolved, 22u);
  // Recomputing from rows reproduces the aggregates exactly.
  EXPECT_EQ(aggregate(report.rows), report.aggregates);
  for (const auto& r : report.rows) EXPECT_EQ(r.resolved, r.status == TestStatus::Resolved);
}
