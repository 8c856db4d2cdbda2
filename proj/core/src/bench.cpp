#include "agentmend/bench.hpp"

#include <atomic>
#include <cctype>
#include <cstdlib>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "agentmend/corpus.hpp"
#include "agentmend/process.hpp"
#include "agentmend/text.hpp"

namespace agentmend {

// --- runner config ---------------------------------------------------------

void to_json(nlohmann::json& j, const RunnerConfig& r) {
  j = nlohmann::json{{"command_template", r.command_template}, {"interpreter", r.interpreter},
                     {"timeout", r.timeout},                   {"env_allowlist", r.env_allowlist},
                     {"extra_env", r.extra_env},               {"isolate_network", r.isolate_network},
                     {"scratch_root", r.scratch_root.string()}, {"keep_scratch", r.keep_scratch}};
}

void from_json(const nlohmann::json& j, RunnerConfig& r) {
  const RunnerConfig d;
  r.command_template = j.value("command_template", d.command_template);
  r.interpreter = j.value("interpreter", d.interpreter);
  r.timeout = j.value("timeout", d.timeout);
  r.env_allowlist = j.value("env_allowlist", d.env_allowlist);
  r.extra_env = j.value("extra_env", d.extra_env);
  r.isolate_network = j.value("isolate_network", d.isolate_network);
  r.scratch_root = j.value("scratch_root", std::string{});
  r.keep_scratch = j.value("keep_scratch", d.keep_scratch);
  if (r.timeout <= 0) throw Error(Errc::ConfigInvalid, "runner timeout must be positive");
}

std::string_view to_string(TestStatus s) noexcept {
  switch (s) {
    case TestStatus::Resolved: return "resolved";
    case TestStatus::Unresolved: return "unresolved";
    case TestStatus::ExecutionError: return "execution_error";
    case TestStatus::Timeout: return "timeout";
  }
  return "execution_error";
}

std::optional<TestStatus> parse_test_status(std::string_view s) noexcept {
  for (auto st : {TestStatus::Resolved, TestStatus::Unresolved, TestStatus::ExecutionError, TestStatus::Timeout}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

// --- run_tests -------------------------------------------------------------

namespace {

std::map<std::string, std::string> child_env(const RunnerConfig& runner) {
  std::map<std::string, std::string> env;
  for (const auto& name : runner.env_allowlist) {
    if (const char* v = std::getenv(name.c_str())) env[name] = v;
  }
  for (const auto& [k, v] : runner.extra_env) env[k] = v;
  if (!env.contains("PATH")) env["PATH"] = "/usr/local/bin:/usr/bin:/bin";
  return env;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

class ScratchDir {
 public:
  ScratchDir(const std::filesystem::path& root, const std::string& id, bool keep) : keep_(keep) {
    std::error_code ec;
    auto base = root.empty() ? std::filesystem::temp_directory_path(ec) : root;
    std::filesystem::create_directories(base, ec);
    std::string safe;
    for (char c : id) safe += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
    auto tmpl = (base / ("agentmend-" + safe + "-XXXXXX")).string();
    if (::mkdtemp(tmpl.data()) == nullptr) {
      throw Error(Errc::SandboxSetupError, "cannot create scratch directory under " + base.string());
    }
    path_ = tmpl;
  }
  ~ScratchDir() {
    if (keep_) return;
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  bool keep_;
};

}  // namespace

void check_interpreter(const RunnerConfig& runner) {
  if (runner.command_template.find("{interpreter}") == std::string::npos) return;
  const auto env = child_env(runner);
  if (find_executable(runner.interpreter, env.at("PATH")).empty()) {
    throw Error(Errc::SandboxSetupError, "interpreter not found on PATH: " + runner.interpreter);
  }
}

TestResult run_tests(const std::string& candidate, const BenchmarkInstance& instance, const RunnerConfig& runner,
                     const std::optional<std::filesystem::path>& instance_dir) {
  ScratchDir scratch(runner.scratch_root, instance.instance_id, runner.keep_scratch);
  try {
    if (instance_dir) {
      std::filesystem::copy(*instance_dir, scratch.path(),
                            std::filesystem::copy_options::recursive | std::filesystem::copy_options::overwrite_existing);
    } else {
      write_instance(instance, scratch.path());
    }
    text::write_file(scratch.path() / instance_files::kBuggy, candidate);
  } catch (const std::filesystem::filesystem_error& e) {
    throw Error(Errc::SandboxSetupError, e.what());
  } catch (const Error& e) {
    throw Error(Errc::SandboxSetupError, e.what());
  }

  ProcessSpec spec;
  if (runner.isolate_network) spec.argv = {"unshare", "-rn"};
  for (auto word : split_command(runner.command_template)) {
    word = replace_all(std::move(word), "{interpreter}", runner.interpreter);
    word = replace_all(std::move(word), "{test_file}", instance_files::kTest);
    word = replace_all(std::move(word), "{instance_dir}", scratch.path().string());
    spec.argv.push_back(std::move(word));
  }
  spec.cwd = scratch.path();
  spec.env = child_env(runner);
  spec.timeout = runner.timeout;

  const auto proc = run_process(spec);
  TestResult result;
  result.exit_code = proc.exit_code;
  result.stdout_text = proc.stdout_text;
  result.stderr_text = proc.stderr_text;
  result.duration = proc.duration;
  if (proc.spawn_failed) {
    result.status = TestStatus::ExecutionError;
  } else if (proc.timed_out) {
    result.status = TestStatus::Timeout;
  } else if (proc.signal != 0) {
    result.status = TestStatus::ExecutionError;
  } else {
    result.status = proc.exit_code == 0 ? TestStatus::Resolved : TestStatus::Unresolved;
  }
  return result;
}

// --- localization ----------------------------------------------------------

std::optional<AgentComponent> majority_component(const diff::ChangedLineSet& lines,
                                                 const std::vector<ComponentRegion>& regions) {
  std::map<AgentComponent, int> votes;
  for (int line : lines) {
    for (const auto& r : regions) {
      if (r.lines.contains(line)) {
        ++votes[r.component];
        break;
      }
    }
  }
  std::optional<AgentComponent> best;
  int best_votes = 0;
  for (const auto c : kAllComponents) {
    const auto it = votes.find(c);
    if (it != votes.end() && it->second > best_votes) {
      best = c;
      best_votes = it->second;
    }
  }
  return best;
}

LocalizationReport score_localization(const std::string& buggy, const std::string& candidate, const std::string& gold,
                                      const BenchmarkInstance& instance) {
  LocalizationReport rep;
  rep.predicted_lines = diff::changed_lines(buggy, candidate);
  rep.gold_lines = diff::changed_lines(buggy, gold);
  const bool has_regions = instance.component_regions && !instance.component_regions->empty();
  rep.component_fallback = !has_regions;
  if (rep.predicted_lines.empty()) return rep;

  for (int line : rep.predicted_lines) {
    if (rep.gold_lines.contains(line)) {
      rep.line_hit = true;
      break;
    }
  }

  const auto fmap = diff::function_map(buggy);
  std::set<std::string_view> gold_fns;
  for (int line : rep.gold_lines) gold_fns.insert(fmap.name_at(line));
  for (int line : rep.predicted_lines) {
    if (gold_fns.contains(fmap.name_at(line))) {
      rep.function_hit = true;
      break;
    }
  }

  if (has_regions) {
    rep.component_hit = majority_component(rep.predicted_lines, *instance.component_regions) ==
                        std::optional(instance.annotated_component);
  } else {
    rep.component_hit = rep.function_hit;
  }
  return rep;
}

// --- reports ---------------------------------------------------------------

BenchAggregates aggregate(const std::vector<BenchRow>& rows) {
  if (rows.empty()) throw Error(Errc::EmptyInput, "no rows to aggregate");
  BenchAggregates a;
  a.instances = rows.size();
  double line = 0, fn = 0, comp = 0, attempts = 0, cost = 0, time = 0;
  for (const auto& r : rows) {
    a.resolved += r.resolved ? 1 : 0;
    line += r.line_hit ? 1 : 0;
    fn += r.function_hit ? 1 : 0;
    comp += r.component_hit ? 1 : 0;
    attempts += r.attempts;
    cost += r.cost;
    time += r.time;
  }
  const auto n = static_cast<double>(rows.size());
  a.repair_rate = static_cast<double>(a.resolved) / n;
  a.line_acc = line / n;
  a.fn_acc = fn / n;
  a.comp_acc = comp / n;
  a.mean_attempts = attempts / n;
  a.mean_cost = cost / n;
  a.mean_time = time / n;
  return a;
}

void to_json(nlohmann::json& j, const BenchRow& r) {
  j = nlohmann::json{{"instance_id", r.instance_id},
                     {"status", to_string(r.status)},
                     {"resolved", r.resolved},
                     {"line_hit", r.line_hit},
                     {"function_hit", r.function_hit},
                     {"component_hit", r.component_hit},
                     {"component_fallback", r.component_fallback},
                     {"localization_provenance", "automated"},
                     {"attempts", r.attempts},
                     {"cost", r.cost},
                     {"time", r.time}};
  j["error"] = r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, BenchRow& r) {
  r.instance_id = j.at("instance_id").get<std::string>();
  const auto status = parse_test_status(j.at("status").get<std::string>());
  if (!status) throw Error(Errc::ManifestInvalid, "row status " + j.at("status").dump());
  r.status = *status;
  r.resolved = j.at("resolved").get<bool>();
  r.line_hit = j.at("line_hit").get<bool>();
  r.function_hit = j.at("function_hit").get<bool>();
  r.component_hit = j.at("component_hit").get<bool>();
  r.component_fallback = j.value("component_fallback", false);
  r.attempts = j.at("attempts").get<int>();
  r.cost = j.value("cost", 0.0);
  r.time = j.value("time", 0.0);
  r.error = j.contains("error") && !j["error"].is_null() ? std::optional(j["error"].get<std::string>()) : std::nullopt;
}

void to_json(nlohmann::json& j, const BenchAggregates& a) {
  j = nlohmann::json{{"instances", a.instances},         {"resolved", a.resolved},   {"repair_rate", a.repair_rate},
                     {"line_acc", a.line_acc},           {"fn_acc", a.fn_acc},       {"comp_acc", a.comp_acc},
                     {"mean_attempts", a.mean_attempts}, {"mean_cost", a.mean_cost}, {"mean_time", a.mean_time}};
}

void from_json(const nlohmann::json& j, BenchAggregates& a) {
  a.instances = j.at("instances").get<std::size_t>();
  a.resolved = j.at("resolved").get<std::size_t>();
  a.repair_rate = j.at("repair_rate").get<double>();
  a.line_acc = j.at("line_acc").get<double>();
  a.fn_acc = j.at("fn_acc").get<double>();
  a.comp_acc = j.at("comp_acc").get<double>();
  a.mean_attempts = j.at("mean_attempts").get<double>();
  a.mean_cost = j.at("mean_cost").get<double>();
  a.mean_time = j.at("mean_time").get<double>();
}

void to_json(nlohmann::json& j, const BenchReport& r) {
  j = nlohmann::json{{"label", r.label}, {"rows", r.rows}, {"aggregates", r.aggregates}};
}

void from_json(const nlohmann::json& j, BenchReport& r) {
  r.label = j.value("label", std::string{});
  r.rows = j.at("rows").get<std::vector<BenchRow>>();
  r.aggregates = j.at("aggregates").get<BenchAggregates>();
}

std::string render_table(const std::vector<BenchReport>& reports) {
  std::string out = fmt::format("{:<10} {:>7} {:>7} {:>7} {:>7} {:>6} {:>9} {:>9}\n", "Config", "RP", "LI", "FN", "CP",
                                "Attmp", "Cost", "Time");
  for (const auto& r : reports) {
    const auto& a = r.aggregates;
    out += fmt::format("{:<10} {:>7.4f} {:>7.4f} {:>7.4f} {:>7.4f} {:>6.2f} {:>9.4f} {:>9.2f}\n",
                       r.label.empty() ? "-" : r.label, a.repair_rate, a.line_acc, a.fn_acc, a.comp_acc,
                       a.mean_attempts, a.mean_cost, a.mean_time);
  }
  return out;
}

void to_json(nlohmann::json& j, const DeltaReport& d) {
  j = nlohmann::json{{"repair_rate_pts", d.repair_rate}, {"line_acc_pts", d.line_acc},
                     {"fn_acc_pts", d.fn_acc},           {"comp_acc_pts", d.comp_acc},
                     {"mean_attempts", d.mean_attempts}, {"mean_cost", d.mean_cost},
                     {"mean_time", d.mean_time}};
}

DeltaReport compare_configs(const BenchReport& base, const BenchReport& ablated) {
  std::set<std::string> a, b;
  for (const auto& r : base.rows) a.insert(r.instance_id);
  for (const auto& r : ablated.rows) b.insert(r.instance_id);
  if (a != b || a.size() != base.rows.size() || b.size() != ablated.rows.size()) {
    throw Error(Errc::CorpusMismatch, "reports cover different instance sets");
  }
  const auto& x = base.aggregates;
  const auto& y = ablated.aggregates;
  DeltaReport d;
  d.repair_rate = 100.0 * (x.repair_rate - y.repair_rate);
  d.line_acc = 100.0 * (x.line_acc - y.line_acc);
  d.fn_acc = 100.0 * (x.fn_acc - y.fn_acc);
  d.comp_acc = 100.0 * (x.comp_acc - y.comp_acc);
  d.mean_attempts = x.mean_attempts - y.mean_attempts;
  d.mean_cost = x.mean_cost - y.mean_cost;
  d.mean_time = x.mean_time - y.mean_time;
  return d;
}

// --- corpus evaluation -----------------------------------------------------

namespace {

BenchRow evaluate_one(const LoadedInstance& li, const ClientFactory& clients, const AgentDeps& deps,
                      const BenchConfig& config) {
  const auto& inst = li.instance;
  BenchRow row;
  row.instance_id = inst.instance_id;
  auto meta = config.run_metadata;
  meta.instance_id = inst.instance_id;
  auto persist = [&](const RepairOutcome& outcome) {
    if (!config.run_dir) return;
    try {
      persist_run(outcome, *config.run_dir / inst.instance_id, meta);
    } catch (const Error& e) {
      spdlog::error("{}: could not persist run: {}", inst.instance_id, e.what());
    }
  };

  RepairOutcome outcome;
  try {
    auto client = clients(inst);
    outcome = repair(*client, RepairTask::from_instance(inst), deps, config.repair);
  } catch (const RepairFailure& e) {
    persist(e.partial());
    row.error = e.what();
    row.attempts = e.partial().attempts;
    row.cost = e.partial().usage.cost;
    row.time = e.partial().wall_time;
    spdlog::warn("{}: {}", inst.instance_id, e.what());
    return row;
  } catch (const Error& e) {
    row.error = e.what();
    spdlog::warn("{}: {}", inst.instance_id, e.what());
    return row;
  }
  persist(outcome);

  row.attempts = outcome.attempts;
  row.cost = outcome.usage.cost;
  row.time = outcome.wall_time;
  try {
    const auto test = run_tests(outcome.final_candidate.source, inst, config.runner, li.dir);
    row.status = test.status;
    row.resolved = test.status == TestStatus::Resolved;
  } catch (const Error& e) {
    row.status = TestStatus::ExecutionError;
    row.error = e.what();
  }
  const auto loc = score_localization(inst.buggy_source, outcome.final_candidate.source, inst.gold_source, inst);
  row.line_hit = loc.line_hit;
  row.function_hit = loc.function_hit;
  row.component_hit = loc.component_hit;
  row.component_fallback = loc.component_fallback;
  return row;
}

}  // namespace

BenchReport evaluate_corpus(const std::filesystem::path& corpus_dir, const ClientFactory& clients,
                            const AgentDeps& deps, const BenchConfig& config) {
  const auto corpus = load_corpus(corpus_dir);
  if (corpus.empty()) throw Error(Errc::EmptyCorpus, corpus_dir.string());
  check_interpreter(config.runner);

  if (config.gold_sanity) {
    std::vector<std::string> failing;
    for (const auto& li : corpus) {
      const auto r = run_tests(li.instance.gold_source, li.instance, config.runner, li.dir);
      if (r.status != TestStatus::Resolved) failing.push_back(li.instance.instance_id);
    }
    if (!failing.empty()) {
      std::string ids;
      for (const auto& id : failing) ids += (ids.empty() ? "" : ", ") + id;
      throw Error(Errc::GoldSanityFailed, ids);
    }
  }

  std::vector<BenchRow> rows(corpus.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto i = next++; i < corpus.size(); i = next++) rows[i] = evaluate_one(corpus[i], clients, deps, config);
  };
  const auto threads = std::max<std::size_t>(1, std::min(config.parallelism, corpus.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  BenchReport report;
  report.label = config.repair.zero_shot ? "zero-shot" : std::string(to_string(config.repair.agents.ablation));
  report.rows = std::move(rows);
  report.aggregates = aggregate(report.rows);
  return report;
}

}  // namespace agentmend
