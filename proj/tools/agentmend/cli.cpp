#include "agentmend/cli.hpp"

#include <chrono>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "agentmend/analytics.hpp"
#include "agentmend/bench.hpp"
#include "agentmend/config.hpp"
#include "agentmend/corpus.hpp"
#include "agentmend/diff.hpp"
#include "agentmend/error.hpp"
#include "agentmend/openai_provider.hpp"
#include "agentmend/orchestrator.hpp"
#include "agentmend/rulegen.hpp"
#include "agentmend/text.hpp"

namespace agentmend::cli {

namespace {

// Flags shared by every subcommand.
struct Common {
  std::string config_path;
  bool json = false;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON configuration file");
  cmd->add_flag("--json", c.json, "Print JSON only");
  cmd->add_flag("-v,--verbose", c.verbose, "Debug logging");
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::MissingFile:
    case Errc::ManifestInvalid:
    case Errc::ComponentUnknown:
    case Errc::EmptyCorpus:
    case Errc::CorpusMismatch:
    case Errc::ConfigInvalid:
    case Errc::IoError:
    case Errc::PreconditionViolation:
    case Errc::LengthMismatch:
    case Errc::EmptyInput:
    case Errc::SandboxSetupError:
    case Errc::GoldSanityFailed:
      return kExitUsage;
    default:
      return kExitDomainFailure;
  }
}

std::string run_id_now() {
  const auto now = std::chrono::system_clock::now();
  auto ts = format_timestamp(std::chrono::time_point_cast<std::chrono::seconds>(now));
  std::string id;
  for (char c : ts) {
    if (c != '-' && c != ':') id += c;
  }
  return id;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty() || !std::filesystem::exists(path)) throw Error(Errc::MissingFile, std::string(what) + " " + path);
}

// --- wiring ----------------------------------------------------------------

struct Wiring {
  GlobalConfig cfg;
  PromptLibrary prompts = PromptLibrary::builtin();
  PricingTable pricing;
  std::optional<RuleStore> rules;
  std::shared_ptr<SearchClient> search;

  AgentDeps deps() const {
    AgentDeps d;
    d.rules = rules ? &*rules : nullptr;
    d.search = search.get();
    d.prompts = &prompts;
    d.search_limit = cfg.search_limit;
    return d;
  }

  RepairConfig repair_config(bool zero_shot) const {
    RepairConfig rc;
    rc.agents.ablation = cfg.ablation;
    rc.agents.fix_step_budget = cfg.fix_step_budget;
    rc.agents.critic_step_budget = cfg.critic_step_budget;
    rc.agents.critic_sees_intent = cfg.critic_sees_intent;
    rc.max_iterations = cfg.max_iterations;
    rc.zero_shot = zero_shot;
    return rc;
  }

  RunMetadata metadata(bool zero_shot) const {
    RunMetadata m;
    m.config = cfg;
    m.prompt_hashes = prompts.hashes();
    m.ablation = cfg.ablation;
    m.zero_shot = zero_shot;
    return m;
  }

  /// Mock when a script is given, otherwise the configured live provider.
  std::shared_ptr<ChatClient> client(const std::optional<std::filesystem::path>& script) const {
    std::shared_ptr<ChatProvider> provider;
    std::shared_ptr<Clock> clock = steady_clock();
    ProviderConfig pc = cfg.provider;
    if (script) {
      require_file(script->string(), "mock script");
      auto manual = std::make_shared<ManualClock>();
      provider = std::make_shared<MockProvider>(MockProvider::load_script(*script), manual);
      clock = manual;
      pc.max_retries = 0;
    } else if (cfg.provider.provider_id == "mock") {
      throw Error(Errc::ConfigInvalid, "provider \"mock\" needs a script (--mock-script / --mock-transcripts)");
    } else {
      if (cfg.provider.endpoint.empty()) throw Error(Errc::ConfigInvalid, "provider.endpoint is empty");
      provider = std::make_shared<OpenAiChatProvider>();
    }
    auto client = std::make_shared<ChatClient>(pc, resolve_pricing(pc, pricing), provider, clock);
    if (script) client->set_sleeper([](double) {});
    return client;
  }
};

Wiring wire(GlobalConfig cfg, bool need_agents) {
  Wiring w;
  cfg.validate();
  w.cfg = std::move(cfg);
  w.pricing = PricingTable::from_json(w.cfg.pricing);
  shared_rate_limiter().set_rate(w.cfg.rate_limit_rpm);
  if (!w.cfg.prompts_dir.empty()) w.prompts = PromptLibrary::load(w.cfg.prompts_dir);
  if (!need_agents) return w;

  const auto ablation = w.cfg.ablation;
  if (ablation != Ablation::NoFixRules) {
    if (w.cfg.rules_dir.empty()) throw Error(Errc::ConfigInvalid, "a rules directory is required (--rules)");
    w.rules = RuleStore::load(w.cfg.rules_dir);
  }
  if (ablation != Ablation::NoWebSearch) {
    std::shared_ptr<SearchBackend> backend;
    if (w.cfg.search_backend == SearchBackendKind::Live) {
      backend = std::make_shared<SerpApiBackend>(w.cfg.search_endpoint, w.cfg.search_key_env);
    } else if (!w.cfg.search_fixture.empty()) {
      require_file(w.cfg.search_fixture, "search fixture");
      backend = FixtureSearchBackend::load(w.cfg.search_fixture);
    } else {
      spdlog::warn("no search fixture configured; web searches will return no results");
      backend = std::make_shared<FixtureSearchBackend>(nlohmann::json::object());
    }
    w.search = std::make_shared<SearchClient>(backend);
  }
  return w;
}

// --- rules generate --------------------------------------------------------

struct RulesOpts {
  std::string corpus, out_dir = "rules", mock_script;
};

int cmd_rules_generate(const Common& common, const RulesOpts& o, std::ostream& out) {
  auto cfg = load_config(common.config_path);
  require_file(o.corpus, "corpus");
  auto w = wire(cfg, false);
  const auto fixes = read_annotated_fixes(o.corpus);
  auto client = w.client(o.mock_script.empty() ? std::nullopt : std::optional<std::filesystem::path>(o.mock_script));
  RulegenOptions opts;
  // Scripted runs must be byte-identical from run to run.
  if (!o.mock_script.empty()) opts.now = [] { return std::chrono::system_clock::time_point{}; };
  const auto report = run_rule_pipeline(*client, fixes, w.prompts, opts);
  report.store.save(o.out_dir);

  if (common.json) {
    nlohmann::json j{{"out_dir", o.out_dir}, {"rules", report.store.size()}, {"warnings", report.log.warnings}};
    auto failures = nlohmann::json::object();
    for (const auto& [id, msg] : report.failures) failures[std::string(abbreviation(id))] = msg;
    auto absent = nlohmann::json::array();
    for (auto id : report.absent) absent.push_back(abbreviation(id));
    j["failures"] = failures;
    j["absent"] = absent;
    j["usage"] = aggregate_usage(report.log.usage);
    out << j.dump(2) << "\n";
  } else {
    out << fmt::format("wrote {} rule(s) to {}\n", report.store.size(), o.out_dir);
    for (auto id : report.absent) out << fmt::format("  {:<6} absent (no posts)\n", abbreviation(id));
    for (const auto& [id, msg] : report.failures) out << fmt::format("  {:<6} FAILED: {}\n", abbreviation(id), msg);
  }
  return report.ok() ? kExitOk : kExitDomainFailure;
}

// --- intent ----------------------------------------------------------------

struct IntentOpts {
  std::string title, body, body_file, mock_script;
};

int cmd_intent(const Common& common, const IntentOpts& o, std::ostream& out) {
  auto w = wire(load_config(common.config_path), false);
  std::string body = o.body;
  if (!o.body_file.empty()) {
    require_file(o.body_file, "body file");
    body = text::read_file(o.body_file);
  }
  auto client = w.client(o.mock_script.empty() ? std::nullopt : std::optional<std::filesystem::path>(o.mock_script));
  RulegenLog log;
  const auto intent = generate_intent(*client, o.title, body, w.prompts, &log);
  if (common.json) {
    out << nlohmann::json{{"intent", intent.intent}, {"verified", intent.verified}, {"warnings", log.warnings}}.dump(2)
        << "\n";
  } else {
    out << intent.intent << "\n";
  }
  return kExitOk;
}

// --- repair ----------------------------------------------------------------

struct RepairOpts {
  std::string buggy, intent, test, source_site = "stackoverflow.com", mock_script, run_id, ablation;
  std::string rules, search_fixture;
  bool zero_shot = false;
};

int cmd_repair(const Common& common, const RepairOpts& o, std::ostream& out) {
  auto cfg = load_config(common.config_path);
  require_file(o.buggy, "buggy file");
  require_file(o.test, "test file");
  if (!o.ablation.empty()) {
    const auto a = parse_ablation(o.ablation);
    if (!a) throw Error(Errc::ConfigInvalid, "unknown ablation " + o.ablation);
    cfg.ablation = *a;
  }
  if (!o.rules.empty()) cfg.rules_dir = o.rules;
  if (!o.search_fixture.empty()) cfg.search_fixture = o.search_fixture;
  auto w = wire(cfg, !o.zero_shot);

  RepairTask task{text::read_file(o.buggy), o.intent, text::read_file(o.test), o.source_site};
  task.validate();
  auto client = w.client(o.mock_script.empty() ? std::nullopt : std::optional<std::filesystem::path>(o.mock_script));
  const auto run_dir = std::filesystem::path(w.cfg.run_dir) / (o.run_id.empty() ? run_id_now() : o.run_id) / "adhoc";
  auto meta = w.metadata(o.zero_shot);
  meta.instance_id = "adhoc";

  RepairOutcome outcome;
  try {
    outcome = repair(*client, task, w.deps(), w.repair_config(o.zero_shot));
  } catch (const RepairFailure& e) {
    persist_run(e.partial(), run_dir, meta);
    throw;
  }
  persist_run(outcome, run_dir, meta);
  const auto patch = diff::render_unified(diff::line_diff(task.buggy_source, outcome.final_candidate.source),
                                          "buggy.py", "candidate.py");
  if (common.json) {
    out << nlohmann::json{{"accepted", outcome.accepted},
                          {"attempts", outcome.attempts},
                          {"verdicts", outcome.verdicts},
                          {"diff", patch},
                          {"usage", outcome.usage},
                          {"wall_time", outcome.wall_time},
                          {"run_dir", run_dir.string()}}
               .dump(2)
        << "\n";
  } else {
    out << patch;
    for (std::size_t i = 0; i < outcome.verdicts.size(); ++i) {
      const auto& v = outcome.verdicts[i];
      out << fmt::format("attempt {}: {}{}", i + 1, to_string(v.decision), v.synthesized ? " (no critic)" : "");
      if (!v.reasoning.empty() && !v.synthesized) out << ": " << text::first_nonempty_line(v.reasoning).line;
      out << "\n";
    }
    out << fmt::format("accepted: {}  attempts: {}  cost: {:.4f} USD  time: {:.2f} s\nrun: {}\n",
                       outcome.accepted ? "yes" : "no", outcome.attempts, outcome.usage.cost, outcome.wall_time,
                       run_dir.string());
  }
  return outcome.accepted ? kExitOk : kExitDomainFailure;
}

// --- bench -----------------------------------------------------------------

struct BenchOpts {
  std::string corpus, ablation, mock_transcripts, rules, search_fixture, out_path, run_id;
  std::size_t parallelism = 0;
  bool gold_sanity = false, zero_shot = false, no_persist = false;
};

int cmd_bench(const Common& common, const BenchOpts& o, std::ostream& out) {
  auto cfg = load_config(common.config_path);
  if (o.corpus.empty() || !std::filesystem::is_directory(o.corpus)) {
    throw Error(Errc::MissingFile, "corpus directory " + o.corpus);
  }
  if (!o.ablation.empty()) {
    const auto a = parse_ablation(o.ablation);
    if (!a) throw Error(Errc::ConfigInvalid, "unknown ablation " + o.ablation);
    cfg.ablation = *a;
  }
  if (!o.rules.empty()) cfg.rules_dir = o.rules;
  if (!o.search_fixture.empty()) cfg.search_fixture = o.search_fixture;
  if (o.parallelism > 0) cfg.parallelism = o.parallelism;
  if (!o.mock_transcripts.empty() && !std::filesystem::is_directory(o.mock_transcripts)) {
    throw Error(Errc::MissingFile, "mock transcripts directory " + o.mock_transcripts);
  }

  // A corpus that does not validate is a usage error, reported before any
  // model call.
  const auto corpus_report = validate_corpus(o.corpus);
  if (!corpus_report.errors.empty()) {
    throw Error(Errc::ManifestInvalid, "corpus has invalid instances: " + corpus_report.errors.front());
  }
  if (corpus_report.count == 0) throw Error(Errc::EmptyCorpus, o.corpus);

  auto w = wire(cfg, !o.zero_shot);
  BenchConfig bc;
  bc.repair = w.repair_config(o.zero_shot);
  bc.runner = w.cfg.runner;
  bc.parallelism = w.cfg.parallelism;
  bc.gold_sanity = o.gold_sanity;
  bc.run_metadata = w.metadata(o.zero_shot);
  const auto run_root = std::filesystem::path(w.cfg.run_dir) / (o.run_id.empty() ? run_id_now() : o.run_id);
  if (!o.no_persist) bc.run_dir = run_root;

  ClientFactory factory;
  if (!o.mock_transcripts.empty()) {
    const std::filesystem::path dir = o.mock_transcripts;
    factory = [&w, dir](const BenchmarkInstance& inst) { return w.client(dir / (inst.instance_id + ".json")); };
  } else {
    factory = [&w](const BenchmarkInstance&) { return w.client(std::nullopt); };
  }

  const auto report = evaluate_corpus(o.corpus, factory, w.deps(), bc);
  const nlohmann::json report_json = report;
  std::filesystem::path report_path = o.out_path;
  if (report_path.empty() && !o.no_persist) report_path = run_root / "report.json";
  if (!report_path.empty()) {
    if (report_path.has_parent_path()) std::filesystem::create_directories(report_path.parent_path());
    text::write_file(report_path, report_json.dump(2) + "\n");
  }
  if (common.json) {
    out << report_json.dump(2) << "\n";
  } else {
    out << render_table({report});
    std::size_t errors = 0;
    for (const auto& r : report.rows) errors += r.error ? 1 : 0;
    out << fmt::format("instances: {}  resolved: {}  errors: {}\n", report.aggregates.instances,
                       report.aggregates.resolved, errors);
    if (!report_path.empty()) out << "report: " << report_path.string() << "\n";
  }
  return kExitOk;
}

// --- stats -----------------------------------------------------------------

struct StatsOpts {
  std::string corpus, group_by = "pattern", source_filter;
  std::vector<std::string> kappa;
};

std::vector<std::string> read_labels(const std::string& path) {
  require_file(path, "label file");
  try {
    return nlohmann::json::parse(text::read_file(path)).get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigInvalid, path + ": expected a JSON array of strings (" + e.what() + ")");
  }
}

int cmd_stats(const Common& common, const StatsOpts& o, std::ostream& out) {
  (void)load_config(common.config_path);
  if (o.corpus.empty() && o.kappa.empty()) throw Error(Errc::ConfigInvalid, "give --corpus and/or --kappa");
  nlohmann::json j = nlohmann::json::object();
  if (!o.kappa.empty()) {
    const double k = cohens_kappa(read_labels(o.kappa.at(0)), read_labels(o.kappa.at(1)));
    j["kappa"] = k;
    if (!common.json) out << fmt::format("kappa: {:.4f}\n", k);
  }
  if (!o.corpus.empty()) {
    require_file(o.corpus, "corpus");
    const auto group = parse_group_by(o.group_by);
    if (!group) throw Error(Errc::ConfigInvalid, "--group-by must be source, framework, pattern or component");
    auto fixes = read_annotated_fixes(o.corpus);
    if (!o.source_filter.empty()) {
      const auto src = parse_fix_source(o.source_filter);
      if (!src) throw Error(Errc::ConfigInvalid, "unknown source " + o.source_filter);
      std::erase_if(fixes, [&](const AnnotatedFix& f) { return f.source != *src; });
    }
    const auto table = pattern_distribution(fixes, *group);
    auto rows = nlohmann::json::array();
    for (const auto& r : table.rows) rows.push_back({{"key", r.key}, {"count", r.count}, {"share", r.share}});
    j["distribution"] = {{"group_by", to_string(*group)}, {"total", table.total}, {"rows", rows}};
    if (!common.json) out << table.to_csv();
  }
  if (common.json) out << j.dump(2) << "\n";
  return kExitOk;
}

// --- corpus validate -------------------------------------------------------

int cmd_corpus_validate(const Common& common, const std::string& dir, std::ostream& out) {
  (void)load_config(common.config_path);
  if (dir.empty() || !std::filesystem::is_directory(dir)) throw Error(Errc::MissingFile, "corpus directory " + dir);
  const auto report = validate_corpus(dir);
  if (common.json) {
    auto hist = nlohmann::json::object();
    for (const auto& [c, n] : report.histogram) hist[std::string(to_string(c))] = n;
    auto entries = nlohmann::json::array();
    for (const auto& e : report.entries) {
      entries.push_back({{"dir", e.dir.filename().string()},
                         {"instance_id", e.instance_id ? nlohmann::json(*e.instance_id) : nlohmann::json(nullptr)},
                         {"error", e.error ? nlohmann::json(*e.error) : nlohmann::json(nullptr)}});
    }
    out << nlohmann::json{{"count", report.count}, {"histogram", hist}, {"entries", entries}, {"errors", report.errors}}
               .dump(2)
        << "\n";
  } else {
    out << fmt::format("valid instances: {}\n", report.count);
    for (const auto& [c, n] : report.histogram) out << fmt::format("  {:<10} {}\n", to_string(c), n);
    for (const auto& e : report.errors) out << "error: " << e << "\n";
  }
  return report.errors.empty() ? kExitOk : kExitDomainFailure;
}

// --- compare ---------------------------------------------------------------

BenchReport read_report(const std::string& path) {
  require_file(path, "report");
  try {
    return nlohmann::json::parse(text::read_file(path)).get<BenchReport>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigInvalid, path + ": " + e.what());
  }
}

int cmd_compare(const Common& common, const std::string& base_path, const std::string& ablated_path,
                std::ostream& out) {
  (void)load_config(common.config_path);
  const auto base = read_report(base_path);
  const auto ablated = read_report(ablated_path);
  const auto d = compare_configs(base, ablated);
  if (common.json) {
    out << nlohmann::json(d).dump(2) << "\n";
  } else {
    out << render_table({base, ablated});
    out << fmt::format("drop (pts): RP {:.2f}  LI {:.2f}  FN {:.2f}  CP {:.2f}\n", d.repair_rate, d.line_acc, d.fn_acc,
                       d.comp_acc);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual-agent repair of LLM-agent programs: rule generation, repair, benchmarking"};
  app.name(args.empty() ? "agentmend" : std::filesystem::path(args[0]).filename().string());
  app.require_subcommand(1);
  Common common;

  RulesOpts rules;
  auto* rules_cmd = app.add_subcommand("rules", "Fix-pattern rules");
  rules_cmd->require_subcommand(1);
  auto* rules_gen = rules_cmd->add_subcommand("generate", "Summarize posts and synthesize one rule per pattern");
  add_common(rules_gen, common);
  rules_gen->add_option("--corpus", rules.corpus, "Annotated fixes (JSON lines)")->required();
  rules_gen->add_option("--out", rules.out_dir, "Output rules directory");
  rules_gen->add_option("--mock-script", rules.mock_script, "Replay a scripted provider");

  IntentOpts intent;
  auto* intent_cmd = app.add_subcommand("intent", "One-line code intent from a post (needs human review)");
  add_common(intent_cmd, common);
  intent_cmd->add_option("--title", intent.title)->required();
  intent_cmd->add_option("--body", intent.body);
  intent_cmd->add_option("--body-file", intent.body_file);
  intent_cmd->add_option("--mock-script", intent.mock_script);

  RepairOpts rep;
  auto* repair_cmd = app.add_subcommand("repair", "Repair one program with the fix and critic agents");
  add_common(repair_cmd, common);
  repair_cmd->add_option("--buggy", rep.buggy, "Buggy program")->required();
  repair_cmd->add_option("--intent", rep.intent, "One-line intent")->required();
  repair_cmd->add_option("--test", rep.test, "Test file")->required();
  repair_cmd->add_option("--source-site", rep.source_site, "Domain excluded from web search");
  repair_cmd->add_option("--ablation", rep.ablation, "none, nfr, nws or nca");
  repair_cmd->add_option("--rules", rep.rules, "Rules directory");
  repair_cmd->add_option("--search-fixture", rep.search_fixture, "Canned search results (JSON)");
  repair_cmd->add_option("--mock-script", rep.mock_script, "Replay a scripted provider");
  repair_cmd->add_option("--run-id", rep.run_id);
  repair_cmd->add_flag("--zero-shot", rep.zero_shot, "Single chat call, no tools, no critic");

  BenchOpts bench;
  auto* bench_cmd = app.add_subcommand("bench", "Evaluate over an instance corpus");
  add_common(bench_cmd, common);
  bench_cmd->add_option("--corpus", bench.corpus, "Corpus directory")->required();
  bench_cmd->add_option("--ablation", bench.ablation, "none, nfr, nws or nca");
  bench_cmd->add_option("--mock-transcripts", bench.mock_transcripts, "Directory of <instance_id>.json scripts");
  bench_cmd->add_option("--rules", bench.rules, "Rules directory");
  bench_cmd->add_option("--search-fixture", bench.search_fixture, "Canned search results (JSON)");
  bench_cmd->add_option("--out", bench.out_path, "Report JSON path");
  bench_cmd->add_option("--parallelism", bench.parallelism);
  bench_cmd->add_option("--run-id", bench.run_id);
  bench_cmd->add_flag("--gold-sanity", bench.gold_sanity, "Check every gold fix passes first");
  bench_cmd->add_flag("--zero-shot", bench.zero_shot, "Single chat call per instance");
  bench_cmd->add_flag("--no-persist", bench.no_persist, "Do not write run directories");

  StatsOpts stats;
  auto* stats_cmd = app.add_subcommand("stats", "Fix-pattern distributions and annotator agreement");
  add_common(stats_cmd, common);
  stats_cmd->add_option("--corpus", stats.corpus, "Annotated fixes (JSON lines)");
  stats_cmd->add_option("--group-by", stats.group_by, "source, framework, pattern or component");
  stats_cmd->add_option("--source", stats.source_filter, "Only entries from this source");
  stats_cmd->add_option("--kappa", stats.kappa, "Two JSON label files")->expected(2);

  std::string corpus_dir;
  auto* corpus_cmd = app.add_subcommand("corpus", "Instance corpus tools");
  corpus_cmd->require_subcommand(1);
  auto* validate_cmd = corpus_cmd->add_subcommand("validate", "Parse and check every instance");
  add_common(validate_cmd, common);
  validate_cmd->add_option("dir", corpus_dir, "Corpus directory")->required();

  std::string base_report, ablated_report;
  auto* compare_cmd = app.add_subcommand("compare", "Metric drops between two bench reports");
  add_common(compare_cmd, common);
  compare_cmd->add_option("--base", base_report)->required();
  compare_cmd->add_option("--ablated", ablated_report)->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("agentmend");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("agentmend", sink);
  logger->set_pattern("[%l] %v");
  logger->set_level(common.verbose ? spdlog::level::debug : spdlog::level::warn);
  auto previous = spdlog::default_logger();
  spdlog::set_default_logger(logger);
  struct Restore {
    std::shared_ptr<spdlog::logger> prev;
    ~Restore() { spdlog::set_default_logger(prev); }
  } restore{previous};

  try {
    if (rules_gen->parsed()) return cmd_rules_generate(common, rules, out);
    if (intent_cmd->parsed()) return cmd_intent(common, intent, out);
    if (repair_cmd->parsed()) return cmd_repair(common, rep, out);
    if (bench_cmd->parsed()) return cmd_bench(common, bench, out);
    if (stats_cmd->parsed()) return cmd_stats(common, stats, out);
    if (validate_cmd->parsed()) return cmd_corpus_validate(common, corpus_dir, out);
    if (compare_cmd->parsed()) return cmd_compare(common, base_report, ablated_report, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace agentmend::cli
