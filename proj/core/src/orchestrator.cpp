#include "agentmend/orchestrator.hpp"

#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "agentmend/hashing.hpp"
#include "agentmend/text.hpp"

namespace agentmend {

std::string_view to_string(AgentRole r) noexcept {
  switch (r) {
    case AgentRole::Fix: return "fix";
    case AgentRole::Critic: return "critic";
    case AgentRole::ZeroShot: return "zero_shot";
  }
  return "fix";
}

namespace {

AgentRole parse_agent_role(const std::string& s) {
  if (s == "fix") return AgentRole::Fix;
  if (s == "critic") return AgentRole::Critic;
  if (s == "zero_shot") return AgentRole::ZeroShot;
  throw Error(Errc::ManifestInvalid, "agent: " + s);
}

void finish(RepairOutcome& out, Clock& clock, double start) {
  std::vector<UsageRecord> records;
  for (const auto& s : out.transcripts) records.insert(records.end(), s.transcript.usage.begin(), s.transcript.usage.end());
  out.usage = aggregate_usage(records);
  out.wall_time = clock.now() - start;
}

Verdict accept_by_configuration(const char* why) {
  Verdict v;
  v.decision = Decision::Accept;
  v.reasoning = why;
  v.synthesized = true;
  return v;
}

}  // namespace

RepairOutcome repair(ChatClient& client, const RepairTask& task, const AgentDeps& deps, const RepairConfig& config) {
  task.validate();
  if (config.max_iterations < 1) throw Error(Errc::PreconditionViolation, "max_iterations must be at least 1");
  auto& clock = client.clock();
  const double start = clock.now();
  RepairOutcome out;

  auto fail = [&](const SessionError& e, AgentRole role, int iteration) -> RepairFailure {
    out.transcripts.push_back(SessionRecord{role, iteration, e.transcript()});
    out.error = e.what();
    finish(out, clock, start);
    return RepairFailure(e.code(), e.detail(), out);
  };

  if (config.zero_shot) {
    try {
      auto attempt = run_zero_shot(client, task, deps);
      out.transcripts.push_back(SessionRecord{AgentRole::ZeroShot, 1, std::move(attempt.transcript)});
      out.final_candidate = std::move(attempt.candidate);
    } catch (const SessionError& e) {
      throw fail(e, AgentRole::ZeroShot, 1);
    }
    out.attempts = 1;
    out.verdicts.push_back(accept_by_configuration("zero-shot mode has no critic"));
    out.accepted = true;
    finish(out, clock, start);
    return out;
  }

  const bool with_critic = config.agents.ablation != Ablation::NoCritic;
  const int max_iterations = with_critic ? config.max_iterations : 1;
  std::optional<std::string> feedback;

  for (int iteration = 1; iteration <= max_iterations; ++iteration) {
    try {
      auto attempt = run_fix_agent(client, task, feedback, iteration, deps, config.agents);
      out.transcripts.push_back(SessionRecord{AgentRole::Fix, iteration, std::move(attempt.transcript)});
      out.final_candidate = std::move(attempt.candidate);
      out.attempts = iteration;
    } catch (const SessionError& e) {
      throw fail(e, AgentRole::Fix, iteration);
    }

    if (!with_critic) {
      out.verdicts.push_back(accept_by_configuration("no critic configured"));
      break;
    }

    try {
      auto review = run_critic(client, task.buggy_source, out.final_candidate, task.test_source, task, deps,
                               config.agents);
      out.transcripts.push_back(SessionRecord{AgentRole::Critic, iteration, std::move(review.transcript)});
      out.verdicts.push_back(std::move(review.verdict));
    } catch (const SessionError& e) {
      throw fail(e, AgentRole::Critic, iteration);
    }
    if (out.verdicts.back().accepted()) break;
    feedback = out.verdicts.back().reasoning;
    spdlog::debug("iteration {} rejected: {}", iteration, *feedback);
  }

  out.accepted = out.verdicts.back().accepted();
  finish(out, clock, start);
  return out;
}

// --- persistence -----------------------------------------------------------

std::filesystem::path persist_run(const RepairOutcome& outcome, const std::filesystem::path& run_dir,
                                  const RunMetadata& meta) {
  std::error_code ec;
  std::filesystem::create_directories(run_dir, ec);
  if (ec || !std::filesystem::is_directory(run_dir)) {
    throw Error(Errc::IoError, run_dir.string() + ": " + (ec ? ec.message() : "not a directory"));
  }

  text::write_file(run_dir / run_files::kCandidate, outcome.final_candidate.source);

  std::ostringstream jsonl;
  auto sessions = nlohmann::json::array();
  for (std::size_t i = 0; i < outcome.transcripts.size(); ++i) {
    const auto& s = outcome.transcripts[i];
    for (const auto& turn : s.transcript.turns) {
      nlohmann::json line = turn;
      line["session"] = i;
      line["agent"] = to_string(s.agent);
      line["iteration"] = s.iteration;
      jsonl << line.dump() << '\n';
    }
    nlohmann::json meta_json{{"agent", to_string(s.agent)},
                             {"iteration", s.iteration},
                             {"terminated_by", to_string(s.transcript.terminated_by)},
                             {"invocations", s.transcript.invocations},
                             {"usage", s.transcript.usage}};
    if (s.transcript.error) meta_json["error"] = *s.transcript.error;
    sessions.push_back(std::move(meta_json));
  }
  text::write_file(run_dir / run_files::kTranscripts, jsonl.str());
  text::write_file(run_dir / run_files::kVerdicts, nlohmann::json(outcome.verdicts).dump(2) + "\n");

  nlohmann::json manifest{{"schema_version", 1},
                          {"instance_id", meta.instance_id},
                          {"ablation", to_string(meta.ablation)},
                          {"zero_shot", meta.zero_shot},
                          {"config", meta.config},
                          {"config_hash", sha256_hex(meta.config.dump())},
                          {"prompt_hashes", meta.prompt_hashes},
                          {"attempts", outcome.attempts},
                          {"accepted", outcome.accepted},
                          {"final_candidate_iteration", outcome.final_candidate.produced_at_iteration},
                          {"usage", outcome.usage},
                          {"wall_time", outcome.wall_time},
                          {"sessions", sessions}};
  manifest["error"] = outcome.error ? nlohmann::json(*outcome.error) : nlohmann::json(nullptr);
  const auto path = run_dir / run_files::kManifest;
  text::write_file(path, manifest.dump(2) + "\n");
  return path;
}

LoadedRun load_run(const std::filesystem::path& run_dir) {
  LoadedRun run;
  const auto manifest_path = run_dir / run_files::kManifest;
  if (!std::filesystem::exists(manifest_path)) throw Error(Errc::MissingFile, manifest_path.string());
  try {
    run.manifest = nlohmann::json::parse(text::read_file(manifest_path));
    auto& out = run.outcome;
    out.final_candidate.source = text::read_file(run_dir / run_files::kCandidate);
    out.final_candidate.produced_at_iteration = run.manifest.at("final_candidate_iteration").get<int>();
    out.attempts = run.manifest.at("attempts").get<int>();
    out.accepted = run.manifest.at("accepted").get<bool>();
    out.usage = run.manifest.at("usage").get<SessionUsage>();
    out.wall_time = run.manifest.at("wall_time").get<double>();
    if (!run.manifest["error"].is_null()) out.error = run.manifest["error"].get<std::string>();
    out.verdicts = nlohmann::json::parse(text::read_file(run_dir / run_files::kVerdicts)).get<std::vector<Verdict>>();

    for (const auto& s : run.manifest.at("sessions")) {
      SessionRecord rec;
      rec.agent = parse_agent_role(s.at("agent").get<std::string>());
      rec.iteration = s.at("iteration").get<int>();
      nlohmann::json tx_json{{"turns", nlohmann::json::array()},
                             {"invocations", s.at("invocations")},
                             {"usage", s.at("usage")},
                             {"terminated_by", s.at("terminated_by")}};
      if (s.contains("error")) tx_json["error"] = s["error"];
      rec.transcript = tx_json.get<AgentTranscript>();
      out.transcripts.push_back(std::move(rec));
    }
    std::istringstream lines(text::read_file(run_dir / run_files::kTranscripts));
    std::string line;
    while (std::getline(lines, line)) {
      if (text::is_blank(line)) continue;
      const auto j = nlohmann::json::parse(line);
      const auto idx = j.at("session").get<std::size_t>();
      if (idx >= out.transcripts.size()) throw Error(Errc::ManifestInvalid, "transcript session index out of range");
      out.transcripts[idx].transcript.turns.push_back(j.get<ChatTurn>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ManifestInvalid, run_dir.string() + ": " + e.what());
  }
  return run;
}

}  // namespace agentmend
