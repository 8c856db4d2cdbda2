#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "agentmend/agents.hpp"
#include "agentmend/bench.hpp"
#include "agentmend/llm.hpp"

namespace agentmend::cli {

enum class SearchBackendKind { Fixture, Live };

/// Everything a command can be configured with. Loaded from --config, then
/// overridden by flags; the effective value is echoed into run manifests.
struct GlobalConfig {
  ProviderConfig provider;
  nlohmann::json pricing = nlohmann::json::object();  // PricingTable JSON form

  SearchBackendKind search_backend = SearchBackendKind::Fixture;
  std::string search_fixture;  // fixture backend file; empty means no results
  std::string search_endpoint = "https://serpapi.com";
  std::string search_key_env = "SERPAPI_API_KEY";
  std::size_t search_limit = SearchClient::kDefaultLimit;

  double rate_limit_rpm = 0.0;
  std::string run_dir = "runs";
  std::string rules_dir;
  std::string prompts_dir;
  Ablation ablation = Ablation::None;
  std::size_t parallelism = 1;
  RunnerConfig runner;

  int max_iterations = 3;
  int fix_step_budget = 12;
  int critic_step_budget = 8;
  bool critic_sees_intent = true;

  /// Throws ConfigInvalid.
  void validate() const;
};

void to_json(nlohmann::json& j, const GlobalConfig& c);
/// Unknown keys are rejected so that typos do not pass silently.
void from_json(const nlohmann::json& j, GlobalConfig& c);

/// Defaults when `path` is empty. Throws MissingFile or ConfigInvalid.
GlobalConfig load_config(const std::string& path);

}  // namespace agentmend::cli
