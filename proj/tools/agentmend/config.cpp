#include "agentmend/config.hpp"

#include <set>

#include "agentmend/error.hpp"
#include "agentmend/text.hpp"

namespace agentmend::cli {

namespace {

const std::set<std::string> kKnownKeys = {
    "provider",       "pricing",         "search",          "rate_limit_rpm",  "run_dir",
    "rules_dir",      "prompts_dir",     "ablation",        "parallelism",     "runner",
    "max_iterations", "fix_step_budget", "critic_step_budget", "critic_sees_intent"};

}  // namespace

void GlobalConfig::validate() const {
  provider.validate();
  if (search_limit == 0) throw Error(Errc::ConfigInvalid, "search.limit must be positive");
  if (rate_limit_rpm < 0) throw Error(Errc::ConfigInvalid, "rate_limit_rpm must be >= 0");
  if (parallelism == 0) throw Error(Errc::ConfigInvalid, "parallelism must be positive");
  if (max_iterations < 1) throw Error(Errc::ConfigInvalid, "max_iterations must be >= 1");
  if (fix_step_budget < 1 || critic_step_budget < 1) throw Error(Errc::ConfigInvalid, "step budgets must be >= 1");
  if (!(runner.timeout > 0)) throw Error(Errc::ConfigInvalid, "runner.timeout must be positive");
  (void)PricingTable::from_json(pricing);
}

void to_json(nlohmann::json& j, const GlobalConfig& c) {
  j = nlohmann::json{
      {"provider", c.provider},
      {"pricing", c.pricing},
      {"search",
       {{"backend", c.search_backend == SearchBackendKind::Live ? "live" : "fixture"},
        {"fixture", c.search_fixture},
        {"endpoint", c.search_endpoint},
        {"api_key_env", c.search_key_env},
        {"limit", c.search_limit}}},
      {"rate_limit_rpm", c.rate_limit_rpm},
      {"run_dir", c.run_dir},
      {"rules_dir", c.rules_dir},
      {"prompts_dir", c.prompts_dir},
      {"ablation", to_string(c.ablation)},
      {"parallelism", c.parallelism},
      {"runner", c.runner},
      {"max_iterations", c.max_iterations},
      {"fix_step_budget", c.fix_step_budget},
      {"critic_step_budget", c.critic_step_budget},
      {"critic_sees_intent", c.critic_sees_intent},
  };
}

void from_json(const nlohmann::json& j, GlobalConfig& c) {
  if (!j.is_object()) throw Error(Errc::ConfigInvalid, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kKnownKeys.contains(key)) throw Error(Errc::ConfigInvalid, "unknown config key \"" + key + "\"");
  }
  try {
    if (j.contains("provider")) c.provider = j["provider"].get<ProviderConfig>();
    if (j.contains("pricing")) c.pricing = j["pricing"];
    if (j.contains("search")) {
      const auto& s = j["search"];
      const auto backend = s.value("backend", std::string("fixture"));
      if (backend == "live") {
        c.search_backend = SearchBackendKind::Live;
      } else if (backend == "fixture") {
        c.search_backend = SearchBackendKind::Fixture;
      } else {
        throw Error(Errc::ConfigInvalid, "search.backend must be \"live\" or \"fixture\"");
      }
      c.search_fixture = s.value("fixture", c.search_fixture);
      c.search_endpoint = s.value("endpoint", c.search_endpoint);
      c.search_key_env = s.value("api_key_env", c.search_key_env);
      c.search_limit = s.value("limit", c.search_limit);
    }
    c.rate_limit_rpm = j.value("rate_limit_rpm", c.rate_limit_rpm);
    c.run_dir = j.value("run_dir", c.run_dir);
    c.rules_dir = j.value("rules_dir", c.rules_dir);
    c.prompts_dir = j.value("prompts_dir", c.prompts_dir);
    if (j.contains("ablation")) {
      const auto a = parse_ablation(j["ablation"].get<std::string>());
      if (!a) throw Error(Errc::ConfigInvalid, "ablation must be one of none, nfr, nws, nca");
      c.ablation = *a;
    }
    c.parallelism = j.value("parallelism", c.parallelism);
    if (j.contains("runner")) c.runner = j["runner"].get<RunnerConfig>();
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.fix_step_budget = j.value("fix_step_budget", c.fix_step_budget);
    c.critic_step_budget = j.value("critic_step_budget", c.critic_step_budget);
    c.critic_sees_intent = j.value("critic_sees_intent", c.critic_sees_intent);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigInvalid, e.what());
  }
  c.validate();
}

GlobalConfig load_config(const std::string& path) {
  GlobalConfig cfg;
  if (path.empty()) return cfg;
  if (!std::filesystem::exists(path)) throw Error(Errc::MissingFile, "config " + path);
  try {
    cfg = nlohmann::json::parse(text::read_file(path)).get<GlobalConfig>();
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ConfigInvalid, path + ": " + e.what());
  }
  return cfg;
}

}  // namespace agentmend::cli
