#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace agentmend {

namespace prompt_names {
inline constexpr const char* kFixAgentSystem = "fix_agent_system";
inline constexpr const char* kFixAgent = "fix_agent";
inline constexpr const char* kCriticSystem = "critic_system";
inline constexpr const char* kCritic = "critic";
inline constexpr const char* kSummarizePost = "summarize_post";
inline constexpr const char* kSynthesizeRule = "synthesize_rule";
inline constexpr const char* kMergeRules = "merge_rules";
inline constexpr const char* kIntent = "intent";
inline constexpr const char* kZeroShot = "zero_shot";
}  // namespace prompt_names

using PromptVars = std::map<std::string, std::string>;

/// Replaces each `{key}` whose key is in `vars`; other braces are left alone.
/// Substituted values are not rescanned.
std::string render_template(const std::string& tmpl, const PromptVars& vars);

/// Named prompt templates. The built-in set is compiled in from prompts/;
/// a directory of <name>.txt files overrides individual entries.
class PromptLibrary {
 public:
  static const PromptLibrary& builtin();
  /// Built-ins overridden by every <name>.txt in `dir`.
  static PromptLibrary load(const std::filesystem::path& dir);

  /// Throws Error(ConfigInvalid) for an unknown name.
  const std::string& get(const std::string& name) const;
  std::string render(const std::string& name, const PromptVars& vars) const;

  /// name -> SHA-256 of the template text, for run manifests.
  std::map<std::string, std::string> hashes() const;
  const std::map<std::string, std::string>& templates() const noexcept { return templates_; }

 private:
  std::map<std::string, std::string> templates_;
};

}  // namespace agentmend
