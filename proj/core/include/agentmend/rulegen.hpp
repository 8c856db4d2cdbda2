#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "agentmend/llm.hpp"
#include "agentmend/model.hpp"
#include "agentmend/prompts.hpp"
#include "agentmend/rules.hpp"

namespace agentmend {

struct PostSummary {
  std::string post_id;
  FixPatternId pattern{};
  std::string summary;  // one line

  bool operator==(const PostSummary&) const = default;
};

struct RulegenOptions {
  /// Summaries beyond this many estimated tokens are synthesized in chunks
  /// and the partial rules merged.
  std::size_t synthesis_token_budget = 6000;
  std::function<std::chrono::system_clock::time_point()> now = [] { return std::chrono::system_clock::now(); };
};

/// Collects warnings and usage across calls; optional everywhere.
struct RulegenLog {
  std::vector<std::string> warnings;
  std::vector<UsageRecord> usage;
};

/// Errors: PreconditionViolation (blank rationale), EmptyOutput,
/// ProviderRefusal and other gateway errors.
PostSummary summarize_post(ChatClient& client, const AnnotatedFix& fix, const PromptLibrary& prompts,
                           RulegenLog* log = nullptr);

/// Summaries are fed in post_id order. Errors: PatternMismatch,
/// PreconditionViolation (empty list), EmptyOutput.
FixPatternRule synthesize_rule(ChatClient& client, FixPatternId pattern, std::vector<PostSummary> summaries,
                               const PromptLibrary& prompts, const RulegenOptions& options = {},
                               RulegenLog* log = nullptr);

struct GeneratedIntent {
  std::string intent;     // one line
  bool verified = false;  // set only by a human reviewer
};

GeneratedIntent generate_intent(ChatClient& client, const std::string& title, const std::string& body,
                                const PromptLibrary& prompts, RulegenLog* log = nullptr);

struct RulePipelineReport {
  RuleStore store;
  std::map<FixPatternId, std::string> failures;  // pattern -> error text
  std::vector<FixPatternId> absent;              // no posts in the corpus
  RulegenLog log;

  bool ok() const noexcept { return failures.empty(); }
};

/// Summarize then synthesize, pattern by pattern in taxonomy order and post
/// by post in post_id order. A failing pattern is recorded and skipped.
RulePipelineReport run_rule_pipeline(ChatClient& client, const std::vector<AnnotatedFix>& fixes,
                                     const PromptLibrary& prompts, const RulegenOptions& options = {});

}  // namespace agentmend
