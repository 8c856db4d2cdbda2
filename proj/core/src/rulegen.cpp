#include "agentmend/rulegen.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "agentmend/error.hpp"
#include "agentmend/text.hpp"

namespace agentmend {

namespace {

std::string ask(ChatClient& client, const std::string& prompt, RulegenLog* log) {
  const std::vector<ChatTurn> history{ChatTurn::user(prompt)};
  auto result = client.chat(history, {});
  if (log != nullptr) log->usage.push_back(result.usage);
  return std::move(result.turn.content);
}

std::string one_line(const std::string& reply, const std::string& what, RulegenLog* log) {
  auto first = text::first_nonempty_line(reply);
  if (first.line.empty()) throw Error(Errc::EmptyOutput, what);
  if (first.had_more) {
    auto msg = what + ": model returned several lines; kept the first";
    spdlog::warn("{}", msg);
    if (log != nullptr) log->warnings.push_back(std::move(msg));
  }
  return std::move(first.line);
}

std::string rule_body(const std::string& reply, const std::string& what) {
  auto body = std::string(text::trim(reply));
  if (body.empty()) throw Error(Errc::EmptyOutput, what);
  return body;
}

PromptVars pattern_vars(FixPatternId pattern) {
  return {{"pattern_name", std::string(display_name(pattern))}, {"pattern_id", std::string(abbreviation(pattern))}};
}

std::string bullet_list(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += "- " + s + "\n";
  return out;
}

// Greedy packing under the token budget, never fewer than `min_items` per
// chunk so that a reduce step always makes progress.
std::vector<std::vector<std::string>> chunk(const std::vector<std::string>& items, std::size_t budget,
                                            std::size_t min_items) {
  std::vector<std::vector<std::string>> chunks;
  std::vector<std::string> cur;
  std::size_t tokens = 0;
  for (const auto& item : items) {
    const auto t = text::estimate_tokens(item) + 1;
    if (cur.size() >= min_items && tokens + t > budget) {
      chunks.push_back(std::move(cur));
      cur.clear();
      tokens = 0;
    }
    cur.push_back(item);
    tokens += t;
  }
  if (!cur.empty()) chunks.push_back(std::move(cur));
  return chunks;
}

}  // namespace

PostSummary summarize_post(ChatClient& client, const AnnotatedFix& fix, const PromptLibrary& prompts,
                           RulegenLog* log) {
  if (text::is_blank(fix.rationale)) throw Error(Errc::PreconditionViolation, "rationale is empty for " + fix.post_id);
  std::string applied;
  if (fix.fixed_code && !text::is_blank(*fix.fixed_code)) {
    applied = "```\n" + *fix.fixed_code + "\n```";
  } else {
    applied = "(no code given; the fix is described in the rationale)";
  }
  auto vars = pattern_vars(fix.pattern);
  vars.insert({{"source", std::string(to_string(fix.source))},
               {"title", fix.title},
               {"body", fix.body},
               {"applied_fix", applied},
               {"rationale", fix.rationale}});
  const auto reply = ask(client, prompts.render(prompt_names::kSummarizePost, vars), log);
  return PostSummary{fix.post_id, fix.pattern, one_line(reply, "summary of " + fix.post_id, log)};
}

FixPatternRule synthesize_rule(ChatClient& client, FixPatternId pattern, std::vector<PostSummary> summaries,
                               const PromptLibrary& prompts, const RulegenOptions& options, RulegenLog* log) {
  if (summaries.empty()) throw Error(Errc::PreconditionViolation, "no summaries for " + std::string(abbreviation(pattern)));
  for (const auto& s : summaries) {
    if (s.pattern != pattern) {
      throw Error(Errc::PatternMismatch, "summary " + s.post_id + " is " + std::string(abbreviation(s.pattern)) +
                                             ", expected " + std::string(abbreviation(pattern)));
    }
  }
  std::stable_sort(summaries.begin(), summaries.end(),
                   [](const PostSummary& a, const PostSummary& b) { return a.post_id < b.post_id; });
  std::vector<std::string> lines;
  lines.reserve(summaries.size());
  for (const auto& s : summaries) lines.push_back(s.summary);

  const auto what = "rule for " + std::string(abbreviation(pattern));
  std::vector<std::string> partials;
  for (const auto& part : chunk(lines, options.synthesis_token_budget, 1)) {
    auto vars = pattern_vars(pattern);
    vars["summaries"] = bullet_list(part);
    partials.push_back(rule_body(ask(client, prompts.render(prompt_names::kSynthesizeRule, vars), log), what));
  }
  while (partials.size() > 1) {
    std::vector<std::string> merged;
    for (const auto& group : chunk(partials, options.synthesis_token_budget, 2)) {
      if (group.size() == 1) {
        merged.push_back(group.front());
        continue;
      }
      auto vars = pattern_vars(pattern);
      vars["partial_rules"] = bullet_list(group);
      merged.push_back(rule_body(ask(client, prompts.render(prompt_names::kMergeRules, vars), log), what));
    }
    partials = std::move(merged);
  }

  FixPatternRule rule;
  rule.pattern = pattern;
  rule.rule_text = std::move(partials.front());
  rule.source_summary_count = summaries.size();
  rule.generated_at = options.now();
  return rule;
}

GeneratedIntent generate_intent(ChatClient& client, const std::string& title, const std::string& body,
                                const PromptLibrary& prompts, RulegenLog* log) {
  if (text::is_blank(title)) throw Error(Errc::PreconditionViolation, "title is empty");
  const auto reply = ask(client, prompts.render(prompt_names::kIntent, {{"title", title}, {"body", body}}), log);
  return GeneratedIntent{one_line(reply, "intent", log), false};
}

RulePipelineReport run_rule_pipeline(ChatClient& client, const std::vector<AnnotatedFix>& fixes,
                                     const PromptLibrary& prompts, const RulegenOptions& options) {
  RulePipelineReport report;
  std::map<FixPatternId, std::vector<const AnnotatedFix*>> by_pattern;
  for (const auto& f : fixes) by_pattern[f.pattern].push_back(&f);

  for (const auto id : all_fix_patterns()) {
    auto it = by_pattern.find(id);
    if (it == by_pattern.end()) {
      report.absent.push_back(id);
      auto msg = "no posts for pattern " + std::string(abbreviation(id)) + "; rule not generated";
      spdlog::warn("{}", msg);
      report.log.warnings.push_back(std::move(msg));
      continue;
    }
    auto& posts = it->second;
    std::stable_sort(posts.begin(), posts.end(),
                     [](const AnnotatedFix* a, const AnnotatedFix* b) { return a->post_id < b->post_id; });
    try {
      std::vector<PostSummary> summaries;
      for (const auto* post : posts) summaries.push_back(summarize_post(client, *post, prompts, &report.log));
      report.store.put(synthesize_rule(client, id, std::move(summaries), prompts, options, &report.log));
    } catch (const Error& e) {
      spdlog::error("pattern {}: {}", abbreviation(id), e.what());
      report.failures[id] = e.what();
    }
  }
  return report;
}

}  // namespace agentmend
