#include "agentmend/tools.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include <fmt/format.h>

#include "agentmend/diff.hpp"
#include "agentmend/error.hpp"
#include "agentmend/text.hpp"

namespace agentmend {

std::vector<std::string> tool_list_fix_patterns(const RuleStore& store) {
  if (store.empty()) throw Error(Errc::StoreEmpty, "no fix pattern rules are loaded");
  std::vector<std::string> names;
  for (const auto id : store.patterns()) names.emplace_back(display_name(id));
  return names;
}

const std::string& tool_fix_pattern_rule(const RuleStore& store, std::string_view pattern_name) {
  const auto id = parse_fix_pattern(text::trim(pattern_name));
  if (!id) throw Error(Errc::UnknownPattern, std::string(pattern_name));
  const auto* rule = store.find(*id);
  if (rule == nullptr) throw Error(Errc::RuleMissing, std::string(display_name(*id)));
  return rule->rule_text;
}

std::string render_search_results(const std::vector<SearchResult>& results) {
  if (results.empty()) return std::string(kNoResults);
  std::string out;
  for (const auto& r : results) out += fmt::format("{}. {} — {}: {}\n", r.rank, r.title, r.url, r.snippet);
  return out;
}

std::string tool_web_search(SearchClient& search, const std::string& query, const RepairTask& task,
                            std::size_t limit) {
  return render_search_results(search.search(query, {task.source_site}, limit));
}

std::string tool_code_compare(std::string_view buggy, std::string_view candidate) {
  const auto script = diff::line_diff(buggy, candidate);
  if (script.is_identity()) return std::string(kNoChanges);
  return diff::render_unified(script, "buggy.py", "candidate.py");
}

std::string tool_validate_api(SearchClient& search, const std::string& symbol, const RepairTask& task,
                              std::size_t limit) {
  if (text::is_blank(symbol)) throw Error(Errc::PreconditionViolation, "symbol is empty");
  const auto results = search.search(std::string(text::trim(symbol)) + " documentation", {task.source_site}, limit);
  if (results.empty()) return std::string(kNoEvidence);
  std::string out = "Documentation evidence for " + std::string(text::trim(symbol)) + " (judge it yourself):\n";
  out += render_search_results(results);
  return out;
}

// --- validate_format -------------------------------------------------------

namespace {

const std::regex kDefHeader(R"(^[ \t]*(?:async[ \t]+)?def[ \t]+(\w+)[ \t]*\()");
const std::regex kClassHeader(R"(^class[ \t]+(\w+))");
const std::regex kAssignment(R"(^(\w+)[ \t]*(?::|=(?!=)))");
const std::regex kTupleAssignment(R"(^((?:\w+[ \t]*,[ \t]*)+\w+)[ \t]*=(?!=))");
const std::regex kPlainImport(R"(^import[ \t]+(.+))");
const std::regex kFromImport(R"(^from[ \t]+[\w.]+[ \t]+import[ \t]+(.+))");

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto part = text::trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!part.empty()) out.emplace_back(part);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

/// "a as b" -> {name a, bound b}
std::pair<std::string, std::string> split_alias(std::string_view item) {
  static const std::regex as_re(R"(^([\w.]+)(?:[ \t]+as[ \t]+(\w+))?$)");
  std::match_results<std::string_view::const_iterator> m;
  if (std::regex_match(item.begin(), item.end(), m, as_re)) {
    const auto name = m[1].str();
    return {name, m[2].matched ? m[2].str() : name};
  }
  return {std::string(item), std::string(item)};
}

/// Joins parenthesised import lists that span several lines.
std::vector<std::string> logical_lines(std::string_view source) {
  std::vector<std::string> out;
  std::string pending;
  int depth = 0;
  for (const auto& raw : text::split_lines(source)) {
    const auto line = strip_comment(raw);
    for (char c : line) depth += c == '(' ? 1 : c == ')' ? -1 : 0;
    pending += pending.empty() ? line : " " + std::string(text::trim(line));
    if (depth <= 0 || pending.size() > 4096) {
      out.push_back(std::move(pending));
      pending.clear();
      depth = 0;
    }
  }
  if (!pending.empty()) out.push_back(std::move(pending));
  return out;
}

std::string unparen(std::string_view s) {
  auto t = text::trim(s);
  if (!t.empty() && t.front() == '(') t.remove_prefix(1);
  if (!t.empty() && t.back() == ')') t.remove_suffix(1);
  return std::string(t);
}

std::set<std::string> defined_names(std::string_view candidate) {
  std::set<std::string> names;
  std::smatch m;
  for (const auto& line : logical_lines(candidate)) {
    if (std::regex_search(line, m, kDefHeader) || std::regex_search(line, m, kClassHeader)) {
      names.insert(m[1].str());
    } else if (std::regex_search(line, m, kTupleAssignment)) {
      for (const auto& n : split_commas(m[1].str())) names.insert(n);
    } else if (std::regex_search(line, m, kFromImport)) {
      for (const auto& item : split_commas(unparen(m[1].str()))) names.insert(split_alias(item).second);
    } else if (std::regex_search(line, m, kPlainImport)) {
      for (const auto& item : split_commas(m[1].str())) {
        const auto [name, bound] = split_alias(item);
        names.insert(bound == name ? name.substr(0, name.find('.')) : bound);
      }
    } else if (std::regex_search(line, m, kAssignment)) {
      names.insert(m[1].str());
    }
  }
  return names;
}

std::vector<std::string> referenced_names(std::string_view test_source, std::string_view module) {
  std::vector<std::string> refs;
  std::set<std::string> seen;
  auto add = [&](const std::string& name) {
    if (name != "*" && seen.insert(name).second) refs.push_back(name);
  };
  std::set<std::string> aliases;
  const auto mod = std::string(module);
  const std::regex from_mod("^[ \\t]*from[ \\t]+" + mod + "[ \\t]+import[ \\t]+(.+)");
  const std::regex import_mod("^[ \\t]*import[ \\t]+(.+)");
  std::smatch m;
  const auto lines = logical_lines(test_source);
  for (const auto& line : lines) {
    if (std::regex_search(line, m, from_mod)) {
      for (const auto& item : split_commas(unparen(m[1].str()))) add(split_alias(item).first);
    } else if (std::regex_search(line, m, import_mod)) {
      for (const auto& item : split_commas(m[1].str())) {
        const auto [name, bound] = split_alias(item);
        if (name == mod) aliases.insert(bound);
      }
    }
  }
  for (const auto& alias : aliases) {
    const std::regex attr("(?:^|[^\\w.])" + alias + "\\.(\\w+)");
    for (const auto& line : lines) {
      for (auto it = std::sregex_iterator(line.begin(), line.end(), attr); it != std::sregex_iterator(); ++it) {
        add((*it)[1].str());
      }
    }
  }
  return refs;
}

}  // namespace

std::string FormatReport::render() const {
  if (referenced.empty()) return "PASS\nnote: no contract detected";
  if (missing.empty()) return "PASS";
  std::string out;
  for (const auto& name : missing) out += "missing: " + name + "\n";
  return out;
}

FormatReport check_format(std::string_view candidate, std::string_view test_source, std::string_view module) {
  FormatReport report;
  report.referenced = referenced_names(test_source, module);
  const auto defined = defined_names(candidate);
  for (const auto& name : report.referenced) {
    if (!defined.contains(name)) report.missing.push_back(name);
  }
  return report;
}

std::string tool_validate_format(std::string_view candidate, std::string_view test_source) {
  if (text::is_blank(candidate) || text::is_blank(test_source)) {
    throw Error(Errc::PreconditionViolation, "validate_format needs both the candidate and the test source");
  }
  return check_format(candidate, test_source).render();
}

}  // namespace agentmend
