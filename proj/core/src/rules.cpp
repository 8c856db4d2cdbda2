#include "agentmend/rules.hpp"

#include "agentmend/error.hpp"
#include "agentmend/text.hpp"

namespace agentmend {

void to_json(nlohmann::json& j, const FixPatternRule& rule) {
  j = nlohmann::json{{"pattern", abbreviation(rule.pattern)},
                     {"display_name", display_name(rule.pattern)},
                     {"rule_text", rule.rule_text},
                     {"source_summary_count", rule.source_summary_count},
                     {"generated_at", format_timestamp(rule.generated_at)}};
}

void from_json(const nlohmann::json& j, FixPatternRule& rule) {
  const auto id = j.at("pattern").get<std::string>();
  const auto pattern = parse_fix_pattern(id);
  if (!pattern) throw Error(Errc::UnknownPattern, id);
  rule.pattern = *pattern;
  rule.rule_text = j.at("rule_text").get<std::string>();
  if (text::is_blank(rule.rule_text)) throw Error(Errc::ManifestInvalid, "rule_text: empty for " + id);
  rule.source_summary_count = j.value("source_summary_count", std::size_t{0});
  rule.generated_at = j.contains("generated_at") ? parse_timestamp(j["generated_at"].get<std::string>())
                                                 : std::chrono::system_clock::time_point{};
}

RuleStore RuleStore::load(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw Error(Errc::MissingFile, "rules directory " + dir.string());
  RuleStore store;
  for (const auto id : all_fix_patterns()) {
    const auto path = dir / (std::string(abbreviation(id)) + ".json");
    if (!std::filesystem::exists(path)) continue;
    FixPatternRule rule;
    try {
      rule = nlohmann::json::parse(text::read_file(path)).get<FixPatternRule>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::ManifestInvalid, path.string() + ": " + e.what());
    }
    if (rule.pattern != id) {
      throw Error(Errc::PatternMismatch, path.string() + " holds a rule for " + std::string(abbreviation(rule.pattern)));
    }
    store.put(std::move(rule));
  }
  return store;
}

void RuleStore::save(const std::filesystem::path& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, dir.string() + ": " + ec.message());
  for (const auto& [id, rule] : rules_) {
    text::write_file(dir / (std::string(abbreviation(id)) + ".json"), nlohmann::json(rule).dump(2) + "\n");
  }
}

void RuleStore::put(FixPatternRule rule) {
  if (text::is_blank(rule.rule_text)) throw Error(Errc::PreconditionViolation, "rule_text is empty");
  const auto id = rule.pattern;
  rules_[id] = std::move(rule);
}

const FixPatternRule* RuleStore::find(FixPatternId id) const {
  const auto it = rules_.find(id);
  return it == rules_.end() ? nullptr : &it->second;
}

std::vector<FixPatternId> RuleStore::patterns() const {
  std::vector<FixPatternId> out;
  for (const auto& [id, rule] : rules_) out.push_back(id);
  return out;
}

}  // namespace agentmend
