#include "agentmend/model.hpp"

#include <algorithm>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "agentmend/error.hpp"
#include "agentmend/text.hpp"

namespace agentmend {

namespace {

struct PatternInfo {
  FixPatternId id;
  std::string_view abbreviation;
  std::string_view display_name;
};

constexpr std::array<PatternInfo, kFixPatternCount> kPatterns = {{
    {FixPatternId::ANA, "ANA", "Add New Attribute"},
    {FixPatternId::RA, "RA", "Remove Attribute"},
    {FixPatternId::AOPC, "AOPC", "Addition of Precondition Check"},
    {FixPatternId::CV, "CV", "Change Version"},
    {FixPatternId::IL, "IL", "Install Library"},
    {FixPatternId::AOO, "AOO", "Addition of Operations"},
    {FixPatternId::ROO, "ROO", "Removal of Operations"},
    {FixPatternId::CDT, "CDT", "Change Data Type"},
    {FixPatternId::CP, "CP", "Change Prompt"},
    {FixPatternId::FS, "FS", "Fix Syntax"},
    {FixPatternId::CR, "CR", "Change Reference"},
    {FixPatternId::UDMo, "UDMo", "Use Different Module"},
    {FixPatternId::CER, "CER", "Change External Resources"},
    {FixPatternId::CF, "CF", "Change Function"},
    {FixPatternId::AEH, "AEH", "Add Exception Handling"},
    {FixPatternId::FAN, "FAN", "Fix Attribute Name"},
    {FixPatternId::CPV, "CPV", "Change Parameter Value"},
    {FixPatternId::CID, "CID", "Change Input Data"},
    {FixPatternId::AID, "AID", "Add Input Data"},
    {FixPatternId::UDM, "UDM", "Use Different Model"},
    {FixPatternId::CPO, "CPO", "Change Parameter Order"},
    {FixPatternId::MCTDS, "MCTDS", "Move Code to Different Scope"},
    {FixPatternId::FDA, "FDA", "Fix Data Access"},
}};

constexpr std::array<FixPatternId, kFixPatternCount> kPatternOrder = [] {
  std::array<FixPatternId, kFixPatternCount> ids{};
  for (std::size_t i = 0; i < kFixPatternCount; ++i) ids[i] = kPatterns[i].id;
  return ids;
}();

const PatternInfo& info(FixPatternId id) noexcept { return kPatterns[static_cast<std::size_t>(id)]; }

}  // namespace

std::span<const FixPatternId> all_fix_patterns() noexcept { return kPatternOrder; }

std::string_view abbreviation(FixPatternId id) noexcept { return info(id).abbreviation; }
std::string_view display_name(FixPatternId id) noexcept { return info(id).display_name; }

std::optional<FixPatternId> fix_pattern_from_abbreviation(std::string_view abbr) noexcept {
  for (const auto& p : kPatterns) {
    if (p.abbreviation == abbr) return p.id;
  }
  return std::nullopt;
}

std::optional<FixPatternId> parse_fix_pattern(std::string_view name) {
  const auto needle = text::trim(name);
  for (const auto& p : kPatterns) {
    if (text::iequals(p.abbreviation, needle) || text::iequals(p.display_name, needle)) return p.id;
  }
  return std::nullopt;
}

std::string_view to_string(AgentComponent c) noexcept {
  switch (c) {
    case AgentComponent::Reasoning: return "Reasoning";
    case AgentComponent::Memory: return "Memory";
    case AgentComponent::Planning: return "Planning";
    case AgentComponent::Tool: return "Tool";
  }
  return "?";
}

std::optional<AgentComponent> parse_component(std::string_view name) {
  const auto needle = text::trim(name);
  for (auto c : kAllComponents) {
    if (text::iequals(to_string(c), needle)) return c;
  }
  return std::nullopt;
}

std::string_view to_string(FixSource s) noexcept {
  switch (s) {
    case FixSource::StackOverflow: return "StackOverflow";
    case FixSource::GitHubCommit: return "GitHubCommit";
    case FixSource::GitHubIssue: return "GitHubIssue";
    case FixSource::HuggingFaceForum: return "HuggingFaceForum";
  }
  return "?";
}

std::optional<FixSource> parse_fix_source(std::string_view name) {
  for (auto s : {FixSource::StackOverflow, FixSource::GitHubCommit, FixSource::GitHubIssue,
                 FixSource::HuggingFaceForum}) {
    if (text::iequals(to_string(s), text::trim(name))) return s;
  }
  return std::nullopt;
}

void to_json(nlohmann::json& j, const AnnotatedFix& fix) {
  j = nlohmann::json{{"source", to_string(fix.source)},
                     {"post_id", fix.post_id},
                     {"title", fix.title},
                     {"body", fix.body},
                     {"rationale", fix.rationale},
                     {"pattern", abbreviation(fix.pattern)},
                     {"component", to_string(fix.component)},
                     {"framework", fix.framework},
                     {"language", fix.language}};
  j["buggy_code"] = fix.buggy_code ? nlohmann::json(*fix.buggy_code) : nlohmann::json(nullptr);
  j["fixed_code"] = fix.fixed_code ? nlohmann::json(*fix.fixed_code) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, AnnotatedFix& fix) {
  const auto field = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j[key].is_string()) {
      throw Error(Errc::ManifestInvalid, std::string(key) + ": missing or not a string");
    }
    return j[key].get<std::string>();
  };
  const auto optional_field = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<std::string>();
  };

  auto source = parse_fix_source(field("source"));
  if (!source) throw Error(Errc::ManifestInvalid, "source: unknown value " + field("source"));
  auto pattern = fix_pattern_from_abbreviation(field("pattern"));
  if (!pattern) pattern = parse_fix_pattern(field("pattern"));
  if (!pattern) throw Error(Errc::ManifestInvalid, "pattern: unknown value " + field("pattern"));
  auto component = parse_component(field("component"));
  if (!component) throw Error(Errc::ComponentUnknown, field("component"));

  fix.source = *source;
  fix.post_id = field("post_id");
  fix.title = field("title");
  fix.body = j.value("body", std::string{});
  fix.buggy_code = optional_field("buggy_code");
  fix.fixed_code = optional_field("fixed_code");
  fix.rationale = field("rationale");
  if (text::is_blank(fix.rationale)) throw Error(Errc::ManifestInvalid, "rationale: empty");
  fix.pattern = *pattern;
  fix.component = *component;
  fix.framework = j.value("framework", std::string{});
  fix.language = j.value("language", std::string{});
}

void validate_instance(const BenchmarkInstance& instance) {
  const auto fail = [](std::string why) { throw Error(Errc::ManifestInvalid, std::move(why)); };
  if (instance.instance_id.empty()) fail("id: empty");
  if (text::is_blank(instance.intent)) fail("intent: empty");
  if (text::has_line_break(instance.intent)) fail("intent: contains a line break");
  if (instance.buggy_source == instance.gold_source) fail("fixed.py: identical to buggy.py");
  if (text::is_blank(instance.test_source)) fail("test.py: empty");
  if (text::trim(instance.source_site).empty()) fail("source_site: empty");

  if (instance.component_regions) {
    const int line_count = static_cast<int>(text::split_lines(instance.buggy_source).size());
    auto regions = *instance.component_regions;
    for (const auto& r : regions) {
      if (r.lines.start < 1 || r.lines.end < r.lines.start || r.lines.end > line_count) {
        fail("component_regions: range " + std::to_string(r.lines.start) + "-" +
             std::to_string(r.lines.end) + " outside buggy.py (" + std::to_string(line_count) +
             " lines)");
      }
    }
    std::sort(regions.begin(), regions.end(),
              [](const auto& a, const auto& b) { return a.lines.start < b.lines.start; });
    for (std::size_t i = 1; i < regions.size(); ++i) {
      if (regions[i].lines.start <= regions[i - 1].lines.end) {
        fail("component_regions: overlapping ranges at line " +
             std::to_string(regions[i].lines.start));
      }
    }
  }
}

RepairTask RepairTask::from_instance(const BenchmarkInstance& instance) {
  return RepairTask{instance.buggy_source, instance.intent, instance.test_source,
                    instance.source_site};
}

void RepairTask::validate() const {
  const auto require = [](const std::string& value, const char* name) {
    if (text::is_blank(value)) {
      throw Error(Errc::PreconditionViolation, std::string("repair task field empty: ") + name);
    }
  };
  require(buggy_source, "buggy_source");
  require(intent, "intent");
  require(test_source, "test_source");
  require(source_site, "source_site");
}

std::string format_timestamp(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::chrono::system_clock::time_point parse_timestamp(std::string_view iso8601) {
  std::tm tm{};
  std::istringstream in{std::string(iso8601)};
  in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%S");
  if (in.fail()) throw Error(Errc::ManifestInvalid, "bad timestamp: " + std::string(iso8601));
  return std::chrono::system_clock::from_time_t(timegm(&tm));
}

}  // namespace agentmend
