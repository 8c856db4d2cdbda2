#include "agentmend/analytics.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "agentmend/error.hpp"
#include "agentmend/text.hpp"

namespace agentmend {

std::string_view to_string(GroupBy g) noexcept {
  switch (g) {
    case GroupBy::Source: return "source";
    case GroupBy::Framework: return "framework";
    case GroupBy::Pattern: return "pattern";
    case GroupBy::Component: return "component";
  }
  return "pattern";
}

std::optional<GroupBy> parse_group_by(std::string_view s) {
  const auto l = text::to_lower(text::trim(s));
  for (auto g : {GroupBy::Source, GroupBy::Framework, GroupBy::Pattern, GroupBy::Component}) {
    if (to_string(g) == l) return g;
  }
  return std::nullopt;
}

std::string DistributionTable::to_csv() const {
  std::string out = "key,count,share\n";
  for (const auto& r : rows) {
    const bool quote = r.key.find_first_of(",\"\n") != std::string::npos;
    std::string key = r.key;
    if (quote) {
      std::string escaped;
      for (char c : key) escaped += c == '"' ? std::string("\"\"") : std::string(1, c);
      key = "\"" + escaped + "\"";
    }
    out += fmt::format("{},{},{:.4f}\n", key, r.count, r.share);
  }
  return out;
}

DistributionTable pattern_distribution(const std::vector<AnnotatedFix>& corpus, GroupBy group_by) {
  if (corpus.empty()) throw Error(Errc::EmptyCorpus, "no annotated fixes");
  std::map<std::string, std::size_t> counts;
  for (const auto& f : corpus) {
    switch (group_by) {
      case GroupBy::Source: ++counts[std::string(to_string(f.source))]; break;
      case GroupBy::Framework: ++counts[f.framework]; break;
      case GroupBy::Pattern: ++counts[std::string(abbreviation(f.pattern))]; break;
      case GroupBy::Component: ++counts[std::string(to_string(f.component))]; break;
    }
  }
  DistributionTable table;
  table.total = corpus.size();
  for (const auto& [key, count] : counts) {
    table.rows.push_back({key, count, static_cast<double>(count) / static_cast<double>(table.total)});
  }
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const DistributionRow& a, const DistributionRow& b) { return a.count > b.count; });
  return table;
}

double cohens_kappa(const std::vector<std::string>& labels_a, const std::vector<std::string>& labels_b) {
  if (labels_a.empty() && labels_b.empty()) throw Error(Errc::EmptyInput, "no labels");
  if (labels_a.size() != labels_b.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(labels_a.size()) + " vs " + std::to_string(labels_b.size()));
  }
  const auto n = static_cast<double>(labels_a.size());
  std::map<std::string, std::size_t> ma, mb;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    ++ma[labels_a[i]];
    ++mb[labels_b[i]];
    agree += labels_a[i] == labels_b[i] ? 1 : 0;
  }
  const double p_o = static_cast<double>(agree) / n;
  double p_e = 0.0;
  for (const auto& [label, count] : ma) {
    const auto it = mb.find(label);
    if (it != mb.end()) p_e += (static_cast<double>(count) / n) * (static_cast<double>(it->second) / n);
  }
  if (p_e >= 1.0) return 1.0;
  return (p_o - p_e) / (1.0 - p_e);
}

}  // namespace agentmend
