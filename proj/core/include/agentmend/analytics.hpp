#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "agentmend/model.hpp"

namespace agentmend {

enum class GroupBy { Source, Framework, Pattern, Component };

std::string_view to_string(GroupBy g) noexcept;
std::optional<GroupBy> parse_group_by(std::string_view s);

struct DistributionRow {
  std::string key;
  std::size_t count = 0;
  double share = 0.0;

  bool operator==(const DistributionRow&) const = default;
};

struct DistributionTable {
  std::vector<DistributionRow> rows;  // descending count, ties by key
  std::size_t total = 0;

  /// "key,count,share" header plus one line per row, share to 4 decimals.
  std::string to_csv() const;
};

/// Pattern keys are abbreviations; sources and components use their
/// canonical names. Throws EmptyCorpus.
DistributionTable pattern_distribution(const std::vector<AnnotatedFix>& corpus, GroupBy group_by);

/// Cohen's kappa over paired labels. Returns 1 when chance agreement is 1.
/// Throws EmptyInput or LengthMismatch.
double cohens_kappa(const std::vector<std::string>& labels_a, const std::vector<std::string>& labels_b);

}  // namespace agentmend
