#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agentmend::diff {

enum class OpKind { Keep, Delete, Insert };

/// One step of a line edit script. Line numbers are 1-based.
///   Keep:   a_line and b_line of the shared line.
///   Delete: a_line of the removed line; b_line is the count of B lines
///           emitted so far.
///   Insert: a_line is the anchor (A lines consumed before the insertion,
///           0 for a prepend); b_line is the new line's position in B.
struct EditOp {
  OpKind kind{};
  int a_line = 0;
  int b_line = 0;
  std::string text;

  bool operator==(const EditOp&) const = default;
};

struct EditScript {
  std::vector<EditOp> ops;

  std::size_t deletions() const noexcept;
  std::size_t insertions() const noexcept;
  std::size_t edit_count() const noexcept { return deletions() + insertions(); }
  bool is_identity() const noexcept { return edit_count() == 0; }
};

/// Minimal line diff. Texts are split with text::split_lines, so a missing
/// trailing newline is not a difference. Within each run of changes all
/// deletions precede all insertions.
EditScript line_diff(std::string_view a, std::string_view b);
EditScript line_diff(std::span<const std::string> a, std::span<const std::string> b);

/// Replays the script over A. Throws Error(PreconditionViolation) when the
/// script was not computed against these lines.
std::vector<std::string> apply(const EditScript& script, std::span<const std::string> a);

inline constexpr int kDefaultContext = 3;

/// Unified diff with `--- a_name` / `+++ b_name` headers and
/// `@@ -i,n +j,m @@` hunks (counts always printed). An identity script
/// renders the two header lines only.
std::string render_unified(const EditScript& script, std::string_view a_name,
                           std::string_view b_name, int context = kDefaultContext);

/// Applies unified-diff text (as produced by render_unified) to A.
std::vector<std::string> apply_unified(std::string_view patch, std::span<const std::string> a);

/// A-file footprint of an edit: deleted lines plus insertion anchors.
using ChangedLineSet = std::set<int>;

ChangedLineSet changed_lines(const EditScript& script);
ChangedLineSet changed_lines(std::string_view a, std::string_view b);

inline constexpr std::string_view kModuleScope = "<module>";

struct FunctionSpan {
  std::string name;
  int start_line = 0;
  int end_line = 0;

  bool operator==(const FunctionSpan&) const = default;
};

/// Partition of a source file into function spans. Lines not covered by any
/// span belong to kModuleScope. Nested definitions split their parent into
/// several spans so that no line is covered twice.
struct FunctionMap {
  std::vector<FunctionSpan> spans;
  int line_count = 0;

  /// Innermost function name for a 1-based line; kModuleScope otherwise
  /// (including line 0 and out-of-range lines).
  std::string_view name_at(int line) const noexcept;
};

/// Header grammar: optional indentation, `def ` or `async def `, an
/// identifier, `(`. A function body runs until the next non-blank,
/// non-comment line indented no deeper than the header; blank and comment
/// lines right before that line stay outside the body.
FunctionMap function_map(std::string_view source);

}  // namespace agentmend::diff
