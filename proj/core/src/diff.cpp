#include "agentmend/diff.hpp"

#include <algorithm>
#include <charconv>
#include <regex>
#include <unordered_map>

#include "agentmend/error.hpp"
#include "agentmend/text.hpp"

namespace agentmend::diff {

std::size_t EditScript::deletions() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(ops.begin(), ops.end(), [](const EditOp& op) { return op.kind == OpKind::Delete; }));
}

std::size_t EditScript::insertions() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(ops.begin(), ops.end(), [](const EditOp& op) { return op.kind == OpKind::Insert; }));
}

namespace {

// Lines are interned to integers so the search compares ids, not strings.
class Differ {
 public:
  Differ(std::vector<int> a, std::vector<int> b) : a_(std::move(a)), b_(std::move(b)) {}

  // Raw edit sequence in path order: Keep consumes one line of each side,
  // Delete one of A, Insert one of B.
  std::vector<OpKind> run() {
    ops_.clear();
    compare(0, static_cast<int>(a_.size()), 0, static_cast<int>(b_.size()));
    return std::move(ops_);
  }

 private:
  void emit(OpKind kind, int n) { ops_.insert(ops_.end(), static_cast<std::size_t>(n), kind); }

  void compare(int a_lo, int a_hi, int b_lo, int b_hi) {
    int prefix = 0;
    while (a_lo + prefix < a_hi && b_lo + prefix < b_hi && a_[a_lo + prefix] == b_[b_lo + prefix]) {
      ++prefix;
    }
    emit(OpKind::Keep, prefix);
    a_lo += prefix;
    b_lo += prefix;

    int suffix = 0;
    while (a_hi - suffix > a_lo && b_hi - suffix > b_lo &&
           a_[a_hi - suffix - 1] == b_[b_hi - suffix - 1]) {
      ++suffix;
    }
    a_hi -= suffix;
    b_hi -= suffix;

    if (a_lo == a_hi) {
      emit(OpKind::Insert, b_hi - b_lo);
    } else if (b_lo == b_hi) {
      emit(OpKind::Delete, a_hi - a_lo);
    } else {
      bisect(a_lo, a_hi, b_lo, b_hi);
    }
    emit(OpKind::Keep, suffix);
  }

  // Finds the middle snake of the shortest edit path by running the greedy
  // search from both ends, then recurses on the halves either side of it.
  void bisect(int a_lo, int a_hi, int b_lo, int b_hi) {
    const int n = a_hi - a_lo;
    const int m = b_hi - b_lo;
    const int max_d = (n + m + 1) / 2;
    const int v_offset = max_d;
    const int v_length = 2 * max_d + 2;
    std::vector<int> v1(static_cast<std::size_t>(v_length), -1);
    std::vector<int> v2(static_cast<std::size_t>(v_length), -1);
    v1[static_cast<std::size_t>(v_offset + 1)] = 0;
    v2[static_cast<std::size_t>(v_offset + 1)] = 0;
    const int delta = n - m;
    const bool front = (delta % 2) != 0;
    int k1start = 0, k1end = 0, k2start = 0, k2end = 0;
    const auto A = [&](int i) { return a_[static_cast<std::size_t>(a_lo + i)]; };
    const auto B = [&](int j) { return b_[static_cast<std::size_t>(b_lo + j)]; };
    const auto at = [](std::vector<int>& v, int i) -> int& { return v[static_cast<std::size_t>(i)]; };

    for (int d = 0; d < max_d; ++d) {
      for (int k1 = -d + k1start; k1 <= d - k1end; k1 += 2) {
        const int k1_offset = v_offset + k1;
        int x1 = 0;
        // Ties move right (a deletion), so deletions are preferred.
        if (k1 == -d || (k1 != d && at(v1, k1_offset - 1) < at(v1, k1_offset + 1))) {
          x1 = at(v1, k1_offset + 1);
        } else {
          x1 = at(v1, k1_offset - 1) + 1;
        }
        int y1 = x1 - k1;
        while (x1 < n && y1 < m && A(x1) == B(y1)) {
          ++x1;
          ++y1;
        }
        at(v1, k1_offset) = x1;
        if (x1 > n) {
          k1end += 2;
        } else if (y1 > m) {
          k1start += 2;
        } else if (front) {
          const int k2_offset = v_offset + delta - k1;
          if (k2_offset >= 0 && k2_offset < v_length && at(v2, k2_offset) != -1) {
            const int x2 = n - at(v2, k2_offset);
            if (x1 >= x2) {
              split(a_lo, a_hi, b_lo, b_hi, x1, y1);
              return;
            }
          }
        }
      }

      for (int k2 = -d + k2start; k2 <= d - k2end; k2 += 2) {
        const int k2_offset = v_offset + k2;
        int x2 = 0;
        if (k2 == -d || (k2 != d && at(v2, k2_offset - 1) < at(v2, k2_offset + 1))) {
          x2 = at(v2, k2_offset + 1);
        } else {
          x2 = at(v2, k2_offset - 1) + 1;
        }
        int y2 = x2 - k2;
        while (x2 < n && y2 < m && A(n - x2 - 1) == B(m - y2 - 1)) {
          ++x2;
          ++y2;
        }
        at(v2, k2_offset) = x2;
        if (x2 > n) {
          k2end += 2;
        } else if (y2 > m) {
          k2start += 2;
        } else if (!front) {
          const int k1_offset = v_offset + delta - k2;
          if (k1_offset >= 0 && k1_offset < v_length && at(v1, k1_offset) != -1) {
            const int x1 = at(v1, k1_offset);
            const int y1 = v_offset + x1 - k1_offset;
            if (x1 >= n - x2) {
              split(a_lo, a_hi, b_lo, b_hi, x1, y1);
              return;
            }
          }
        }
      }
    }
    // No overlap: nothing in common.
    emit(OpKind::Delete, n);
    emit(OpKind::Insert, m);
  }

  void split(int a_lo, int a_hi, int b_lo, int b_hi, int x, int y) {
    compare(a_lo, a_lo + x, b_lo, b_lo + y);
    compare(a_lo + x, a_hi, b_lo + y, b_hi);
  }

  std::vector<int> a_;
  std::vector<int> b_;
  std::vector<OpKind> ops_;
};

// Reorders every maximal run of changes so its deletions come first.
std::vector<OpKind> deletions_first(const std::vector<OpKind>& raw) {
  std::vector<OpKind> out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    if (raw[i] == OpKind::Keep) {
      out.push_back(OpKind::Keep);
      ++i;
      continue;
    }
    std::size_t dels = 0, ins = 0;
    while (i < raw.size() && raw[i] != OpKind::Keep) {
      (raw[i] == OpKind::Delete ? dels : ins) += 1;
      ++i;
    }
    out.insert(out.end(), dels, OpKind::Delete);
    out.insert(out.end(), ins, OpKind::Insert);
  }
  return out;
}

}  // namespace

EditScript line_diff(std::span<const std::string> a, std::span<const std::string> b) {
  std::unordered_map<std::string_view, int> ids;
  const auto intern = [&](std::span<const std::string> lines) {
    std::vector<int> out;
    out.reserve(lines.size());
    for (const auto& line : lines) {
      auto [it, inserted] = ids.try_emplace(line, static_cast<int>(ids.size()));
      out.push_back(it->second);
    }
    return out;
  };
  auto ai = intern(a);
  auto bi = intern(b);
  const auto kinds = deletions_first(Differ(std::move(ai), std::move(bi)).run());

  EditScript script;
  script.ops.reserve(kinds.size());
  int a_pos = 0;
  int b_pos = 0;
  for (OpKind kind : kinds) {
    switch (kind) {
      case OpKind::Keep:
        ++a_pos;
        ++b_pos;
        script.ops.push_back({OpKind::Keep, a_pos, b_pos, a[static_cast<std::size_t>(a_pos - 1)]});
        break;
      case OpKind::Delete:
        ++a_pos;
        script.ops.push_back({OpKind::Delete, a_pos, b_pos, a[static_cast<std::size_t>(a_pos - 1)]});
        break;
      case OpKind::Insert:
        ++b_pos;
        script.ops.push_back({OpKind::Insert, a_pos, b_pos, b[static_cast<std::size_t>(b_pos - 1)]});
        break;
    }
  }
  return script;
}

EditScript line_diff(std::string_view a, std::string_view b) {
  const auto al = text::split_lines(a);
  const auto bl = text::split_lines(b);
  return line_diff(std::span<const std::string>(al), std::span<const std::string>(bl));
}

std::vector<std::string> apply(const EditScript& script, std::span<const std::string> a) {
  std::vector<std::string> out;
  std::size_t next = 0;  // next unconsumed A index
  for (const auto& op : script.ops) {
    if (op.kind == OpKind::Insert) {
      if (static_cast<std::size_t>(op.a_line) != next) {
        throw Error(Errc::PreconditionViolation, "insert anchor out of order");
      }
      out.push_back(op.text);
      continue;
    }
    if (static_cast<std::size_t>(op.a_line) != next + 1 || next >= a.size() || a[next] != op.text) {
      throw Error(Errc::PreconditionViolation,
                  "edit script does not match input at line " + std::to_string(op.a_line));
    }
    if (op.kind == OpKind::Keep) out.push_back(a[next]);
    ++next;
  }
  if (next != a.size()) throw Error(Errc::PreconditionViolation, "edit script does not cover input");
  return out;
}

std::string render_unified(const EditScript& script, std::string_view a_name,
                           std::string_view b_name, int context) {
  if (context < 0) throw Error(Errc::PreconditionViolation, "context must be >= 0");
  std::string out;
  out += "--- ";
  out += a_name;
  out += "\n+++ ";
  out += b_name;
  out += "\n";

  const auto& ops = script.ops;
  const int total = static_cast<int>(ops.size());
  // a_before[i] / b_before[i]: lines of A / B consumed before op i.
  std::vector<int> a_before(ops.size() + 1, 0), b_before(ops.size() + 1, 0);
  for (int i = 0; i < total; ++i) {
    const auto& op = ops[static_cast<std::size_t>(i)];
    a_before[i + 1] = a_before[i] + (op.kind != OpKind::Insert ? 1 : 0);
    b_before[i + 1] = b_before[i] + (op.kind != OpKind::Delete ? 1 : 0);
  }

  int i = 0;
  while (i < total) {
    if (ops[static_cast<std::size_t>(i)].kind == OpKind::Keep) {
      ++i;
      continue;
    }
    // Grow the hunk while the keep-gap to the next change is <= 2*context.
    const int first_change = i;
    int last_change = i;
    int j = i;
    while (j < total) {
      if (ops[static_cast<std::size_t>(j)].kind != OpKind::Keep) {
        last_change = j;
        ++j;
        continue;
      }
      int k = j;
      while (k < total && ops[static_cast<std::size_t>(k)].kind == OpKind::Keep) ++k;
      if (k < total && k - j <= 2 * context) {
        j = k;
      } else {
        break;
      }
    }
    const int start = std::max(0, first_change - context);
    const int end = std::min(total, last_change + 1 + context);

    const int a_count = a_before[end] - a_before[start];
    const int b_count = b_before[end] - b_before[start];
    const int a_start = a_count > 0 ? a_before[start] + 1 : a_before[start];
    const int b_start = b_count > 0 ? b_before[start] + 1 : b_before[start];
    out += "@@ -" + std::to_string(a_start) + "," + std::to_string(a_count) + " +" +
           std::to_string(b_start) + "," + std::to_string(b_count) + " @@\n";
    for (int h = start; h < end; ++h) {
      const auto& op = ops[static_cast<std::size_t>(h)];
      out += op.kind == OpKind::Keep ? ' ' : (op.kind == OpKind::Delete ? '-' : '+');
      out += op.text;
      out += '\n';
    }
    i = end;
  }
  return out;
}

namespace {

int parse_int(std::string_view s) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(Errc::PreconditionViolation, "bad hunk header number: " + std::string(s));
  }
  return value;
}

// "-12,3" -> {12, 3}; a missing count means 1.
std::pair<int, int> parse_range(std::string_view field) {
  field.remove_prefix(1);
  const auto comma = field.find(',');
  if (comma == std::string_view::npos) return {parse_int(field), 1};
  return {parse_int(field.substr(0, comma)), parse_int(field.substr(comma + 1))};
}

}  // namespace

std::vector<std::string> apply_unified(std::string_view patch, std::span<const std::string> a) {
  const auto lines = text::split_lines(patch);
  std::vector<std::string> out;
  std::size_t next = 0;  // next unconsumed A index
  std::size_t i = 0;
  while (i < lines.size() && lines[i].rfind("@@", 0) != 0) ++i;  // skip headers

  while (i < lines.size()) {
    const std::string& header = lines[i];
    if (header.rfind("@@ ", 0) != 0) {
      throw Error(Errc::PreconditionViolation, "expected hunk header, got: " + header);
    }
    const auto close = header.find(" @@", 3);
    if (close == std::string::npos) throw Error(Errc::PreconditionViolation, "bad hunk header");
    const std::string_view ranges(header.data() + 3, close - 3);
    const auto space = ranges.find(' ');
    const auto [a_start, a_count] = parse_range(ranges.substr(0, space));

    const std::size_t copy_until = static_cast<std::size_t>(a_count == 0 ? a_start : a_start - 1);
    if (copy_until < next || copy_until > a.size()) {
      throw Error(Errc::PreconditionViolation, "hunk out of order: " + header);
    }
    while (next < copy_until) out.push_back(a[next++]);

    ++i;
    while (i < lines.size() && lines[i].rfind("@@", 0) != 0) {
      const std::string& body = lines[i++];
      if (body.empty()) throw Error(Errc::PreconditionViolation, "empty hunk line");
      const std::string content = body.substr(1);
      switch (body.front()) {
        case ' ':
        case '-':
          if (next >= a.size() || a[next] != content) {
            throw Error(Errc::PreconditionViolation, "context mismatch at A line " + std::to_string(next + 1));
          }
          if (body.front() == ' ') out.push_back(content);
          ++next;
          break;
        case '+':
          out.push_back(content);
          break;
        case '\\':
          break;  // "\ No newline at end of file"
        default:
          throw Error(Errc::PreconditionViolation, "bad hunk line: " + body);
      }
    }
  }
  while (next < a.size()) out.push_back(a[next++]);
  return out;
}

ChangedLineSet changed_lines(const EditScript& script) {
  ChangedLineSet touched;
  for (const auto& op : script.ops) {
    if (op.kind != OpKind::Keep) touched.insert(op.a_line);
  }
  return touched;
}

ChangedLineSet changed_lines(std::string_view a, std::string_view b) {
  return changed_lines(line_diff(a, b));
}

std::string_view FunctionMap::name_at(int line) const noexcept {
  for (const auto& span : spans) {
    if (line >= span.start_line && line <= span.end_line) return span.name;
  }
  return kModuleScope;
}

namespace {

int indentation_width(std::string_view line) {
  int width = 0;
  for (char c : line) {
    if (c == ' ') {
      ++width;
    } else if (c == '\t') {
      width = (width / 8 + 1) * 8;
    } else {
      break;
    }
  }
  return width;
}

bool is_structural(std::string_view line) {
  const auto t = text::trim(line);
  return !t.empty() && t.front() != '#';
}

}  // namespace

FunctionMap function_map(std::string_view source) {
  static const std::regex header(R"(^[ \t]*(?:async[ \t]+)?def[ \t]+([A-Za-z_][A-Za-z0-9_]*)[ \t]*\()");

  const auto lines = text::split_lines(source);
  FunctionMap map;
  map.line_count = static_cast<int>(lines.size());

  struct Frame {
    std::string name;
    int indent;
    int start;
  };
  std::vector<Frame> open;
  // Per line: index into `frames` of the innermost function, or -1.
  std::vector<Frame> frames;
  std::vector<int> owner(lines.size(), -1);
  std::vector<int> open_ids;

  // Blank and comment lines wait for the next structural line: they belong
  // to whatever is still open once that line has closed its frames.
  std::vector<std::size_t> pending;
  auto settle = [&] {
    for (auto p : pending) owner[p] = open_ids.empty() ? -1 : open_ids.back();
    pending.clear();
  };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (!is_structural(line)) {
      pending.push_back(i);
      continue;
    }
    {
      const int indent = indentation_width(line);
      while (!open.empty() && open.back().indent >= indent) {
        open.pop_back();
        open_ids.pop_back();
      }
      settle();
      std::smatch m;
      if (std::regex_search(line, m, header)) {
        Frame f{m[1].str(), indent, static_cast<int>(i) + 1};
        open.push_back(f);
        frames.push_back(f);
        open_ids.push_back(static_cast<int>(frames.size()) - 1);
      }
    }
    owner[i] = open_ids.empty() ? -1 : open_ids.back();
  }
  open_ids.clear();
  settle();

  // Compress consecutive lines owned by the same definition into spans.
  std::size_t i = 0;
  while (i < owner.size()) {
    const int id = owner[i];
    std::size_t j = i;
    while (j < owner.size() && owner[j] == id) ++j;
    if (id >= 0) {
      map.spans.push_back(FunctionSpan{frames[static_cast<std::size_t>(id)].name,
                                       static_cast<int>(i) + 1, static_cast<int>(j)});
    }
    i = j;
  }
  return map;
}

}  // namespace agentmend::diff
