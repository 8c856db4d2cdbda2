#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agentmend::text {

/// Splits on '\n' after normalizing "\r\n" to "\n". A single trailing newline
/// does not produce an extra empty line, so "a\nb\n" and "a\nb" both give
/// {"a", "b"} and "" gives no lines.
std::vector<std::string> split_lines(std::string_view text);

/// Inverse of split_lines: joins with '\n' and terminates the last line.
std::string join_lines(const std::vector<std::string>& lines);

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b) noexcept;
bool is_blank(std::string_view s) noexcept;
bool has_line_break(std::string_view s) noexcept;

struct FirstLine {
  std::string line;
  bool had_more = false;  // other non-empty lines were dropped
};

/// First non-blank line, trimmed. Empty line field when the text is blank.
FirstLine first_nonempty_line(std::string_view text);

/// Rough token estimate used for prompt budgeting (4 characters per token).
std::size_t estimate_tokens(std::string_view s) noexcept;

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace agentmend::text
