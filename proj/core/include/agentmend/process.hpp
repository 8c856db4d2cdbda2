#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace agentmend {

struct ProcessSpec {
  std::vector<std::string> argv;  // argv[0] resolved against PATH from `env`
  std::filesystem::path cwd;
  std::map<std::string, std::string> env;  // the child's entire environment
  double timeout = 300.0;                  // seconds
  std::size_t max_output = 1 << 20;        // per stream; the rest is dropped
};

struct ProcessResult {
  int exit_code = -1;  // -1 when killed by a signal or never started
  int signal = 0;
  bool timed_out = false;
  bool spawn_failed = false;
  std::string stdout_text;
  std::string stderr_text;
  double duration = 0.0;
};

/// fork/exec with captured output. The child runs in its own process group,
/// which is killed as a whole on timeout.
ProcessResult run_process(const ProcessSpec& spec);

/// Whitespace-separated words with '...' and "..." quoting.
std::vector<std::string> split_command(std::string_view command);

/// Absolute path of an executable, searched in `path_var` (colon-separated)
/// when the name has no slash. Empty when not found.
std::string find_executable(const std::string& name, const std::string& path_var);

}  // namespace agentmend
