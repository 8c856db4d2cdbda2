#include "agentmend/process.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include "agentmend/error.hpp"

namespace agentmend {

std::vector<std::string> split_command(std::string_view command) {
  std::vector<std::string> words;
  std::string cur;
  bool in_word = false;
  char quote = 0;
  for (char c : command) {
    if (quote != 0) {
      if (c == quote) {
        quote = 0;
      } else {
        cur += c;
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
      in_word = true;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (in_word) words.push_back(std::move(cur));
      cur.clear();
      in_word = false;
    } else {
      cur += c;
      in_word = true;
    }
  }
  if (quote != 0) throw Error(Errc::ConfigInvalid, "unterminated quote in command: " + std::string(command));
  if (in_word) words.push_back(std::move(cur));
  return words;
}

std::string find_executable(const std::string& name, const std::string& path_var) {
  auto executable = [](const std::string& p) {
    struct stat st {};
    return ::stat(p.c_str(), &st) == 0 && S_ISREG(st.st_mode) && ::access(p.c_str(), X_OK) == 0;
  };
  if (name.find('/') != std::string::npos) return executable(name) ? name : std::string{};
  std::size_t start = 0;
  while (start <= path_var.size()) {
    auto end = path_var.find(':', start);
    if (end == std::string::npos) end = path_var.size();
    auto dir = path_var.substr(start, end - start);
    if (dir.empty()) dir = ".";
    const auto candidate = dir + "/" + name;
    if (executable(candidate)) return candidate;
    start = end + 1;
  }
  return {};
}

namespace {

struct Pipe {
  int fds[2] = {-1, -1};
  Pipe() {
    if (::pipe2(fds, O_CLOEXEC) != 0) throw Error(Errc::SandboxSetupError, std::string("pipe: ") + std::strerror(errno));
  }
  ~Pipe() {
    for (int& fd : fds) {
      if (fd >= 0) ::close(fd);
    }
  }
  void close_end(int i) {
    if (fds[i] >= 0) ::close(fds[i]);
    fds[i] = -1;
  }
};

}  // namespace

ProcessResult run_process(const ProcessSpec& spec) {
  if (spec.argv.empty()) throw Error(Errc::PreconditionViolation, "empty command");
  ProcessResult result;
  const auto path_it = spec.env.find("PATH");
  const auto exe = find_executable(spec.argv[0], path_it == spec.env.end() ? "/usr/bin:/bin" : path_it->second);
  if (exe.empty()) {
    result.spawn_failed = true;
    result.stderr_text = "executable not found: " + spec.argv[0];
    return result;
  }

  // Everything the child touches is prepared before fork.
  std::vector<char*> argv;
  for (const auto& a : spec.argv) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  std::vector<std::string> env_strings;
  for (const auto& [k, v] : spec.env) env_strings.push_back(k + "=" + v);
  std::vector<char*> envp;
  for (auto& e : env_strings) envp.push_back(e.data());
  envp.push_back(nullptr);
  const std::string cwd = spec.cwd.string();

  Pipe out, err, status;
  const auto start = std::chrono::steady_clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) throw Error(Errc::SandboxSetupError, std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    const int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    ::dup2(out.fds[1], STDOUT_FILENO);
    ::dup2(err.fds[1], STDERR_FILENO);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) {
      const int e = errno;
      (void)!::write(status.fds[1], &e, sizeof e);
      ::_exit(127);
    }
    ::execve(exe.c_str(), argv.data(), envp.data());
    const int e = errno;
    (void)!::write(status.fds[1], &e, sizeof e);
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  out.close_end(1);
  err.close_end(1);
  status.close_end(1);

  const auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                    std::chrono::duration<double>(spec.timeout));
  pollfd fds[2] = {{out.fds[0], POLLIN, 0}, {err.fds[0], POLLIN, 0}};
  std::string* sinks[2] = {&result.stdout_text, &result.stderr_text};
  int open_streams = 2;
  char buf[8192];
  while (open_streams > 0) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      result.timed_out = true;
      break;
    }
    const int n = ::poll(fds, 2, static_cast<int>(std::min<long long>(left.count(), 1000)));
    if (n < 0 && errno != EINTR) break;
    for (int i = 0; i < 2; ++i) {
      if (fds[i].fd < 0 || (fds[i].revents & (POLLIN | POLLHUP | POLLERR)) == 0) continue;
      const auto got = ::read(fds[i].fd, buf, sizeof buf);
      if (got <= 0) {
        fds[i].fd = -1;
        --open_streams;
        continue;
      }
      const auto room = spec.max_output > sinks[i]->size() ? spec.max_output - sinks[i]->size() : 0;
      sinks[i]->append(buf, std::min<std::size_t>(room, static_cast<std::size_t>(got)));
    }
  }

  int wstatus = 0;
  if (result.timed_out) {
    ::kill(-pid, SIGKILL);
    ::waitpid(pid, &wstatus, 0);
  } else {
    // Streams closed; the child may still be running if it closed them
    // itself, so wait with the remaining budget.
    while (true) {
      const pid_t r = ::waitpid(pid, &wstatus, WNOHANG);
      if (r == pid) break;
      if (r < 0 && errno != EINTR) break;
      if (std::chrono::steady_clock::now() >= deadline) {
        result.timed_out = true;
        ::kill(-pid, SIGKILL);
        ::waitpid(pid, &wstatus, 0);
        break;
      }
      ::usleep(2000);
    }
  }
  // Grandchildren holding the pipes must not outlive the test.
  ::kill(-pid, SIGKILL);
  result.duration = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  int child_errno = 0;
  if (::read(status.fds[0], &child_errno, sizeof child_errno) == static_cast<ssize_t>(sizeof child_errno)) {
    result.spawn_failed = true;
    result.stderr_text += std::string("exec failed: ") + std::strerror(child_errno);
  }
  if (result.timed_out) {
    result.exit_code = -1;
    result.signal = SIGKILL;
  } else if (WIFEXITED(wstatus)) {
    result.exit_code = WEXITSTATUS(wstatus);
  } else if (WIFSIGNALED(wstatus)) {
    result.exit_code = -1;
    result.signal = WTERMSIG(wstatus);
  }
  return result;
}

}  // namespace agentmend
