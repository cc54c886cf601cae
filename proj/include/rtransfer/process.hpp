#pragma once

// Running external hook commands through /bin/sh.

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "rtransfer/error.hpp"
#include "rtransfer/io.hpp"

extern char** environ;

namespace rtransfer::process {

/// Single-quotes `s` for /bin/sh.
inline std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  out += "'";
  return out;
}

/// Replaces every `{name}` in `tmpl` by the shell-quoted value. Unknown
/// placeholders are left alone.
inline std::string expand_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = values.find(std::string(tmpl.substr(i + 1, close - i - 1)));
        if (it != values.end()) {
          out += shell_quote(it->second);
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

struct CommandResult {
  int exit_code = 0;
  std::string output_tail;
};

/// Runs `command` with `sh -c`, stdout and stderr written to `log_path`.
/// Returns the exit code (128 + signal for a killed child) and the log tail.
inline CommandResult run_shell(const std::string& command, const std::filesystem::path& log_path) {
  if (log_path.has_parent_path()) std::filesystem::create_directories(log_path.parent_path());
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);

  const char* argv[] = {"/bin/sh", "-c", command.c_str(), nullptr};
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, "/bin/sh", &actions, nullptr, const_cast<char* const*>(argv), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw Error(ErrorKind::HookFailure, "cannot spawn /bin/sh: " + std::to_string(rc));

  int status = 0;
  while (waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw Error(ErrorKind::HookFailure, "waitpid failed");
  }
  CommandResult result;
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  else if (WIFSIGNALED(status)) result.exit_code = 128 + WTERMSIG(status);
  else result.exit_code = -1;

  std::error_code ec;
  if (std::filesystem::exists(log_path, ec)) {
    const std::string log = io::read_file(log_path);
    constexpr std::size_t kTail = 2048;
    result.output_tail = log.size() > kTail ? log.substr(log.size() - kTail) : log;
  }
  return result;
}

}  // namespace rtransfer::process
