#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <regex>

#include "lintseq/lint.hpp"
#include "lintseq/text.hpp"

namespace lintseq::external {

CompiledPattern compile_pattern(std::string_view pattern) {
  CompiledPattern out;
  std::size_t group = 0;
  bool in_class = false;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const char c = pattern[i];
    if (c == '\\' && i + 1 < pattern.size()) {
      out.ecmascript += pattern.substr(i, 2);
      ++i;
      continue;
    }
    if (in_class) {
      if (c == ']') in_class = false;
      out.ecmascript += c;
      continue;
    }
    if (c == '[') {
      in_class = true;
      out.ecmascript += c;
      continue;
    }
    if (c != '(') {
      out.ecmascript += c;
      continue;
    }
    const std::string_view rest = pattern.substr(i + 1);
    std::size_t name_begin = 0;
    if (rest.starts_with("?P<")) {
      name_begin = 3;
    } else if (rest.starts_with("?<") && !rest.starts_with("?<=") && !rest.starts_with("?<!")) {
      name_begin = 2;
    } else if (rest.starts_with("?")) {
      out.ecmascript += c;  // non-capturing or lookaround
      continue;
    }
    ++group;
    out.ecmascript += '(';
    if (name_begin == 0) continue;
    const std::size_t name_end = rest.find('>', name_begin);
    if (name_end == std::string_view::npos) throw std::invalid_argument("unterminated group name in pattern");
    const std::string_view name = rest.substr(name_begin, name_end - name_begin);
    if (name == "line") out.line_group = group;
    if (name == "code") out.code_group = group;
    if (name == "message") out.message_group = group;
    if (name == "severity") out.severity_group = group;
    i += name_end + 1;
  }
  return out;
}

std::string normalize_message(std::string_view message, std::string_view path) {
  std::string text(message);
  if (!path.empty()) {
    for (std::size_t at = text.find(path); at != std::string::npos; at = text.find(path, at)) {
      text.replace(at, path.size(), "<file>");
      at += 6;
    }
  }
  static const std::regex location(R"(\b(line|lines|col|column)\s+\d+(\s*[:,-]\s*\d+)?)", std::regex::icase);
  text = std::regex_replace(text, location, "$1");
  static const std::regex colon_pos(R"(:\d+(:\d+)?\b)");
  text = std::regex_replace(text, colon_pos, "");
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.pop_back();
  return text;
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += "'";
  return out;
}

std::filesystem::path temp_dir() {
  if (const char* env = std::getenv("LINTSEQ_TMPDIR"); env != nullptr && *env != '\0') return env;
  return std::filesystem::temp_directory_path();
}

struct TempFile {
  std::filesystem::path path;
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
};

// Runs `sh -c command`, returns stdout. Exit status is ignored.
std::string run_command(const std::string& command, std::chrono::milliseconds timeout, std::uint64_t hash) {
  int pipefd[2];
  if (pipe(pipefd) != 0) throw LintError(std::string("pipe failed: ") + std::strerror(errno));
  const pid_t pid = fork();
  if (pid < 0) {
    close(pipefd[0]);
    close(pipefd[1]);
    throw LintError(std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    setpgid(0, 0);
    dup2(pipefd[1], STDOUT_FILENO);
    const int devnull = open("/dev/null", O_RDWR);
    if (devnull >= 0) {
      dup2(devnull, STDIN_FILENO);
      dup2(devnull, STDERR_FILENO);
    }
    close(pipefd[0]);
    close(pipefd[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);
  close(pipefd[1]);
  std::string output;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  bool timed_out = false;
  char buf[4096];
  while (true) {
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      timed_out = true;
      break;
    }
    pollfd pfd{pipefd[0], POLLIN, 0};
    const int ready = poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (ready == 0) {
      timed_out = true;
      break;
    }
    const ssize_t got = read(pipefd[0], buf, sizeof buf);
    if (got < 0 && errno == EINTR) continue;
    if (got <= 0) break;
    output.append(buf, static_cast<std::size_t>(got));
  }
  close(pipefd[0]);
  if (timed_out) {
    kill(-pid, SIGKILL);
    kill(pid, SIGKILL);
  }
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (timed_out) throw LinterTimeout(hash);
  return output;
}

}  // namespace

LintReport run(std::string_view program, const LinterSpec& linter) {
  static std::atomic<std::uint64_t> counter{0};
  const std::uint64_t hash = content_hash(program);
  TempFile file;
  file.path = temp_dir() / ("lintseq-" + std::to_string(getpid()) + "-" + hex64(hash) + "-" +
                            std::to_string(counter.fetch_add(1)) + ".py");
  {
    std::ofstream out(file.path, std::ios::binary);
    if (!out) throw LintError("cannot write linter temp file " + file.path.string());
    out << program;
  }
  const std::string path = file.path.string();
  const std::string stem = file.path.stem().string();
  std::string command = linter.command_template;
  for (std::size_t at = command.find(kPathPlaceholder); at != std::string::npos;
       at = command.find(kPathPlaceholder, at)) {
    const std::string quoted = shell_quote(path);
    command.replace(at, kPathPlaceholder.size(), quoted);
    at += quoted.size();
  }
  const std::string output = run_command(command, linter.timeout, hash);

  const CompiledPattern compiled = compile_pattern(linter.finding_pattern);
  const std::regex re(compiled.ecmascript);
  const std::size_t total_lines = std::max<std::size_t>(1, split_lines(program).size());
  std::vector<LintFinding> findings;
  std::size_t skipped = 0;
  for (const auto& raw : split_lines(output)) {
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    std::smatch m;
    if (!std::regex_search(line, m, re)) {
      ++skipped;
      continue;
    }
    LintFinding f;
    try {
      f.line = static_cast<std::size_t>(std::stoul(m[compiled.line_group].str()));
    } catch (const std::exception&) {
      ++skipped;
      continue;
    }
    f.line = std::clamp<std::size_t>(f.line, 1, total_lines);
    f.code = m[compiled.code_group].str();
    f.message = normalize_message(normalize_message(m[compiled.message_group].str(), path), stem);
    std::string sev = compiled.severity_group ? m[compiled.severity_group].str() : std::string();
    if (!sev.empty()) {
      const char s = static_cast<char>(std::tolower(static_cast<unsigned char>(sev[0])));
      f.severity = (s == 'e' || s == 'f') ? Severity::Error : Severity::Warning;
    } else {
      const char c = f.code.empty() ? 'E' : f.code[0];
      f.severity = (c == 'E' || c == 'F' || c == 'e' || c == 'f') ? Severity::Error : Severity::Warning;
    }
    if (f.severity == Severity::Warning && !linter.include_warnings) continue;
    findings.push_back(std::move(f));
  }
  LintReport report = make_report(std::move(findings));
  report.skipped_output_lines = skipped;
  return report;
}

}  // namespace lintseq::external
