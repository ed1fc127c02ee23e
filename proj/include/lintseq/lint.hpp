#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lintseq {

enum class Severity { Error, Warning };

struct LintFinding {
  std::string code;
  std::string message;  // location tokens stripped
  std::size_t line = 0; // 1-based line in the checked text
  Severity severity = Severity::Error;

  bool operator==(const LintFinding&) const = default;
};

// Sorted multiset of (code, message); line numbers erased.
using Fingerprint = std::vector<std::pair<std::string, std::string>>;

struct LintReport {
  std::vector<LintFinding> findings;
  Fingerprint fingerprint;
  std::size_t skipped_output_lines = 0;  // external linter lines the pattern did not match

  bool clean() const { return findings.empty(); }
  bool operator==(const LintReport&) const = default;
};

// Sorts findings by (line, code, message) and derives the fingerprint.
LintReport make_report(std::vector<LintFinding> findings);

enum class LinterKind { Builtin, External };

// `path:line:col: CODE message`
inline constexpr std::string_view kPresetFindingPattern =
    R"(^(?P<path>.+?):(?P<line>\d+):(?P<col>\d+):\s*(?P<code>[A-Za-z]+[0-9]*)\s+(?P<message>.*)$)";
inline constexpr std::string_view kPathPlaceholder = "{path}";

struct LinterSpec {
  LinterKind kind = LinterKind::Builtin;
  std::string command_template;  // external: must contain {path}
  std::string finding_pattern;   // external: named groups line, code, message
  std::chrono::milliseconds timeout{10000};
  bool include_warnings = false;

  static LinterSpec builtin();
  static LinterSpec external(std::string command_template,
                             std::string finding_pattern = std::string(kPresetFindingPattern));

  // Throws std::invalid_argument.
  void validate() const;
};

class LintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LinterTimeout : public LintError {
 public:
  explicit LinterTimeout(std::uint64_t program_hash);
  std::uint64_t program_hash() const { return program_hash_; }

 private:
  std::uint64_t program_hash_;
};

// Uncached. An empty program always yields an empty report.
LintReport check(std::string_view program, const LinterSpec& linter);

bool same_trace(const LintReport& candidate, const LintReport& baseline);

// Lines (1-based, sorted, unique) of findings in `candidate` whose
// (code, message) count exceeds the baseline's count.
std::vector<std::size_t> new_finding_lines(const LintReport& candidate, const LintReport& baseline);

bool is_error_free_relative(std::string_view candidate, const LintReport& baseline,
                            const LinterSpec& linter);

// Throws LintError when the candidate is still error-free relative to the
// baseline, or when it differs only by missing findings.
std::vector<std::size_t> affected_lines(std::string_view candidate, const LintReport& baseline,
                                        const LinterSpec& linter);

struct LinterOptions {
  std::size_t cache_capacity = 1 << 16;
  std::size_t max_processes = 4;
};

// Thread-safe checker with a content-keyed report cache and a bound on
// concurrently running external processes.
class Linter {
 public:
  explicit Linter(LinterSpec spec, LinterOptions options = {});
  ~Linter();
  Linter(const Linter&) = delete;
  Linter& operator=(const Linter&) = delete;

  const LinterSpec& spec() const { return spec_; }

  LintReport check(std::string_view program) const;
  bool is_error_free_relative(std::string_view candidate, const LintReport& baseline) const;
  std::vector<std::size_t> affected_lines(std::string_view candidate, const LintReport& baseline) const;

  std::size_t cache_hits() const;
  std::size_t cache_misses() const;

 private:
  struct State;
  LinterSpec spec_;
  std::unique_ptr<State> state_;
};

namespace python {

// Line-oriented Python surface checker: bracket balance, string
// termination, indentation/block structure, clause pairing, statement
// placement, simple expression shape, and name definition-before-use.
std::vector<LintFinding> check_source(std::string_view source);

}  // namespace python

namespace external {

// Runs the command for one program and parses its stdout.
LintReport run(std::string_view program, const LinterSpec& linter);

// Rewrites (?P<name>..) / (?<name>..) groups to plain groups and returns
// the capture index of each name (0 when absent).
struct CompiledPattern {
  std::string ecmascript;
  std::size_t line_group = 0;
  std::size_t code_group = 0;
  std::size_t message_group = 0;
  std::size_t severity_group = 0;
};
CompiledPattern compile_pattern(std::string_view pattern);

std::string normalize_message(std::string_view message, std::string_view path);

}  // namespace external

}  // namespace lintseq
