#include "lintseq/lint.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <thread>

namespace lintseq {
namespace {

LinterSpec fake(bool warnings = false) {
  LinterSpec spec = LinterSpec::external("python3 " LINTSEQ_TEST_DATA "/fake_linter.py {path}");
  spec.include_warnings = warnings;
  spec.timeout = std::chrono::milliseconds(5000);
  return spec;
}

TEST(ExternalLinter, ParsesFindingsAndIgnoresExitStatus) {
  const auto r = check("x = 1\nprint(MISSING)\n", fake());
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_EQ(r.findings[0].code, "E0602");
  EXPECT_EQ(r.findings[0].line, 2u);
  EXPECT_EQ(r.findings[0].severity, Severity::Error);
  EXPECT_EQ(r.findings[0].message, "Undefined variable 'MISSING' (<file>)");
  EXPECT_EQ(r.skipped_output_lines, 2u);
}

TEST(ExternalLinter, FingerprintIndependentOfPositionAndTempPath) {
  const auto a = check("print(MISSING)\n", fake());
  const auto b = check("\n\n\nprint(MISSING)\n", fake());
  EXPECT_TRUE(same_trace(a, b));
}

TEST(ExternalLinter, WarningsFilteredByDefault) {
  EXPECT_TRUE(check("# NOTE\n", fake()).clean());
  const auto r = check("# NOTE\n\n# NOTE\n", fake(true));
  ASSERT_EQ(r.findings.size(), 2u);
  EXPECT_EQ(r.findings[0].severity, Severity::Warning);
  EXPECT_EQ(r.findings[0].message, "note at line");
  EXPECT_TRUE(same_trace(r, check("# NOTE\n# NOTE\n", fake(true))));
}

TEST(ExternalLinter, AffectedLinesThroughExternalTool) {
  const auto base = check("x = 1\n", fake());
  EXPECT_EQ(affected_lines("x = 1\ny = MISSING\n", base, fake()), std::vector<std::size_t>{2});
}

TEST(ExternalLinter, Timeout) {
  LinterSpec spec = fake();
  spec.timeout = std::chrono::milliseconds(300);
  const auto start = std::chrono::steady_clock::now();
  EXPECT_THROW(check("SLEEP\n", spec), LinterTimeout);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(10));
}

TEST(ExternalLinter, HonoursTempDirOverride) {
  const auto dir = std::filesystem::temp_directory_path() / "lintseq_tmp_override";
  std::filesystem::create_directories(dir);
  ::setenv("LINTSEQ_TMPDIR", dir.c_str(), 1);
  const auto r = check("print(MISSING)\n", fake());
  ::unsetenv("LINTSEQ_TMPDIR");
  EXPECT_EQ(r.findings.size(), 1u);
  EXPECT_TRUE(std::filesystem::is_empty(dir));  // temp file cleaned up
  std::filesystem::remove_all(dir);
}

TEST(ExternalLinter, PathWithSpacesIsQuoted) {
  const auto dir = std::filesystem::temp_directory_path() / "lintseq dir with 'quote";
  std::filesystem::create_directories(dir);
  ::setenv("LINTSEQ_TMPDIR", dir.c_str(), 1);
  const auto r = check("print(MISSING)\n", fake());
  ::unsetenv("LINTSEQ_TMPDIR");
  EXPECT_EQ(r.findings.size(), 1u);
  std::filesystem::remove_all(dir);
}

TEST(ExternalLinter, MissingCommandYieldsNoFindings) {
  // A command that cannot run still produces a report; exit status is ignored.
  const auto r = check("x = 1\n", LinterSpec::external("/nonexistent/linter {path}"));
  EXPECT_TRUE(r.clean());
}

TEST(FindingPattern, NamedGroupRewrite) {
  const auto c = external::compile_pattern(kPresetFindingPattern);
  EXPECT_EQ(c.line_group, 2u);
  EXPECT_EQ(c.code_group, 4u);
  EXPECT_EQ(c.message_group, 5u);
  const auto d = external::compile_pattern(R"((?<line>\d+) (?:x|y) (?P<code>\w+)(?<message>.*))");
  EXPECT_EQ(d.line_group, 1u);
  EXPECT_EQ(d.code_group, 2u);
  EXPECT_EQ(d.message_group, 3u);
  EXPECT_EQ(external::compile_pattern(R"(\(?P<line>x\))").line_group, 0u);
}

TEST(NormalizeMessage, StripsPositions) {
  EXPECT_EQ(external::normalize_message("bad thing at line 12, col 3", ""), "bad thing at line, col");
  EXPECT_EQ(external::normalize_message("/tmp/a.py:3:4: oops", "/tmp/a.py"), "<file>: oops");
  EXPECT_EQ(external::normalize_message("'x' defined at line 4 unused", ""), "'x' defined at line unused");
}

TEST(Linter, BoundsConcurrentProcesses) {
  Linter linter(fake(), LinterOptions{16, 2});
  std::vector<std::jthread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&linter, t] { linter.check("v" + std::to_string(t) + " = MISSING\n"); });
  }
  threads.clear();
  EXPECT_EQ(linter.cache_misses(), 4u);
}

}  // namespace
}  // namespace lintseq
