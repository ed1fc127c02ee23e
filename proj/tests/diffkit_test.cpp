#include "lintseq/diffkit.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "json.hpp"
#include "lintseq/editcodec.hpp"
#include "lintseq/text.hpp"

namespace lintseq {
namespace {

using Lines = std::vector<std::string>;

ProgramState state(const Lines& source, std::vector<std::size_t> kept) {
  ProgramState s;
  for (auto i : kept) s.text += source[i] + "\n";
  s.kept_indices = std::move(kept);
  return s;
}

TEST(Diff, EmptyToOneLine) {
  const EditDiff d = diff(std::string_view(""), std::string_view("x = 1"));
  ASSERT_EQ(d.hunks.size(), 1u);
  EXPECT_EQ(d.render(), "@@ -0,0 +1 @@\n+x = 1");
}

TEST(Diff, IdenticalHasNoHunks) {
  EXPECT_TRUE(diff(std::string_view("a\nb\n"), std::string_view("a\nb\n")).empty());
  EXPECT_EQ(diff(std::string_view(""), std::string_view("")).render(), "");
}

TEST(Diff, DeleteMiddleLine) {
  const EditDiff d = diff(std::string_view("a\nb\nc"), std::string_view("a\nc"));
  ASSERT_EQ(d.hunks.size(), 1u);
  EXPECT_EQ(d.render(), "@@ -2 +1,0 @@\n-b");
}

TEST(Diff, ReplacementGroupsDeletionsBeforeInsertions) {
  const EditDiff d = diff(Lines{"a", "b", "c"}, Lines{"a", "x", "y", "c"});
  EXPECT_EQ(d.render(), "@@ -2 +2,2 @@\n-b\n+x\n+y");
}

TEST(Diff, MultipleHunks) {
  const EditDiff d = diff(Lines{"a", "b", "c", "d", "e"}, Lines{"z", "a", "c", "d", "e", "f"});
  EXPECT_EQ(d.render(), "@@ -0,0 +1 @@\n+z\n@@ -2 +2,0 @@\n-b\n@@ -5,0 +6 @@\n+f");
}

TEST(Diff, MinimalOnRepeatedLines) {
  // Myers is minimal: 2 edits, whatever the alignment.
  const Lines a{"x", "y", "x", "y"}, b{"y", "x", "y", "x"};
  const EditDiff d = diff(a, b);
  std::size_t edits = 0;
  for (const auto& h : d.hunks) edits += h.old_len + h.new_len;
  EXPECT_EQ(edits, 2u);
  EXPECT_EQ(lintseq::apply(a, d), b);
}

TEST(FormatRange, DifflibConvention) {
  EXPECT_EQ(format_range(0, 0), "0,0");
  EXPECT_EQ(format_range(3, 1), "3");
  EXPECT_EQ(format_range(3, 2), "3,2");
  EXPECT_EQ(format_range(4, 0), "4,0");
}

TEST(Diff, MatchesDifflibGoldens) {
  std::ifstream in(LINTSEQ_TEST_DATA "/diff_golden.jsonl");
  ASSERT_TRUE(in) << "missing golden file";
  std::string line;
  int count = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    const auto a = j["a"].get<Lines>();
    const auto b = j["b"].get<Lines>();
    EXPECT_EQ(diff(a, b).render(), j["diff"].get<std::string>()) << "golden " << count;
    ++count;
  }
  EXPECT_EQ(count, 50);
}

TEST(Diff, RandomPairsApplyBack) {
  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 300; ++iter) {
    auto random_lines = [&] {
      Lines out(rng() % 12);
      for (auto& l : out) l = std::string(1, static_cast<char>('a' + rng() % 4));
      return out;
    };
    const Lines a = random_lines(), b = random_lines();
    const EditDiff d = diff(a, b);
    EXPECT_EQ(lintseq::apply(a, d), b);
    EXPECT_EQ(parse_diff(d.render()), d);
  }
}

TEST(DiffStates, SingleLineProgram) {
  const Lines src{"x = 1"};
  StateSequence seq{"s", {state(src, {}), state(src, {0})}};
  const auto diffs = diff_states(seq);
  ASSERT_EQ(diffs.size(), 1u);
  EXPECT_EQ(diffs[0].render(), "@@ -0,0 +1 @@\n+x = 1");
}

TEST(DiffStates, InsertBeforeKeptLine) {
  const Lines src{"a=1", "b=2"};
  StateSequence seq{"s", {state(src, {}), state(src, {1}), state(src, {0, 1})}};
  const auto diffs = diff_states(seq);
  ASSERT_EQ(diffs.size(), 2u);
  EXPECT_EQ(diffs[0].render(), "@@ -0,0 +1 @@\n+b=2");
  EXPECT_EQ(diffs[1].render(), "@@ -0,0 +1 @@\n+a=1");
  EXPECT_TRUE(diffs[0].insertion_only() && diffs[1].insertion_only());
}

TEST(DiffStates, GroupsContiguousInsertions) {
  const Lines src{"a", "b", "c", "d", "e"};
  StateSequence seq{"s", {state(src, {}), state(src, {1, 4}), state(src, {0, 1, 2, 3, 4})}};
  const auto diffs = diff_states(seq);
  EXPECT_EQ(diffs[1].render(), "@@ -0,0 +1 @@\n+a\n@@ -1,0 +3,2 @@\n+c\n+d");
}

TEST(DiffStates, AgreesWithGeneralDiffOnDistinctLines) {
  std::mt19937_64 rng(5);
  for (int iter = 0; iter < 200; ++iter) {
    Lines src(1 + rng() % 15);
    for (std::size_t i = 0; i < src.size(); ++i) src[i] = "line " + std::to_string(i);
    std::vector<std::vector<std::size_t>> kept{{}};
    std::vector<std::size_t> all(src.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::vector<bool> in(src.size(), false);
    std::size_t count = 0;
    while (count < src.size()) {
      const std::size_t add = 1 + rng() % (src.size() - count);
      for (std::size_t k = 0; k < add;) {
        const std::size_t i = rng() % src.size();
        if (!in[i]) { in[i] = true; ++k; ++count; }
      }
      std::vector<std::size_t> next;
      for (std::size_t i = 0; i < src.size(); ++i) if (in[i]) next.push_back(i);
      kept.push_back(next);
    }
    StateSequence seq{"s", {}};
    for (auto& k : kept) seq.states.push_back(state(src, k));
    const auto diffs = diff_states(seq);
    ASSERT_EQ(diffs.size(), seq.states.size() - 1);
    for (std::size_t i = 0; i < diffs.size(); ++i) {
      EXPECT_EQ(diffs[i], diff(std::string_view(seq.states[i].text), std::string_view(seq.states[i + 1].text)));
    }
  }
}

TEST(DiffStates, RejectsBrokenSequences) {
  const Lines src{"a", "b"};
  auto expect_invalid = [](const StateSequence& seq) {
    try {
      diff_states(seq);
      ADD_FAILURE() << "accepted an invalid sequence";
    } catch (const DiffError& e) {
      EXPECT_EQ(e.kind(), DiffErrorKind::InvalidSequence);
    }
  };
  expect_invalid(StateSequence{"s", {state(src, {0}), state(src, {0, 1})}});           // not from empty
  expect_invalid(StateSequence{"s", {state(src, {}), state(src, {1}), state(src, {0})}});  // drops a line
  expect_invalid(StateSequence{"s", {state(src, {}), state(src, {0}), state(src, {0})}});  // no growth
  expect_invalid(StateSequence{"s", {}});
}

TEST(ParseDiff, HandParsedExample) {
  const EditDiff d = parse_diff("@@ -1 +1 @@\n-x\n+y");
  ASSERT_EQ(d.hunks.size(), 1u);
  EXPECT_EQ(d.hunks[0].deletions, Lines{"x"});
  EXPECT_EQ(d.hunks[0].insertions, Lines{"y"});
  EXPECT_EQ(d.hunks[0].old_start, 1u);
  EXPECT_EQ(d.hunks[0].new_len, 1u);
}

TEST(ParseDiff, DeclaredLengthLongerThanBody) {
  try {
    parse_diff("@@ -1,2 +1 @@\n-x");
    FAIL();
  } catch (const DiffError& e) {
    EXPECT_EQ(e.kind(), DiffErrorKind::BodyMismatch);
  }
}

TEST(ParseDiff, TolerantVariants) {
  const EditDiff canonical = parse_diff("@@ -0,0 +1,2 @@\n+a\n+b");
  EXPECT_EQ(parse_diff("--- a\n+++ b\n@@ -0,0 +1,2 @@ def f():\n+a\n+b\n"), canonical);
  EXPECT_EQ(parse_diff("@@ -0,0 +1,2 @@\n+a\n+b\n\\ No newline at end of file\n"), canonical);
  EXPECT_EQ(parse_diff("@@ -1,1 +1,1 @@\n-x\n+y"), parse_diff("@@ -1 +1 @@\n-x\n+y"));
}

TEST(ParseDiff, Errors) {
  auto kind_of = [](std::string_view text) {
    try {
      parse_diff(text);
    } catch (const DiffError& e) {
      return std::optional<DiffErrorKind>(e.kind());
    }
    return std::optional<DiffErrorKind>();
  };
  EXPECT_EQ(kind_of("@@ -0,0 +x @@\n+a"), DiffErrorKind::MalformedDecorator);
  EXPECT_EQ(kind_of("@@ -0,0 +1 @"), DiffErrorKind::MalformedDecorator);
  EXPECT_EQ(kind_of("+a"), DiffErrorKind::MalformedDecorator);
  EXPECT_EQ(kind_of("@@ -0,0 +1 @@"), DiffErrorKind::TruncatedHunk);
  EXPECT_EQ(kind_of("@@ -0,0 +1 @@\n+a\n+b"), DiffErrorKind::BodyMismatch);
  EXPECT_EQ(kind_of(""), std::nullopt);
}

}  // namespace
}  // namespace lintseq
