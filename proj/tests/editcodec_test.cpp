#include "lintseq/editcodec.hpp"

#include <gtest/gtest.h>

#include <random>

#include "lintseq/text.hpp"

namespace lintseq {
namespace {

using Lines = std::vector<std::string>;

std::size_t count_of(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto at = text.find(needle); at != std::string_view::npos; at = text.find(needle, at + 1)) ++n;
  return n;
}

std::vector<EditDiff> chain(const std::vector<Lines>& programs) {
  std::vector<EditDiff> edits;
  Lines prev;
  for (const auto& p : programs) {
    edits.push_back(diff(prev, p));
    prev = p;
  }
  return edits;
}

TEST(Serialize, SingleEditLayout) {
  const auto edits = chain({{"def f():", "    return 1"}});
  EXPECT_EQ(serialize(edits).text, "<|diff|>\n@@ -0,0 +1,2 @@\n+def f():\n+    return 1");
}

TEST(Serialize, SeparatorCount) {
  const auto edits = chain({{"a"}, {"a", "b"}, {"c", "a", "b"}});
  const auto ts = serialize(edits);
  EXPECT_EQ(count_of(ts.text, "<|diff|>"), 3u);
  EXPECT_EQ(ts.separator, "<|diff|>");
  EXPECT_EQ(serialize({}).text, "");
}

TEST(Serialize, DeserializeRoundTrip) {
  const auto edits = chain({{"x = 1"}, {"import os", "x = 1"}, {"import os", "", "x = 1", "print(x)"}});
  EXPECT_EQ(deserialize(serialize(edits).text), edits);
  EXPECT_EQ(deserialize(serialize(edits, "### EDIT").text, "### EDIT"), edits);
}

TEST(Separator, RejectsAmbiguousTokens) {
  EXPECT_NO_THROW(validate_separator("<|diff|>"));
  EXPECT_THROW(validate_separator(""), std::invalid_argument);
  EXPECT_THROW(validate_separator("+sep"), std::invalid_argument);
  EXPECT_THROW(validate_separator("-sep"), std::invalid_argument);
  EXPECT_THROW(validate_separator("@@"), std::invalid_argument);
  EXPECT_THROW(validate_separator("a\nb"), std::invalid_argument);
}

TEST(SplitEdits, SeparatorInsideProgramTextIsNotABoundary) {
  const Lines program{"s = '<|diff|>'", "<|diff|> = 3"};
  const auto edits = chain({program});
  const auto text = serialize(edits).text;
  EXPECT_EQ(split_edits(text).size(), 1u);
  EXPECT_EQ(resolve(text), join_lines(program));
}

TEST(SplitEdits, TextAfterSeparatorStartsChunk) {
  const auto chunks = split_edits("<|diff|>@@ -0,0 +1 @@\n+a\n<|diff|>\n\n<|diff|>\n@@ -1,0 +2 @@\n+b");
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_EQ(chunks[0], "@@ -0,0 +1 @@\n+a\n");
}

TEST(Apply, FirstEditFromEmpty) {
  const Lines y1{"a", "b"};
  EXPECT_EQ(lintseq::apply(Lines{}, diff(Lines{}, y1)), y1);
  EXPECT_EQ(lintseq::apply(std::string_view(""), diff(Lines{}, y1)), "a\nb\n");
}

TEST(Apply, RandomPairs) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 500; ++i) {
    auto gen = [&] {
      Lines l(rng() % 20);
      for (auto& s : l) s = std::to_string(rng() % 6);
      return l;
    };
    const Lines a = gen(), b = gen();
    EXPECT_EQ(lintseq::apply(a, diff(a, b)), b);
  }
}

TEST(Apply, StaleDeletionTextConflicts) {
  const EditDiff d = parse_diff("@@ -1 +1 @@\n-old\n+new");
  try {
    lintseq::apply(Lines{"other"}, d);
    FAIL();
  } catch (const ApplyConflict& e) {
    EXPECT_EQ(e.hunk_index(), 0u);
  }
  EXPECT_THROW(lintseq::apply(Lines{}, parse_diff("@@ -3,0 +4 @@\n+x")), ApplyConflict);
  EXPECT_THROW(lintseq::apply(Lines{"a", "b"}, parse_diff("@@ -2,0 +3 @@\n+x\n@@ -1,0 +2 @@\n+y")), ApplyConflict);
}

TEST(Resolve, EmptyStream) {
  EXPECT_EQ(resolve(""), "");
  EXPECT_TRUE(resolve_prefixes("").empty());
}

TEST(Resolve, SecondEditDeletesLineFromFirst) {
  const std::string text =
      "<|diff|>\n@@ -0,0 +1,3 @@\n+a\n+tmp\n+c\n"
      "<|diff|>\n@@ -2 +1,0 @@\n-tmp\n@@ -3,0 +3 @@\n+d";
  EXPECT_EQ(resolve(text), "a\nc\nd\n");
  EXPECT_EQ(resolve_prefixes(text), (Lines{"a\ntmp\nc\n", "a\nc\nd\n"}));
}

TEST(Resolve, PrefixesEndWithProgram) {
  const auto edits = chain({{"b"}, {"a", "b"}, {"a", "b", "c"}, {"a", "b", "c", "d"}});
  const auto text = serialize(edits).text;
  const auto prefixes = resolve_prefixes(text);
  ASSERT_EQ(prefixes.size(), 4u);
  EXPECT_EQ(prefixes.back(), resolve(text));
  EXPECT_EQ(prefixes.front(), "b\n");
}

TEST(Resolve, StructuredFailures) {
  const std::string good = "<|diff|>\n@@ -0,0 +1 @@\n+a";
  struct Case {
    std::string text;
    ResolveErrorKind kind;
    std::size_t edit;
  };
  const std::vector<Case> cases = {
      {good + "\n<|diff|>\n@@ -x +1 @@\n+b", ResolveErrorKind::MalformedDecorator, 1},
      {good + "\n<|diff|>\n@@ -1,0 +2,2 @@\n+b", ResolveErrorKind::BodyMismatch, 1},
      {good + "\n<|diff|>\n@@ -1,0 +2 @@", ResolveErrorKind::TruncatedHunk, 1},
      {good + "\n<|diff|>\n@@ -1 +1 @@\n-z\n+b", ResolveErrorKind::ApplyConflict, 1},
      {"<|diff|>\nnot a diff", ResolveErrorKind::MalformedDecorator, 0},
  };
  for (const auto& c : cases) {
    const ResolveOutcome out = resolve_lenient(c.text);
    ASSERT_FALSE(out.ok()) << c.text;
    EXPECT_EQ(out.failure->kind, c.kind) << c.text;
    EXPECT_EQ(out.failure->edit_index, c.edit);
    EXPECT_EQ(out.edits_applied, c.edit);
    if (c.edit == 1) EXPECT_EQ(out.program, "a\n");
    try {
      resolve(c.text);
      ADD_FAILURE() << "resolve accepted " << c.text;
    } catch (const ResolveError& e) {
      EXPECT_EQ(e.failure().kind, c.kind);
    }
  }
}

}  // namespace
}  // namespace lintseq
