#include "lintseq/corpus.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "lintseq/editcodec.hpp"

namespace lintseq {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("lintseq_corpus_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path file(const std::string& name) const { return path_ / name; }
  fs::path write(const std::string& name, const std::string& content) const {
    std::ofstream(file(name), std::ios::binary) << content;
    return file(name);
  }

 private:
  fs::path path_;
};

EditSequenceRecord sample_record(std::size_t i, const std::string& program) {
  EditSequenceRecord r;
  r.source_id = "src-" + std::to_string(i);
  r.sample_index = i % 3;
  if (i % 2 == 0) r.instruction = "Write something.";
  r.program = program;
  r.trailing_newline = !program.empty() && program.back() == '\n';
  r.edits = {diff(std::string_view(""), std::string_view(program))};
  r.training_text = serialize(r.edits).text;
  r.num_edits = 1;
  r.seed_path = {7, i, i % 3};
  return r;
}

TEST(ParseCorpus, TwoRecords) {
  const auto r = parse_corpus(R"({"id":"a","instruction":"do","program":"x = 1\n"}
{"id":"b","program":"y = 2"}
)");
  ASSERT_EQ(r.items.size(), 2u);
  EXPECT_EQ(r.skipped(), 0u);
  EXPECT_EQ(r.items[0].instruction, "do");
  EXPECT_TRUE(r.items[0].trailing_newline);
  EXPECT_FALSE(r.items[1].instruction.has_value());
  EXPECT_FALSE(r.items[1].trailing_newline);
  EXPECT_EQ(r.items[1].line_count, 1u);
}

TEST(ParseCorpus, EmptyFile) {
  const auto r = parse_corpus("");
  EXPECT_TRUE(r.items.empty());
  EXPECT_EQ(r.skipped(), 0u);
}

TEST(ParseCorpus, MissingProgramIsSkipped) {
  const auto r = parse_corpus(R"({"id":"a","program":"x = 1"}
{"id":"b","instruction":"no program"}
{"id":"c","program":"z = 3"}
)");
  ASSERT_EQ(r.items.size(), 2u);
  ASSERT_EQ(r.skipped(), 1u);
  EXPECT_EQ(r.issues[0].line, 2u);
  EXPECT_EQ(r.items[1].id, "c");
}

TEST(ParseCorpus, MalformedAndDuplicateRecords) {
  const auto r = parse_corpus("{\"program\":\"a\"}\nnot json\n\n{\"id\":\"000000\",\"program\":\"b\"}\n[1]\n{\"program\":7}\n");
  ASSERT_EQ(r.items.size(), 1u);
  EXPECT_EQ(r.items[0].id, "000000");
  EXPECT_EQ(r.skipped(), 4u);
}

TEST(ParseCorpus, NormalizesLineEndings) {
  const auto r = parse_corpus(R"({"program":"a\r\nb\r\n"})");
  ASSERT_EQ(r.items.size(), 1u);
  EXPECT_EQ(r.items[0].program, "a\nb\n");
}

TEST(ParseCorpus, InvalidUtf8IsFatal) { EXPECT_THROW(parse_corpus("{\"program\":\"\xff\"}\n"), CorpusError); }

TEST(LoadCorpus, MissingFileIsFatal) { EXPECT_THROW(load_corpus("/nonexistent/corpus.jsonl"), CorpusError); }

TEST(Deduplicate, ExactDuplicates) {
  const auto a = make_example("1", std::nullopt, "x = 1\n");
  const auto b = make_example("2", std::nullopt, "y = 2\n");
  const auto a2 = make_example("3", std::nullopt, "x = 1\n");
  const auto r = deduplicate({a, b, a2});
  ASSERT_EQ(r.examples.size(), 2u);
  EXPECT_EQ(r.removed, 1u);
  EXPECT_EQ(r.examples[0].id, "1");
  EXPECT_EQ(r.examples[1].id, "2");
}

TEST(Deduplicate, DistinctCorpusUnchanged) {
  const std::vector<SourceExample> corpus = {make_example("1", std::nullopt, "a\n"),
                                             make_example("2", std::nullopt, "b\n")};
  const auto r = deduplicate(corpus);
  EXPECT_EQ(r.examples, corpus);
  EXPECT_EQ(r.removed, 0u);
}

TEST(Deduplicate, WhitespaceDifferenceIsDistinct) {
  const auto a = make_example("1", std::nullopt, "x = 1\n");
  const auto a_space = make_example("2", std::nullopt, "x =  1\n");
  const auto r = deduplicate({a, a_space, make_example("3", std::nullopt, "x = 1\n")});
  ASSERT_EQ(r.examples.size(), 2u);
  EXPECT_EQ(r.examples[1].id, "2");
  EXPECT_EQ(r.removed, 1u);
}

TEST(Records, TenRecordsRoundTrip) {
  TempDir dir;
  std::vector<EditSequenceRecord> records;
  for (std::size_t i = 0; i < 10; ++i) records.push_back(sample_record(i, "v" + std::to_string(i) + " = 1\n"));
  const auto path = dir.file("out.jsonl");
  EXPECT_EQ(write_records(records, path), 10u);
  const std::string content = read_file(path);
  EXPECT_EQ(std::count(content.begin(), content.end(), '\n'), 10);
  const auto loaded = load_records(path);
  EXPECT_EQ(loaded.skipped(), 0u);
  ASSERT_EQ(loaded.items.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(loaded.items[i].source_id, records[i].source_id);
    EXPECT_EQ(loaded.items[i].edits, records[i].edits);
    EXPECT_EQ(loaded.items[i].training_text, records[i].training_text);
    EXPECT_EQ(loaded.items[i].seed_path, records[i].seed_path);
    EXPECT_EQ(loaded.items[i].instruction, records[i].instruction);
  }
}

TEST(Records, ZeroRecordsGiveEmptyFile) {
  TempDir dir;
  const auto path = dir.file("empty.jsonl");
  EXPECT_EQ(write_records({}, path), 0u);
  EXPECT_EQ(read_file(path), "");
  EXPECT_TRUE(load_records(path).items.empty());
}

TEST(Records, SeparatorInsideProgramSurvives) {
  TempDir dir;
  const std::string program = "s = \"<|diff|>\"\n<|diff|>\nprint(s)";
  const auto record = sample_record(0, program);
  const auto path = dir.file("sep.jsonl");
  write_records({record}, path);
  const auto loaded = load_records(path);
  ASSERT_EQ(loaded.items.size(), 1u);
  EXPECT_EQ(loaded.items[0].program, program);
  EXPECT_EQ(loaded.items[0].training_text, record.training_text);
  EXPECT_EQ(restore_trailing_newline(resolve(loaded.items[0].training_text), false), program);
}

TEST(Records, FieldOrderAndNullInstruction) {
  auto r = sample_record(1, "x\n");
  const std::string line = record_to_json_line(r);
  EXPECT_EQ(line.find("{\"source_id\":\"src-1\",\"sample_index\":1,\"instruction\":null,\"program\""), 0u);
  EXPECT_EQ(line.find('\n'), std::string::npos);
}

TEST(Records, InconsistentRecordRejected) {
  auto r = sample_record(1, "x\n");
  r.num_edits = 2;
  EXPECT_THROW(record_from_json_line(record_to_json_line(r)), CorpusError);
}

TEST(TrailingNewline, Restore) {
  EXPECT_EQ(restore_trailing_newline("a\nb\n", false), "a\nb");
  EXPECT_EQ(restore_trailing_newline("a\nb\n", true), "a\nb\n");
  EXPECT_EQ(restore_trailing_newline("", false), "");
}

}  // namespace
}  // namespace lintseq
