#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lintseq/diffkit.hpp"

namespace lintseq {

struct SourceExample {
  std::string id;
  std::optional<std::string> instruction;
  std::string program;  // LF line endings
  std::size_t line_count = 0;
  bool trailing_newline = false;

  std::vector<std::string> lines() const;
  bool operator==(const SourceExample&) const = default;
};

// Builds an example from raw text, normalizing line endings.
SourceExample make_example(std::string id, std::optional<std::string> instruction, std::string_view program);

// Restores the source's trailing-newline state on '\n'-terminated text.
std::string restore_trailing_newline(std::string canonical, bool trailing_newline);

struct SeedPath {
  std::uint64_t global_seed = 0;
  std::uint64_t example_index = 0;
  std::uint64_t sample_index = 0;

  bool operator==(const SeedPath&) const = default;
};

struct EditSequenceRecord {
  std::string source_id;
  std::uint64_t sample_index = 0;
  std::optional<std::string> instruction;
  std::string program;
  bool trailing_newline = false;
  std::vector<EditDiff> edits;
  std::string training_text;
  std::size_t num_edits = 0;
  SeedPath seed_path;

  bool operator==(const EditSequenceRecord&) const = default;
};

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RecordIssue {
  std::size_t line = 0;  // 1-based line in the file
  std::string message;
};

template <typename T>
struct LoadResult {
  std::vector<T> items;
  std::vector<RecordIssue> issues;
  std::size_t skipped() const { return issues.size(); }
};

enum class CorpusFormat { JsonLines };

// Malformed records are skipped and reported; a missing file or non-UTF-8
// content throws CorpusError.
LoadResult<SourceExample> load_corpus(const std::filesystem::path& path,
                                      CorpusFormat format = CorpusFormat::JsonLines);
LoadResult<SourceExample> parse_corpus(std::string_view content);

struct DedupResult {
  std::vector<SourceExample> examples;
  std::size_t removed = 0;
};

// Keeps the first occurrence of each exact (instruction, program) pair.
DedupResult deduplicate(std::vector<SourceExample> corpus);

std::string record_to_json_line(const EditSequenceRecord& record);
EditSequenceRecord record_from_json_line(std::string_view line);

// One JSON object per line. Throws CorpusError on I/O failure.
std::size_t write_records(const std::vector<EditSequenceRecord>& records, const std::filesystem::path& path);
LoadResult<EditSequenceRecord> load_records(const std::filesystem::path& path);

class RecordWriter {
 public:
  explicit RecordWriter(const std::filesystem::path& path);
  void write(const EditSequenceRecord& record);
  void close();
  std::size_t count() const { return count_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t count_ = 0;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace lintseq
