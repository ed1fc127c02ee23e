#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lintseq/corpus.hpp"
#include "lintseq/editcodec.hpp"
#include "lintseq/lint.hpp"
#include "lintseq/sampler.hpp"

namespace lintseq {

struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path output;
  SamplingMode mode = SamplingMode::LintSeq;
  std::int64_t samples = 5;
  std::uint64_t seed = 0;
  LinterSpec linter;
  std::int64_t workers = 1;
  std::string separator = std::string(kDefaultSeparator);
  bool dedup = false;
  bool unique_sequences = false;
  bool skip_dirty = false;
  std::size_t max_lines = 2048;
  // Exit status 2 when skipped examples exceed this fraction of the input.
  double max_skip_fraction = 0.1;

  // Throws std::invalid_argument.
  void validate() const;
};

// Phase II + serialization for one sampled sequence.
EditSequenceRecord make_record(const SourceExample& example, const SampleResult& sample, std::string_view separator);

struct GenerateSummary {
  std::size_t loaded = 0;
  std::vector<RecordIssue> load_issues;
  std::size_t dedup_removed = 0;
  std::size_t examples = 0;
  std::size_t sequences = 0;
  std::size_t duplicate_sequences = 0;
  std::vector<SkipDiagnostic> skips;
  double mean_edits = 0.0;
  double wall_seconds = 0.0;

  std::size_t skipped() const { return load_issues.size() + skips.size(); }
};

// load -> (dedup) -> sample -> diff -> serialize -> write, streaming records
// to config.output in (example, sample) order.
GenerateSummary generate(const RunConfig& config);

struct ResolvedRecord {
  std::string source_id;
  std::uint64_t sample_index = 0;
  bool ok = false;
  bool matches_source = false;
  std::string program;
  std::optional<ResolveFailure> failure;
};

struct ResolveSummary {
  std::size_t records = 0;
  std::size_t resolved = 0;
  std::size_t conflicts = 0;
  std::size_t malformed = 0;  // lines that are not valid records
  std::size_t mismatches = 0; // resolved but different from the record's program
};

// Resolves each record's training_text and writes one JSON line per record.
ResolveSummary resolve_records(const std::filesystem::path& input, const std::filesystem::path& output,
                               std::string_view separator = kDefaultSeparator);

}  // namespace lintseq
