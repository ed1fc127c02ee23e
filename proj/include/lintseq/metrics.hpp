#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lintseq/corpus.hpp"
#include "lintseq/lint.hpp"

namespace lintseq {

struct Histogram {
  std::map<std::size_t, std::size_t> counts;  // value -> occurrences
  std::size_t total = 0;
  double sum = 0.0;

  void add(std::size_t value);
  double mean() const { return total == 0 ? 0.0 : sum / static_cast<double>(total); }
  bool operator==(const Histogram&) const = default;
};

struct DatasetStats {
  Histogram lines_per_example;
  Histogram edits_per_sequence;
  Histogram chars_per_training_text;
  std::size_t example_count = 0;   // distinct source ids
  std::size_t sequence_count = 0;

  bool operator==(const DatasetStats&) const = default;
};

DatasetStats dataset_stats(std::span<const EditSequenceRecord> records);

// Unbiased pass@k: 1 - C(n-c, k) / C(n, k), evaluated as
// 1 - prod_{i=n-c+1}^{n} (1 - k/i). Requires c <= n and 1 <= k <= n.
double pass_at_k(std::uint64_t n, std::uint64_t c, std::uint64_t k);

using FlopCount = unsigned __int128;

struct FlopsModel {
  std::uint64_t n_params = 0;
  std::uint64_t n_layers = 0;
  std::uint64_t context = 0;
  std::uint64_t avg_tokens_per_sample = 0;
  std::uint64_t samples_per_problem = 0;
  std::uint64_t problems = 0;
};

// 2 * (N + 2 * L * C). Throws std::invalid_argument on a zero N, L or C and
// std::overflow_error past 128 bits.
FlopCount flops_per_token(const FlopsModel& model);
// flops_per_token * T * K * M; every field must be positive.
FlopCount total_flops(const FlopsModel& model);

std::string to_decimal(FlopCount value);

struct LintErrorRate {
  double rate = 0.0;                          // with_findings / checked
  std::size_t checked = 0;
  std::size_t with_findings = 0;
  std::size_t failed = 0;                     // linter errors, excluded from the denominator
  std::map<std::string, std::size_t> by_code; // programs per finding code
};

// Throws std::invalid_argument when nothing could be checked.
LintErrorRate lint_error_rate(std::span<const std::string> programs, const Linter& linter, std::size_t workers = 1);

}  // namespace lintseq
