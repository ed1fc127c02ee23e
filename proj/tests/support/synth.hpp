#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lintseq/corpus.hpp"

namespace lintseq::testing {

// A linter-clean Python module with exactly `lines` lines (trailing newline
// included). Deterministic in `seed`.
std::string synth_program(std::uint64_t seed, std::size_t lines);

// Line counts uniform on [min_lines, max_lines].
std::vector<SourceExample> synth_corpus_uniform(std::size_t count, std::uint64_t seed, std::size_t min_lines,
                                                std::size_t max_lines);

// Right-skewed line counts on [5, 60] with mean close to `mean_lines`,
// resembling short instruction-tuning programs.
std::vector<SourceExample> synth_corpus_skewed(std::size_t count, std::uint64_t seed, double mean_lines);

// One JSON line per example, the corpus input format.
std::string to_corpus_jsonl(const std::vector<SourceExample>& corpus);

}  // namespace lintseq::testing
