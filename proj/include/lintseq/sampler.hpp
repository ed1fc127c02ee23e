#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lintseq/corpus.hpp"
#include "lintseq/lint.hpp"
#include "lintseq/state.hpp"

namespace lintseq {

enum class SamplingMode { LintSeq, RandSeq };

const char* to_string(SamplingMode mode);
SamplingMode parse_mode(std::string_view text);

// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

// seed = sm(sm(sm(global) ^ example) ^ sample), then sm(seed ^ attempt) for
// retry attempts > 0. Stable across releases.
std::uint64_t mix_seed(const SeedPath& path, std::uint64_t attempt = 0);

// mt19937_64 plus an unbiased bounded draw, so sequences do not depend on
// the standard library's distribution implementations.
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : engine_(seed) {}
  // Uniform on [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

struct SamplerOptions {
  std::size_t max_lines = 2048;
  bool skip_dirty_sources = false;
};

enum class SkipReason { EmptyProgram, TooManyLines, DirtySource, LinterTimeout, LinterFailure };

const char* to_string(SkipReason reason);

class SampleSkipped : public std::runtime_error {
 public:
  SampleSkipped(SkipReason reason, const std::string& what) : std::runtime_error(what), reason_(reason) {}
  SkipReason reason() const { return reason_; }

 private:
  SkipReason reason_;
};

ProgramState make_state(std::span<const std::string> lines, std::vector<std::size_t> kept);

// Linter-guided backward sampling. Every non-empty state is error-free
// relative to the source under `linter`.
StateSequence backward_sample(const SourceExample& example, const Linter& linter, const SeedPath& seed,
                              const SamplerOptions& options = {}, std::uint64_t attempt = 0);

// Each backward step deletes a uniformly sized, uniformly chosen subset.
StateSequence random_sample(const SourceExample& example, const SeedPath& seed,
                            const SamplerOptions& options = {}, std::uint64_t attempt = 0);

struct CorpusSamplingOptions {
  std::size_t samples = 5;
  SamplingMode mode = SamplingMode::LintSeq;
  std::uint64_t global_seed = 0;
  std::size_t workers = 1;
  bool unique_sequences = false;
  std::size_t max_attempts = 16;
  std::size_t chunk_size = 256;
  SamplerOptions sampler;
};

struct SampleResult {
  std::size_t example_index = 0;
  std::size_t sample_index = 0;
  SeedPath seed_path;
  StateSequence sequence;
};

struct SkipDiagnostic {
  std::size_t example_index = 0;
  std::string source_id;
  SkipReason reason = SkipReason::EmptyProgram;
  std::string message;
};

struct SamplingSummary {
  std::size_t examples = 0;
  std::size_t sequences = 0;
  std::size_t duplicate_sequences = 0;  // kept after exhausting retries
  std::vector<SkipDiagnostic> skips;
};

using SampleSink = std::function<void(const SourceExample&, SampleResult&&)>;

// Emits `samples` sequences per example to `sink`, ordered by
// (example_index, sample_index) regardless of worker count. `linter` may be
// null in RandSeq mode.
SamplingSummary sample_corpus(std::span<const SourceExample> corpus, const Linter* linter,
                              const CorpusSamplingOptions& options, const SampleSink& sink);

}  // namespace lintseq
