#include "lintseq/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <set>
#include <thread>

#include "lintseq/text.hpp"

namespace lintseq {

const char* to_string(SamplingMode mode) { return mode == SamplingMode::LintSeq ? "lintseq" : "randseq"; }

SamplingMode parse_mode(std::string_view text) {
  if (text == "lintseq") return SamplingMode::LintSeq;
  if (text == "randseq") return SamplingMode::RandSeq;
  throw std::invalid_argument("unknown mode '" + std::string(text) + "' (expected lintseq or randseq)");
}

const char* to_string(SkipReason reason) {
  switch (reason) {
    case SkipReason::EmptyProgram: return "empty-program";
    case SkipReason::TooManyLines: return "too-many-lines";
    case SkipReason::DirtySource: return "dirty-source";
    case SkipReason::LinterTimeout: return "linter-timeout";
    case SkipReason::LinterFailure: return "linter-failure";
  }
  return "unknown";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(const SeedPath& path, std::uint64_t attempt) {
  std::uint64_t h = splitmix64(path.global_seed);
  h = splitmix64(h ^ path.example_index);
  h = splitmix64(h ^ path.sample_index);
  if (attempt > 0) h = splitmix64(h ^ attempt);
  return h;
}

std::uint64_t SampleRng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("SampleRng::below: bound must be positive");
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return r % bound;
  }
}

ProgramState make_state(std::span<const std::string> lines, std::vector<std::size_t> kept) {
  ProgramState state;
  std::size_t total = 0;
  for (std::size_t i : kept) total += lines[i].size() + 1;
  state.text.reserve(total);
  for (std::size_t i : kept) {
    state.text += lines[i];
    state.text += '\n';
  }
  state.kept_indices = std::move(kept);
  return state;
}

namespace {

std::vector<std::string> validated_lines(const SourceExample& example, const SamplerOptions& options) {
  if (is_blank(example.program)) {
    throw SampleSkipped(SkipReason::EmptyProgram, "example '" + example.id + "' has an empty program");
  }
  auto lines = split_lines(example.program);
  if (lines.size() > options.max_lines) {
    throw SampleSkipped(SkipReason::TooManyLines, "example '" + example.id + "' has " +
                                                      std::to_string(lines.size()) + " lines (max " +
                                                      std::to_string(options.max_lines) + ")");
  }
  return lines;
}

StateSequence forward(const SourceExample& example, std::span<const std::string> lines,
                      std::vector<std::vector<std::size_t>> backward) {
  StateSequence seq;
  seq.source_id = example.id;
  seq.states.reserve(backward.size());
  for (auto it = backward.rbegin(); it != backward.rend(); ++it) seq.states.push_back(make_state(lines, std::move(*it)));
  return seq;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

std::string text_of(std::span<const std::string> lines, const std::vector<std::size_t>& kept) {
  return make_state(lines, kept).text;
}

}  // namespace

StateSequence backward_sample(const SourceExample& example, const Linter& linter, const SeedPath& seed,
                              const SamplerOptions& options, std::uint64_t attempt) {
  const auto lines = validated_lines(example, options);
  LintReport baseline;
  try {
    baseline = linter.check(join_lines(lines));
  } catch (const LinterTimeout& e) {
    throw SampleSkipped(SkipReason::LinterTimeout, e.what());
  } catch (const LintError& e) {
    throw SampleSkipped(SkipReason::LinterFailure, e.what());
  }
  if (options.skip_dirty_sources && !baseline.clean()) {
    throw SampleSkipped(SkipReason::DirtySource, "example '" + example.id + "' has linter findings");
  }

  SampleRng rng(mix_seed(seed, attempt));
  std::vector<std::vector<std::size_t>> backward;
  std::vector<std::size_t> current = all_indices(lines.size());
  backward.push_back(current);
  try {
    while (!current.empty()) {
      current.erase(current.begin() + static_cast<std::ptrdiff_t>(rng.below(current.size())));
      // Drop lines carrying new findings until the trace matches again.
      while (!current.empty()) {
        const LintReport report = linter.check(text_of(lines, current));
        if (same_trace(report, baseline)) break;
        const auto affected = new_finding_lines(report, baseline);
        if (affected.empty()) {
          // Only baseline findings went missing; no removal restores them.
          current.clear();
          break;
        }
        std::vector<std::size_t> kept;
        kept.reserve(current.size());
        for (std::size_t pos = 0; pos < current.size(); ++pos) {
          if (!std::binary_search(affected.begin(), affected.end(), pos + 1)) kept.push_back(current[pos]);
        }
        current = std::move(kept);
      }
      backward.push_back(current);
    }
  } catch (const LinterTimeout& e) {
    throw SampleSkipped(SkipReason::LinterTimeout, e.what());
  } catch (const LintError& e) {
    throw SampleSkipped(SkipReason::LinterFailure, e.what());
  }
  return forward(example, lines, std::move(backward));
}

StateSequence random_sample(const SourceExample& example, const SeedPath& seed, const SamplerOptions& options,
                            std::uint64_t attempt) {
  const auto lines = validated_lines(example, options);
  SampleRng rng(mix_seed(seed, attempt));
  std::vector<std::vector<std::size_t>> backward;
  std::vector<std::size_t> current = all_indices(lines.size());
  backward.push_back(current);
  while (!current.empty()) {
    const std::size_t n = current.size();
    const std::size_t k = 1 + static_cast<std::size_t>(rng.below(n));
    // Partial Fisher-Yates over positions picks a uniform k-subset.
    std::vector<std::size_t> positions = all_indices(n);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
      std::swap(positions[i], positions[j]);
    }
    std::vector<bool> drop(n, false);
    for (std::size_t i = 0; i < k; ++i) drop[positions[i]] = true;
    std::vector<std::size_t> kept;
    kept.reserve(n - k);
    for (std::size_t pos = 0; pos < n; ++pos) {
      if (!drop[pos]) kept.push_back(current[pos]);
    }
    current = std::move(kept);
    backward.push_back(current);
  }
  return forward(example, lines, std::move(backward));
}

namespace {

struct ExampleOutcome {
  std::vector<SampleResult> results;
  std::optional<SkipDiagnostic> skip;
  std::size_t duplicates = 0;
};

ExampleOutcome sample_example(const SourceExample& example, std::size_t example_index, const Linter* linter,
                              const CorpusSamplingOptions& options) {
  ExampleOutcome out;
  std::set<std::vector<std::vector<std::size_t>>> seen;
  auto draw = [&](const SeedPath& path, std::uint64_t attempt) {
    return options.mode == SamplingMode::LintSeq
               ? backward_sample(example, *linter, path, options.sampler, attempt)
               : random_sample(example, path, options.sampler, attempt);
  };
  auto key_of = [](const StateSequence& seq) {
    std::vector<std::vector<std::size_t>> key;
    key.reserve(seq.states.size());
    for (const auto& st : seq.states) key.push_back(st.kept_indices);
    return key;
  };
  try {
    for (std::size_t s = 0; s < options.samples; ++s) {
      const SeedPath path{options.global_seed, example_index, s};
      StateSequence seq = draw(path, 0);
      if (options.unique_sequences) {
        auto key = key_of(seq);
        for (std::uint64_t attempt = 1; seen.contains(key) && attempt < options.max_attempts; ++attempt) {
          seq = draw(path, attempt);
          key = key_of(seq);
        }
        if (seen.contains(key)) ++out.duplicates;
        seen.insert(std::move(key));
      }
      out.results.push_back(SampleResult{example_index, s, path, std::move(seq)});
    }
  } catch (const SampleSkipped& e) {
    out.results.clear();
    out.skip = SkipDiagnostic{example_index, example.id, e.reason(), e.what()};
  }
  return out;
}

}  // namespace

SamplingSummary sample_corpus(std::span<const SourceExample> corpus, const Linter* linter,
                              const CorpusSamplingOptions& options, const SampleSink& sink) {
  if (options.samples < 1) throw std::invalid_argument("samples per example must be at least 1");
  if (options.workers < 1) throw std::invalid_argument("workers must be at least 1");
  if (options.mode == SamplingMode::LintSeq && linter == nullptr) {
    throw std::invalid_argument("lintseq mode requires a linter");
  }
  SamplingSummary summary;
  summary.examples = corpus.size();
  const std::size_t chunk = std::max<std::size_t>(1, options.chunk_size);
  for (std::size_t begin = 0; begin < corpus.size(); begin += chunk) {
    const std::size_t end = std::min(corpus.size(), begin + chunk);
    std::vector<ExampleOutcome> outcomes(end - begin);
    std::atomic<std::size_t> next{begin};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto work = [&] {
      while (!failed.load()) {
        const std::size_t i = next.fetch_add(1);
        if (i >= end) return;
        try {
          outcomes[i - begin] = sample_example(corpus[i], i, linter, options);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
          return;
        }
      }
    };
    const std::size_t threads = std::min(options.workers, end - begin);
    if (threads <= 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(threads);
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    for (std::size_t i = begin; i < end; ++i) {
      auto& outcome = outcomes[i - begin];
      summary.duplicate_sequences += outcome.duplicates;
      if (outcome.skip) {
        summary.skips.push_back(std::move(*outcome.skip));
        continue;
      }
      for (auto& r : outcome.results) {
        ++summary.sequences;
        sink(corpus[i], std::move(r));
      }
    }
  }
  return summary;
}

}  // namespace lintseq
