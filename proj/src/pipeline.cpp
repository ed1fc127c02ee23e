#include "lintseq/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <memory>

#include "json.hpp"
#include "lintseq/diffkit.hpp"
#include "lintseq/text.hpp"

namespace lintseq {

void RunConfig::validate() const {
  if (samples < 1) throw std::invalid_argument("samples must be at least 1");
  if (workers < 1) throw std::invalid_argument("workers must be at least 1");
  if (max_lines < 1) throw std::invalid_argument("max-lines must be at least 1");
  if (input.empty()) throw std::invalid_argument("an input path is required");
  if (output.empty()) throw std::invalid_argument("an output path is required");
  if (max_skip_fraction < 0.0 || max_skip_fraction > 1.0) {
    throw std::invalid_argument("max-skip-fraction must lie in [0, 1]");
  }
  validate_separator(separator);
  linter.validate();
}

EditSequenceRecord make_record(const SourceExample& example, const SampleResult& sample, std::string_view separator) {
  EditSequenceRecord record;
  record.source_id = example.id;
  record.sample_index = sample.sample_index;
  record.instruction = example.instruction;
  record.program = example.program;
  record.trailing_newline = example.trailing_newline;
  record.edits = diff_states(sample.sequence);
  record.training_text = serialize(record.edits, separator).text;
  record.num_edits = record.edits.size();
  record.seed_path = sample.seed_path;
  return record;
}

GenerateSummary generate(const RunConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  GenerateSummary summary;

  auto loaded = load_corpus(config.input);
  summary.loaded = loaded.items.size();
  summary.load_issues = std::move(loaded.issues);
  std::vector<SourceExample> corpus = std::move(loaded.items);
  if (config.dedup) {
    auto deduped = deduplicate(std::move(corpus));
    summary.dedup_removed = deduped.removed;
    corpus = std::move(deduped.examples);
  }
  summary.examples = corpus.size();

  std::unique_ptr<Linter> linter;
  if (config.mode == SamplingMode::LintSeq) {
    LinterOptions lopts;
    lopts.max_processes = static_cast<std::size_t>(config.workers);
    linter = std::make_unique<Linter>(config.linter, lopts);
  }

  CorpusSamplingOptions opts;
  opts.samples = static_cast<std::size_t>(config.samples);
  opts.mode = config.mode;
  opts.global_seed = config.seed;
  opts.workers = static_cast<std::size_t>(config.workers);
  opts.unique_sequences = config.unique_sequences;
  opts.sampler.max_lines = config.max_lines;
  opts.sampler.skip_dirty_sources = config.skip_dirty;

  RecordWriter writer(config.output);
  std::size_t total_edits = 0;
  const auto sampled = sample_corpus(corpus, linter.get(), opts, [&](const SourceExample& ex, SampleResult&& r) {
    const auto record = make_record(ex, r, config.separator);
    total_edits += record.num_edits;
    writer.write(record);
  });
  writer.close();

  summary.sequences = sampled.sequences;
  summary.duplicate_sequences = sampled.duplicate_sequences;
  summary.skips = sampled.skips;
  summary.mean_edits =
      summary.sequences == 0 ? 0.0 : static_cast<double>(total_edits) / static_cast<double>(summary.sequences);
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return summary;
}

ResolveSummary resolve_records(const std::filesystem::path& input, const std::filesystem::path& output,
                               std::string_view separator) {
  ResolveSummary summary;
  const auto loaded = load_records(input);
  summary.malformed = loaded.issues.size();
  std::ofstream out(output, std::ios::binary | std::ios::trunc);
  if (!out) throw CorpusError("cannot open for writing: " + output.string());
  for (const auto& record : loaded.items) {
    ++summary.records;
    const auto outcome = resolve_lenient(record.training_text, separator);
    nlohmann::ordered_json j;
    j["source_id"] = record.source_id;
    j["sample_index"] = record.sample_index;
    if (outcome.ok()) {
      ++summary.resolved;
      const std::string program = restore_trailing_newline(outcome.program, record.trailing_newline);
      const bool matches = program == record.program;
      if (!matches) ++summary.mismatches;
      j["resolved"] = true;
      j["matches_source"] = matches;
      j["program"] = program;
    } else {
      ++summary.conflicts;
      const auto& f = *outcome.failure;
      j["resolved"] = false;
      j["error"] = {{"kind", to_string(f.kind)},
                    {"edit_index", f.edit_index},
                    {"hunk_index", f.hunk_index},
                    {"message", f.message}};
      j["program"] = restore_trailing_newline(outcome.program, record.trailing_newline);
    }
    out << j.dump() << '\n';
  }
  out.flush();
  if (!out) throw CorpusError("write failed: " + output.string());
  return summary;
}

}  // namespace lintseq
