#include "lintseq/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lintseq/corpus.hpp"
#include "lintseq/lint.hpp"
#include "lintseq/metrics.hpp"
#include "lintseq/pipeline.hpp"
#include "lintseq/sampler.hpp"

namespace lintseq {
namespace {

using json = nlohmann::ordered_json;

// Thrown for bad flags or config values; reported with kind "config".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void error_record(std::ostream& err, std::string_view kind, std::string_view message) {
  json j;
  j["status"] = "error";
  j["kind"] = kind;
  j["message"] = message;
  err << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
}

struct LinterFlags {
  std::string linter = "builtin";
  std::string cmd;
  std::string pattern = std::string(kPresetFindingPattern);
  std::int64_t timeout_ms = 10000;
  bool include_warnings = false;

  CLI::Option* o_linter = nullptr;
  CLI::Option* o_cmd = nullptr;
  CLI::Option* o_pattern = nullptr;
  CLI::Option* o_timeout = nullptr;
  CLI::Option* o_warnings = nullptr;

  void add_to(CLI::App& app) {
    o_linter = app.add_option("--linter", linter, "builtin or external")->check(CLI::IsMember({"builtin", "external"}));
    o_cmd = app.add_option("--linter-cmd", cmd, "external linter command; {path} is replaced by the file");
    o_pattern = app.add_option("--linter-pattern", pattern, "regex with named groups line, code, message");
    o_timeout = app.add_option("--linter-timeout-ms", timeout_ms, "per-invocation timeout");
    o_warnings = app.add_flag("--include-warnings", include_warnings, "warnings participate in fingerprints");
  }
};

// Flags > config file > defaults. A config file holds one JSON object whose
// keys are flag names with '-' replaced by '_'.
class Config {
 public:
  Config() = default;
  explicit Config(const std::string& path) {
    const std::string text = read_file(path);
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError("config " + path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config " + path + ": expected a JSON object");
    values_ = std::move(j);
  }

  template <class T>
  void apply(const char* key, const CLI::Option* flag, T& target) {
    seen_.push_back(key);
    if (flag != nullptr && flag->count() > 0) return;
    const auto it = values_.find(key);
    if (it == values_.end()) return;
    try {
      target = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
  }

  void reject_unknown() const {
    for (const auto& item : values_.items()) {
      if (std::find(seen_.begin(), seen_.end(), item.key()) == seen_.end()) {
        throw ConfigError("unknown config key '" + item.key() + "'");
      }
    }
  }

 private:
  json values_ = json::object();
  std::vector<std::string> seen_;
};

LinterSpec make_linter(LinterFlags& flags, Config& config) {
  config.apply("linter", flags.o_linter, flags.linter);
  config.apply("linter_cmd", flags.o_cmd, flags.cmd);
  config.apply("linter_pattern", flags.o_pattern, flags.pattern);
  config.apply("linter_timeout_ms", flags.o_timeout, flags.timeout_ms);
  config.apply("include_warnings", flags.o_warnings, flags.include_warnings);
  if (flags.timeout_ms <= 0) throw ConfigError("linter-timeout-ms must be positive");
  LinterSpec spec;
  if (flags.linter == "builtin") {
    spec = LinterSpec::builtin();
  } else if (flags.linter == "external") {
    if (flags.cmd.empty()) throw ConfigError("--linter external requires --linter-cmd");
    spec = LinterSpec::external(flags.cmd, flags.pattern);
  } else {
    throw ConfigError("unknown linter '" + flags.linter + "'");
  }
  spec.timeout = std::chrono::milliseconds(flags.timeout_ms);
  spec.include_warnings = flags.include_warnings;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

std::string fixed4(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

json histogram_json(const Histogram& h, bool with_counts) {
  json j;
  j["total"] = h.total;
  j["mean"] = h.mean();
  j["min"] = h.counts.empty() ? 0 : h.counts.begin()->first;
  j["max"] = h.counts.empty() ? 0 : h.counts.rbegin()->first;
  if (with_counts) {
    json counts = json::object();
    for (const auto& [value, n] : h.counts) counts[std::to_string(value)] = n;
    j["counts"] = std::move(counts);
  }
  return j;
}

// ---- generate ----

struct GenerateFlags {
  std::string config_path;
  std::string input, output, mode = "lintseq", separator = std::string(kDefaultSeparator);
  std::int64_t samples = 5, workers = 1;
  std::uint64_t seed = 0;
  std::size_t max_lines = 2048;
  double max_skip_fraction = 0.1;
  bool dedup = false, unique_sequences = false, skip_dirty = false, as_json = false;
  LinterFlags linter;
  CLI::Option *o_input{}, *o_output{}, *o_mode{}, *o_samples{}, *o_seed{}, *o_workers{}, *o_sep{}, *o_dedup{},
      *o_unique{}, *o_dirty{}, *o_max_lines{}, *o_skip{};
};

void add_generate(CLI::App& app, GenerateFlags& f) {
  app.add_option("--config", f.config_path, "JSON config file");
  f.o_input = app.add_option("--input,-i", f.input, "JSON-lines corpus");
  f.o_output = app.add_option("--output,-o", f.output, "JSON-lines output");
  f.o_mode = app.add_option("--mode", f.mode, "lintseq or randseq")->check(CLI::IsMember({"lintseq", "randseq"}));
  f.o_samples = app.add_option("--samples,-s", f.samples, "edit sequences per example");
  f.o_seed = app.add_option("--seed", f.seed, "global seed");
  f.o_workers = app.add_option("--workers", f.workers, "worker threads");
  f.o_sep = app.add_option("--separator", f.separator, "edit separator token");
  f.o_dedup = app.add_flag("--dedup", f.dedup, "drop byte-identical programs");
  f.o_unique = app.add_flag("--unique-sequences", f.unique_sequences, "resample duplicate sequences");
  f.o_dirty = app.add_flag("--skip-dirty", f.skip_dirty, "skip programs that already have findings");
  f.o_max_lines = app.add_option("--max-lines", f.max_lines, "skip programs longer than this");
  f.o_skip = app.add_option("--max-skip-fraction", f.max_skip_fraction,
                            "exit 2 when more than this fraction of examples is skipped");
  app.add_flag("--json", f.as_json, "summary as a JSON line");
  f.linter.add_to(app);
}

int run_generate(GenerateFlags& f, std::ostream& err) {
  Config config = f.config_path.empty() ? Config() : Config(f.config_path);
  config.apply("input", f.o_input, f.input);
  config.apply("output", f.o_output, f.output);
  config.apply("mode", f.o_mode, f.mode);
  config.apply("samples", f.o_samples, f.samples);
  config.apply("seed", f.o_seed, f.seed);
  config.apply("workers", f.o_workers, f.workers);
  config.apply("separator", f.o_sep, f.separator);
  config.apply("dedup", f.o_dedup, f.dedup);
  config.apply("unique_sequences", f.o_unique, f.unique_sequences);
  config.apply("skip_dirty", f.o_dirty, f.skip_dirty);
  config.apply("max_lines", f.o_max_lines, f.max_lines);
  config.apply("max_skip_fraction", f.o_skip, f.max_skip_fraction);

  RunConfig rc;
  rc.linter = make_linter(f.linter, config);
  config.reject_unknown();
  rc.input = f.input;
  rc.output = f.output;
  try {
    rc.mode = parse_mode(f.mode);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  rc.samples = f.samples;
  rc.seed = f.seed;
  rc.workers = f.workers;
  rc.separator = f.separator;
  rc.dedup = f.dedup;
  rc.unique_sequences = f.unique_sequences;
  rc.skip_dirty = f.skip_dirty;
  rc.max_lines = f.max_lines;
  rc.max_skip_fraction = f.max_skip_fraction;
  try {
    rc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  const GenerateSummary s = generate(rc);
  const std::size_t inputs = s.loaded + s.load_issues.size();
  const double skip_fraction = inputs == 0 ? 0.0 : static_cast<double>(s.skipped()) / static_cast<double>(inputs);
  const int status = skip_fraction > rc.max_skip_fraction ? kExitPartial : kExitOk;

  for (const auto& issue : s.load_issues) {
    json j{{"status", "skip"}, {"line", issue.line}, {"message", issue.message}};
    err << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
  for (const auto& skip : s.skips) {
    json j{{"status", "skip"}, {"source_id", skip.source_id}, {"reason", to_string(skip.reason)},
           {"message", skip.message}};
    err << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
  if (f.as_json) {
    json j;
    j["status"] = status == kExitOk ? "ok" : "partial";
    j["mode"] = to_string(rc.mode);
    j["examples"] = s.examples;
    j["dedup_removed"] = s.dedup_removed;
    j["sequences"] = s.sequences;
    j["duplicate_sequences"] = s.duplicate_sequences;
    j["skipped"] = s.skipped();
    j["mean_edits"] = s.mean_edits;
    j["wall_seconds"] = s.wall_seconds;
    err << j.dump() << '\n';
  } else {
    err << "examples " << s.examples << ", sequences " << s.sequences << ", skipped " << s.skipped()
        << ", mean edits " << fixed4(s.mean_edits) << ", wall " << std::setprecision(3) << s.wall_seconds << "s\n";
    if (s.dedup_removed) err << "dedup removed " << s.dedup_removed << '\n';
    if (s.duplicate_sequences) err << "duplicate sequences kept " << s.duplicate_sequences << '\n';
  }
  return status;
}

// ---- resolve ----

struct ResolveFlags {
  std::string input, output, separator = std::string(kDefaultSeparator);
  bool as_json = false;
};

int run_resolve(const ResolveFlags& f, std::ostream& err) {
  try {
    validate_separator(f.separator);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const ResolveSummary s = resolve_records(f.input, f.output, f.separator);
  const int status = (s.conflicts > 0 || s.malformed > 0) ? kExitPartial : kExitOk;
  if (f.as_json) {
    json j{{"status", status == kExitOk ? "ok" : "partial"}, {"records", s.records}, {"resolved", s.resolved},
           {"conflicts", s.conflicts}, {"malformed", s.malformed}, {"mismatches", s.mismatches}};
    err << j.dump() << '\n';
  } else {
    err << "records " << s.records << ", resolved " << s.resolved << ", conflicts " << s.conflicts
        << ", malformed " << s.malformed << ", mismatches " << s.mismatches << '\n';
  }
  return status;
}

// ---- stats ----

int run_stats(const std::string& input, bool as_json, std::ostream& out, std::ostream& err) {
  const auto loaded = load_records(input);
  const DatasetStats st = dataset_stats(loaded.items);
  if (as_json) {
    json j;
    j["examples"] = st.example_count;
    j["sequences"] = st.sequence_count;
    j["skipped"] = loaded.skipped();
    j["lines_per_example"] = histogram_json(st.lines_per_example, true);
    j["edits_per_sequence"] = histogram_json(st.edits_per_sequence, true);
    j["chars_per_training_text"] = histogram_json(st.chars_per_training_text, false);
    out << j.dump() << '\n';
  } else {
    auto row = [&](const char* name, const Histogram& h) {
      out << std::left << std::setw(26) << name << std::right << std::setw(12) << fixed4(h.mean()) << std::setw(10)
          << (h.counts.empty() ? 0 : h.counts.begin()->first) << std::setw(10)
          << (h.counts.empty() ? 0 : h.counts.rbegin()->first) << '\n';
    };
    out << "examples " << st.example_count << ", sequences " << st.sequence_count << '\n';
    out << std::left << std::setw(26) << "quantity" << std::right << std::setw(12) << "mean" << std::setw(10) << "min"
        << std::setw(10) << "max" << '\n';
    row("lines per example", st.lines_per_example);
    row("edits per sequence", st.edits_per_sequence);
    row("chars per training text", st.chars_per_training_text);
  }
  for (const auto& issue : loaded.issues) {
    json j{{"status", "skip"}, {"line", issue.line}, {"message", issue.message}};
    err << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
  return loaded.skipped() > 0 ? kExitPartial : kExitOk;
}

// ---- passk ----

int run_passk(const std::vector<std::uint64_t>& values, bool as_json, std::ostream& out) {
  if (values.empty() || values.size() % 3 != 0) {
    throw ConfigError("passk expects n c k triples");
  }
  std::vector<double> results;
  for (std::size_t i = 0; i < values.size(); i += 3) {
    try {
      results.push_back(pass_at_k(values[i], values[i + 1], values[i + 2]));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (!as_json) out << "n\tc\tk\tpass@k\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto n = values[3 * i], c = values[3 * i + 1], k = values[3 * i + 2];
    if (as_json) {
      json j{{"n", n}, {"c", c}, {"k", k}, {"pass_at_k", results[i]}};
      out << j.dump() << '\n';
    } else {
      out << n << '\t' << c << '\t' << k << '\t' << fixed4(results[i]) << '\n';
    }
  }
  return kExitOk;
}

// ---- flops ----

struct FlopsFlags {
  std::uint64_t params = 0, layers = 0, context = 0, tokens = 0, samples = 1, problems = 1;
  double avg_chars = 0.0, chars_per_token = 0.0;
  bool as_json = false;
  CLI::Option *o_tokens{}, *o_chars{}, *o_ratio{};
};

int run_flops(const FlopsFlags& f, std::ostream& out) {
  FlopsModel m;
  m.n_params = f.params;
  m.n_layers = f.layers;
  m.context = f.context;
  m.samples_per_problem = f.samples;
  m.problems = f.problems;
  if (f.o_tokens->count() > 0) {
    m.avg_tokens_per_sample = f.tokens;
  } else if (f.o_chars->count() > 0) {
    if (!(f.chars_per_token > 0.0) || !(f.avg_chars > 0.0) || !std::isfinite(f.avg_chars)) {
      throw ConfigError("--avg-chars and --chars-per-token must be positive");
    }
    const double t = std::ceil(f.avg_chars / f.chars_per_token);
    if (!(t < 1.8e19)) throw ConfigError("token count out of range");
    m.avg_tokens_per_sample = static_cast<std::uint64_t>(t);
  } else {
    m.avg_tokens_per_sample = 1;
  }
  FlopCount per_token = 0, total = 0;
  try {
    per_token = flops_per_token(m);
    total = total_flops(m);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (f.as_json) {
    // Decimal strings: the values may exceed the exact range of a JSON number.
    json j{{"flops_per_token", to_decimal(per_token)},
           {"tokens_per_sample", m.avg_tokens_per_sample},
           {"samples_per_problem", m.samples_per_problem},
           {"problems", m.problems},
           {"total_flops", to_decimal(total)}};
    out << j.dump() << '\n';
  } else {
    out << "flops_per_token " << to_decimal(per_token) << '\n';
    out << "tokens_per_sample " << m.avg_tokens_per_sample << '\n';
    out << "total_flops " << to_decimal(total) << '\n';
  }
  return kExitOk;
}

// ---- lintcheck ----

struct LintcheckFlags {
  std::string input;
  std::int64_t workers = 1;
  bool as_json = false;
  LinterFlags linter;
};

int run_lintcheck(LintcheckFlags& f, std::ostream& out, std::ostream& err) {
  Config none;
  const LinterSpec spec = make_linter(f.linter, none);
  if (f.workers < 1) throw ConfigError("workers must be at least 1");
  const auto loaded = load_corpus(f.input);
  std::vector<std::string> programs;
  programs.reserve(loaded.items.size());
  for (const auto& ex : loaded.items) programs.push_back(ex.program);
  LinterOptions lopts;
  lopts.max_processes = static_cast<std::size_t>(f.workers);
  Linter linter(spec, lopts);
  const LintErrorRate r = lint_error_rate(programs, linter, static_cast<std::size_t>(f.workers));
  if (f.as_json) {
    json j;
    j["rate"] = r.rate;
    j["checked"] = r.checked;
    j["with_findings"] = r.with_findings;
    j["failed"] = r.failed;
    j["by_code"] = json::object();
    for (const auto& [code, n] : r.by_code) j["by_code"][code] = n;
    out << j.dump() << '\n';
  } else {
    out << "error rate " << fixed4(r.rate) << " (" << r.with_findings << "/" << r.checked << ")";
    if (r.failed) out << ", linter failures " << r.failed;
    out << '\n';
    for (const auto& [code, n] : r.by_code) out << "  " << code << '\t' << n << '\n';
  }
  for (const auto& issue : loaded.issues) {
    json j{{"status", "skip"}, {"line", issue.line}, {"message", issue.message}};
    err << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
  return (r.failed > 0 || loaded.skipped() > 0) ? kExitPartial : kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Edit-sequence data generation via linter-guided line deletion", "lintseq"};
  app.require_subcommand(1);

  GenerateFlags gen;
  add_generate(*app.add_subcommand("generate", "sample edit sequences for a corpus"), gen);

  ResolveFlags res;
  auto* resolve_cmd = app.add_subcommand("resolve", "rebuild programs from training strings");
  resolve_cmd->add_option("--input,-i", res.input, "generated records")->required();
  resolve_cmd->add_option("--output,-o", res.output, "resolved programs")->required();
  resolve_cmd->add_option("--separator", res.separator, "edit separator token");
  resolve_cmd->add_flag("--json", res.as_json, "summary as a JSON line");

  std::string stats_input;
  bool stats_json = false;
  auto* stats_cmd = app.add_subcommand("stats", "dataset statistics for generated records");
  stats_cmd->add_option("--input,-i", stats_input, "generated records")->required();
  stats_cmd->add_flag("--json", stats_json, "JSON report");

  std::vector<std::uint64_t> passk_values;
  bool passk_json = false;
  auto* passk_cmd = app.add_subcommand("passk", "unbiased pass@k for n c k triples");
  passk_cmd->add_option("values", passk_values, "n c k [n c k ...]")->required();
  passk_cmd->add_flag("--json", passk_json, "one JSON line per triple");

  FlopsFlags fl;
  auto* flops_cmd = app.add_subcommand("flops", "inference FLOPs estimate");
  flops_cmd->add_option("--params", fl.params, "parameter count N")->required();
  flops_cmd->add_option("--layers", fl.layers, "layer count L")->required();
  flops_cmd->add_option("--context", fl.context, "context length C")->required();
  fl.o_tokens = flops_cmd->add_option("--tokens", fl.tokens, "tokens per sample T");
  fl.o_chars = flops_cmd->add_option("--avg-chars", fl.avg_chars, "characters per sample");
  fl.o_ratio = flops_cmd->add_option("--chars-per-token", fl.chars_per_token, "characters per token");
  fl.o_tokens->excludes(fl.o_chars);
  fl.o_chars->needs(fl.o_ratio);
  flops_cmd->add_option("--samples", fl.samples, "samples per problem K");
  flops_cmd->add_option("--problems", fl.problems, "problem count M");
  flops_cmd->add_flag("--json", fl.as_json, "JSON report");

  LintcheckFlags lc;
  auto* lint_cmd = app.add_subcommand("lintcheck", "fraction of programs with findings");
  lint_cmd->add_option("--input,-i", lc.input, "JSON-lines file with a program field")->required();
  lint_cmd->add_option("--workers", lc.workers, "worker threads");
  lint_cmd->add_flag("--json", lc.as_json, "JSON report");
  lc.linter.add_to(*lint_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    error_record(err, "usage", e.what());
    return kExitFatal;
  }

  try {
    if (app.got_subcommand("generate")) return run_generate(gen, err);
    if (app.got_subcommand("resolve")) return run_resolve(res, err);
    if (app.got_subcommand("stats")) return run_stats(stats_input, stats_json, out, err);
    if (app.got_subcommand("passk")) return run_passk(passk_values, passk_json, out);
    if (app.got_subcommand("flops")) return run_flops(fl, out);
    if (app.got_subcommand("lintcheck")) return run_lintcheck(lc, out, err);
  } catch (const ConfigError& e) {
    error_record(err, "config", e.what());
    return kExitFatal;
  } catch (const CorpusError& e) {
    error_record(err, "io", e.what());
    return kExitFatal;
  } catch (const LintError& e) {
    error_record(err, "linter", e.what());
    return kExitFatal;
  } catch (const std::overflow_error& e) {
    error_record(err, "overflow", e.what());
    return kExitFatal;
  } catch (const std::exception& e) {
    error_record(err, "internal", e.what());
    return kExitFatal;
  }
  error_record(err, "usage", "no subcommand");
  return kExitFatal;
}

}  // namespace lintseq
