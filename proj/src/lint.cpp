#include <algorithm>
#include <map>
#include <mutex>
#include <semaphore>
#include <shared_mutex>
#include <unordered_map>

#include "lintseq/lint.hpp"
#include "lintseq/text.hpp"

namespace lintseq {

LintReport make_report(std::vector<LintFinding> findings) {
  std::sort(findings.begin(), findings.end(), [](const LintFinding& a, const LintFinding& b) {
    return std::tie(a.line, a.code, a.message) < std::tie(b.line, b.code, b.message);
  });
  LintReport report;
  report.fingerprint.reserve(findings.size());
  for (const auto& f : findings) report.fingerprint.emplace_back(f.code, f.message);
  std::sort(report.fingerprint.begin(), report.fingerprint.end());
  report.findings = std::move(findings);
  return report;
}

LinterSpec LinterSpec::builtin() { return LinterSpec{}; }

LinterSpec LinterSpec::external(std::string command_template, std::string finding_pattern) {
  LinterSpec spec;
  spec.kind = LinterKind::External;
  spec.command_template = std::move(command_template);
  spec.finding_pattern = std::move(finding_pattern);
  return spec;
}

void LinterSpec::validate() const {
  if (timeout.count() <= 0) throw std::invalid_argument("linter timeout must be positive");
  if (kind == LinterKind::Builtin) return;
  if (command_template.empty()) throw std::invalid_argument("external linter requires a command template");
  if (command_template.find(kPathPlaceholder) == std::string::npos) {
    throw std::invalid_argument("external linter command must contain the {path} placeholder");
  }
  if (finding_pattern.empty()) throw std::invalid_argument("external linter requires a finding pattern");
  const auto compiled = external::compile_pattern(finding_pattern);
  if (compiled.line_group == 0 || compiled.code_group == 0 || compiled.message_group == 0) {
    throw std::invalid_argument("finding pattern needs named groups line, code and message");
  }
}

LinterTimeout::LinterTimeout(std::uint64_t program_hash)
    : LintError("linter timed out on program " + hex64(program_hash)), program_hash_(program_hash) {}

LintReport check(std::string_view program, const LinterSpec& linter) {
  if (split_lines(program).empty()) return LintReport{};
  if (linter.kind == LinterKind::Builtin) {
    auto findings = python::check_source(program);
    if (!linter.include_warnings) {
      std::erase_if(findings, [](const LintFinding& f) { return f.severity != Severity::Error; });
    }
    return make_report(std::move(findings));
  }
  return external::run(program, linter);
}

bool same_trace(const LintReport& candidate, const LintReport& baseline) {
  return candidate.fingerprint == baseline.fingerprint;
}

std::vector<std::size_t> new_finding_lines(const LintReport& candidate, const LintReport& baseline) {
  std::map<std::pair<std::string, std::string>, long> balance;
  for (const auto& key : baseline.fingerprint) --balance[key];
  for (const auto& key : candidate.fingerprint) ++balance[key];
  std::vector<std::size_t> lines;
  for (const auto& f : candidate.findings) {
    auto it = balance.find({f.code, f.message});
    if (it != balance.end() && it->second > 0) lines.push_back(f.line);
  }
  std::sort(lines.begin(), lines.end());
  lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
  return lines;
}

namespace {

std::vector<std::size_t> affected_from(const LintReport& report, const LintReport& baseline) {
  if (same_trace(report, baseline)) {
    throw LintError("affected_lines: candidate is already error-free relative to the baseline");
  }
  auto lines = new_finding_lines(report, baseline);
  if (lines.empty()) {
    throw LintError("affected_lines: candidate differs from the baseline only by missing findings");
  }
  return lines;
}

}  // namespace

bool is_error_free_relative(std::string_view candidate, const LintReport& baseline, const LinterSpec& linter) {
  return same_trace(check(candidate, linter), baseline);
}

std::vector<std::size_t> affected_lines(std::string_view candidate, const LintReport& baseline,
                                        const LinterSpec& linter) {
  return affected_from(check(candidate, linter), baseline);
}

struct Linter::State {
  explicit State(std::size_t processes) : process_slots(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, processes))) {}
  mutable std::shared_mutex mutex;
  std::unordered_map<std::string, LintReport> cache;
  std::size_t capacity = 0;
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::counting_semaphore<> process_slots;
};

Linter::Linter(LinterSpec spec, LinterOptions options)
    : spec_(std::move(spec)), state_(std::make_unique<State>(options.max_processes)) {
  spec_.validate();
  state_->capacity = options.cache_capacity;
}

Linter::~Linter() = default;

LintReport Linter::check(std::string_view program) const {
  if (state_->capacity > 0) {
    std::shared_lock lock(state_->mutex);
    if (auto it = state_->cache.find(std::string(program)); it != state_->cache.end()) {
      LintReport hit = it->second;
      lock.unlock();
      std::unique_lock count(state_->mutex);
      ++state_->hits;
      return hit;
    }
  }
  LintReport report;
  if (spec_.kind == LinterKind::External && !split_lines(program).empty()) {
    state_->process_slots.acquire();
    try {
      report = lintseq::check(program, spec_);
    } catch (...) {
      state_->process_slots.release();
      throw;
    }
    state_->process_slots.release();
  } else {
    report = lintseq::check(program, spec_);
  }
  std::unique_lock lock(state_->mutex);
  ++state_->misses;
  if (state_->capacity > 0) {
    if (state_->cache.size() >= state_->capacity) state_->cache.clear();
    state_->cache.insert_or_assign(std::string(program), report);
  }
  return report;
}

bool Linter::is_error_free_relative(std::string_view candidate, const LintReport& baseline) const {
  return same_trace(check(candidate), baseline);
}

std::vector<std::size_t> Linter::affected_lines(std::string_view candidate, const LintReport& baseline) const {
  return affected_from(check(candidate), baseline);
}

std::size_t Linter::cache_hits() const {
  std::shared_lock lock(state_->mutex);
  return state_->hits;
}

std::size_t Linter::cache_misses() const {
  std::shared_lock lock(state_->mutex);
  return state_->misses;
}

}  // namespace lintseq
