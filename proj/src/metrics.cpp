#include "lintseq/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <optional>
#include <set>
#include <stdexcept>
#include <thread>

#include "lintseq/text.hpp"

namespace lintseq {

void Histogram::add(std::size_t value) {
  ++counts[value];
  ++total;
  sum += static_cast<double>(value);
}

DatasetStats dataset_stats(std::span<const EditSequenceRecord> records) {
  DatasetStats stats;
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (seen.insert(r.source_id).second) stats.lines_per_example.add(split_lines(r.program).size());
    stats.edits_per_sequence.add(r.num_edits);
    stats.chars_per_training_text.add(r.training_text.size());
  }
  stats.example_count = seen.size();
  stats.sequence_count = records.size();
  return stats;
}

double pass_at_k(std::uint64_t n, std::uint64_t c, std::uint64_t k) {
  if (c > n) throw std::invalid_argument("pass@k: c must not exceed n");
  if (k < 1 || k > n) throw std::invalid_argument("pass@k: k must lie in [1, n]");
  if (n - c < k) return 1.0;
  double miss = 1.0;
  for (std::uint64_t i = n - c + 1; i <= n; ++i) miss *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
  return 1.0 - miss;
}

namespace {

FlopCount checked_mul(FlopCount a, FlopCount b) {
  if (a != 0 && b > ~FlopCount{0} / a) throw std::overflow_error("FLOP count exceeds 128 bits");
  return a * b;
}

FlopCount checked_add(FlopCount a, FlopCount b) {
  if (b > ~FlopCount{0} - a) throw std::overflow_error("FLOP count exceeds 128 bits");
  return a + b;
}

}  // namespace

FlopCount flops_per_token(const FlopsModel& m) {
  if (m.n_params == 0 || m.n_layers == 0 || m.context == 0) {
    throw std::invalid_argument("FLOPs model needs positive parameter, layer and context counts");
  }
  const FlopCount attention = checked_mul(checked_mul(2, m.n_layers), m.context);
  return checked_mul(2, checked_add(m.n_params, attention));
}

FlopCount total_flops(const FlopsModel& m) {
  if (m.avg_tokens_per_sample == 0 || m.samples_per_problem == 0 || m.problems == 0) {
    throw std::invalid_argument("FLOPs model needs positive token, sample and problem counts");
  }
  FlopCount total = flops_per_token(m);
  total = checked_mul(total, m.avg_tokens_per_sample);
  total = checked_mul(total, m.samples_per_problem);
  return checked_mul(total, m.problems);
}

std::string to_decimal(FlopCount value) {
  if (value == 0) return "0";
  std::string digits;
  while (value > 0) {
    digits += static_cast<char>('0' + static_cast<int>(value % 10));
    value /= 10;
  }
  std::reverse(digits.begin(), digits.end());
  return digits;
}

LintErrorRate lint_error_rate(std::span<const std::string> programs, const Linter& linter, std::size_t workers) {
  if (programs.empty()) throw std::invalid_argument("lint error rate is undefined for an empty set");
  std::vector<std::optional<LintReport>> reports(programs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < programs.size(); i = next.fetch_add(1)) {
      try {
        reports[i] = linter.check(programs[i]);
      } catch (const LintError&) {
        reports[i].reset();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(workers, 1, programs.size());
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  LintErrorRate out;
  for (const auto& r : reports) {
    if (!r) {
      ++out.failed;
      continue;
    }
    ++out.checked;
    if (r->clean()) continue;
    ++out.with_findings;
    std::set<std::string> codes;
    for (const auto& f : r->findings) codes.insert(f.code);
    for (const auto& code : codes) ++out.by_code[code];
  }
  if (out.checked == 0) throw std::invalid_argument("lint error rate is undefined: every program failed to lint");
  out.rate = static_cast<double>(out.with_findings) / static_cast<double>(out.checked);
  return out;
}

}  // namespace lintseq
