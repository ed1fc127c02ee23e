#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lintseq/state.hpp"

namespace lintseq {

// One zero-context unified-diff hunk. For an empty side, the start is the
// number of lines preceding the change (difflib convention); otherwise it is
// the 1-based first line of the range.
struct Hunk {
  std::size_t old_start = 0;
  std::size_t old_len = 0;
  std::size_t new_start = 0;
  std::size_t new_len = 0;
  std::vector<std::string> deletions;
  std::vector<std::string> insertions;

  bool operator==(const Hunk&) const = default;
};

struct EditDiff {
  std::vector<Hunk> hunks;

  bool empty() const { return hunks.empty(); }
  bool insertion_only() const;
  // Decorator + body lines, hunks joined by '\n', no trailing newline.
  std::string render() const;

  bool operator==(const EditDiff&) const = default;
};

enum class DiffErrorKind { MalformedDecorator, BodyMismatch, TruncatedHunk, InvalidSequence };

const char* to_string(DiffErrorKind kind);

class DiffError : public std::runtime_error {
 public:
  DiffError(DiffErrorKind kind, std::size_t line, const std::string& what);
  DiffErrorKind kind() const { return kind_; }
  // 1-based line within the parsed text; 0 when not applicable.
  std::size_t line() const { return line_; }

 private:
  DiffErrorKind kind_;
  std::size_t line_;
};

// LCS (Myers) line diff with zero context lines.
EditDiff diff(std::span<const std::string> before, std::span<const std::string> after);
EditDiff diff(std::string_view before, std::string_view after);

// Phase II: one insertion-only diff per consecutive state pair, computed
// from provenance indices. Throws DiffError(InvalidSequence) when the
// sequence breaks the StateSequence invariants.
std::vector<EditDiff> diff_states(const StateSequence& sequence);

// Accepts the canonical rendering plus tolerant variants (explicit ",1"
// lengths, trailing section text after the closing "@@", ---/+++ headers,
// blank lines between hunks, "\ No newline" markers).
EditDiff parse_diff(std::string_view text);

std::string format_range(std::size_t start, std::size_t len);

}  // namespace lintseq
