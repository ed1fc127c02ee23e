#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lintseq/diffkit.hpp"

namespace lintseq {

inline constexpr std::string_view kDefaultSeparator = "<|diff|>";

// A separator must not be mistakable for a diff line.
void validate_separator(std::string_view separator);

struct TrainingString {
  std::string text;
  std::string separator;
};

// "<sep>\n<diff 1>\n<sep>\n<diff 2>...": the separator precedes every edit.
TrainingString serialize(std::span<const EditDiff> edits, std::string_view separator = kDefaultSeparator);

// Splits an edit stream into per-edit chunks. A boundary is any line that
// begins with the separator; text after the separator on that line starts
// the next chunk. Blank chunks are dropped. A stream without separators is
// a single chunk.
std::vector<std::string> split_edits(std::string_view edit_text,
                                     std::string_view separator = kDefaultSeparator);

// Parses every chunk. Throws ResolveError on the first malformed chunk.
std::vector<EditDiff> deserialize(std::string_view edit_text,
                                  std::string_view separator = kDefaultSeparator);

class ApplyConflict : public std::runtime_error {
 public:
  ApplyConflict(std::size_t hunk_index, const std::string& what);
  std::size_t hunk_index() const { return hunk_index_; }

 private:
  std::size_t hunk_index_;
};

// Hunks are positioned by their old ranges against `base`, in order, with
// the running offset of earlier hunks applied.
std::vector<std::string> apply(std::span<const std::string> base, const EditDiff& edit);
std::string apply(std::string_view base, const EditDiff& edit);

enum class ResolveErrorKind { MalformedDecorator, BodyMismatch, TruncatedHunk, ApplyConflict };

const char* to_string(ResolveErrorKind kind);

struct ResolveFailure {
  ResolveErrorKind kind;
  std::size_t edit_index = 0;   // 0-based chunk that failed
  std::size_t hunk_index = 0;   // 0-based, ApplyConflict only
  std::size_t line = 0;         // 1-based line inside the chunk, parse errors only
  std::string message;
};

struct ResolveOutcome {
  std::string program;                 // after the longest well-formed prefix
  std::vector<std::string> prefixes;   // program after each applied edit
  std::size_t edits_applied = 0;
  std::optional<ResolveFailure> failure;

  bool ok() const { return !failure.has_value(); }
};

class ResolveError : public std::runtime_error {
 public:
  explicit ResolveError(ResolveOutcome outcome);
  const ResolveFailure& failure() const { return *outcome_.failure; }
  const ResolveOutcome& outcome() const { return outcome_; }

 private:
  ResolveOutcome outcome_;
};

// Never throws: applies edits from the empty program until the first
// malformed or conflicting edit and reports where it stopped.
ResolveOutcome resolve_lenient(std::string_view edit_text,
                               std::string_view separator = kDefaultSeparator);

// Throw ResolveError on any failure.
std::string resolve(std::string_view edit_text, std::string_view separator = kDefaultSeparator);
std::vector<std::string> resolve_prefixes(std::string_view edit_text,
                                          std::string_view separator = kDefaultSeparator);

}  // namespace lintseq
