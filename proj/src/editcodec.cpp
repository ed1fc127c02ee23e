#include "lintseq/editcodec.hpp"

#include "lintseq/text.hpp"

namespace lintseq {

void validate_separator(std::string_view separator) {
  if (separator.empty()) throw std::invalid_argument("separator must not be empty");
  if (separator.find('\n') != std::string_view::npos || separator.find('\r') != std::string_view::npos) {
    throw std::invalid_argument("separator must not contain line breaks");
  }
  const char first = separator.front();
  if (first == '+' || first == '-' || first == '@' || first == '\\' || first == ' ' || first == '\t') {
    throw std::invalid_argument("separator must not begin with a diff line prefix: '" +
                                std::string(separator) + "'");
  }
}

TrainingString serialize(std::span<const EditDiff> edits, std::string_view separator) {
  validate_separator(separator);
  TrainingString out;
  out.separator = std::string(separator);
  for (std::size_t i = 0; i < edits.size(); ++i) {
    if (i > 0) out.text += '\n';
    out.text += separator;
    out.text += '\n';
    out.text += edits[i].render();
  }
  return out;
}

std::vector<std::string> split_edits(std::string_view edit_text, std::string_view separator) {
  std::vector<std::string> chunks;
  std::string current;
  auto flush = [&] {
    if (!is_blank(current)) chunks.push_back(std::move(current));
    current.clear();
  };
  std::size_t begin = 0;
  while (begin <= edit_text.size()) {
    std::size_t end = edit_text.find('\n', begin);
    if (end == std::string_view::npos) end = edit_text.size();
    std::string_view line = edit_text.substr(begin, end - begin);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!separator.empty() && line.substr(0, separator.size()) == separator) {
      flush();
      line.remove_prefix(separator.size());
      if (!line.empty()) {
        current += line;
        current += '\n';
      }
    } else {
      current += line;
      current += '\n';
    }
    if (end == edit_text.size()) break;
    begin = end + 1;
  }
  flush();
  return chunks;
}

namespace {

ResolveErrorKind from_diff_error(DiffErrorKind kind) {
  switch (kind) {
    case DiffErrorKind::BodyMismatch: return ResolveErrorKind::BodyMismatch;
    case DiffErrorKind::TruncatedHunk: return ResolveErrorKind::TruncatedHunk;
    default: return ResolveErrorKind::MalformedDecorator;
  }
}

}  // namespace


std::vector<EditDiff> deserialize(std::string_view edit_text, std::string_view separator) {
  const auto chunks = split_edits(edit_text, separator);
  std::vector<EditDiff> edits;
  edits.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    try {
      edits.push_back(parse_diff(chunks[i]));
    } catch (const DiffError& e) {
      ResolveOutcome outcome;
      outcome.failure = ResolveFailure{from_diff_error(e.kind()), i, 0, e.line(), e.what()};
      throw ResolveError(std::move(outcome));
    }
  }
  return edits;
}

ApplyConflict::ApplyConflict(std::size_t hunk_index, const std::string& what)
    : std::runtime_error(what), hunk_index_(hunk_index) {}

std::vector<std::string> apply(std::span<const std::string> base, const EditDiff& edit) {
  std::vector<std::string> out;
  out.reserve(base.size());
  std::size_t cursor = 0;  // next unconsumed line of base
  for (std::size_t h = 0; h < edit.hunks.size(); ++h) {
    const Hunk& hunk = edit.hunks[h];
    if (hunk.deletions.size() != hunk.old_len || hunk.insertions.size() != hunk.new_len) {
      throw ApplyConflict(h, "hunk " + std::to_string(h) + ": declared lengths disagree with body");
    }
    // Base index where the hunk takes effect.
    const std::size_t at = hunk.old_len == 0 ? hunk.old_start : hunk.old_start - 1;
    if (hunk.old_len > 0 && hunk.old_start == 0) {
      throw ApplyConflict(h, "hunk " + std::to_string(h) + ": deletion range starts at line 0");
    }
    if (at < cursor) {
      throw ApplyConflict(h, "hunk " + std::to_string(h) + ": overlaps or precedes the previous hunk");
    }
    if (at + hunk.old_len > base.size()) {
      throw ApplyConflict(h, "hunk " + std::to_string(h) + ": range -" +
                                 format_range(hunk.old_start, hunk.old_len) + " exceeds " +
                                 std::to_string(base.size()) + " lines");
    }
    for (std::size_t k = 0; k < hunk.old_len; ++k) {
      if (base[at + k] != hunk.deletions[k]) {
        throw ApplyConflict(h, "hunk " + std::to_string(h) + ": line " + std::to_string(at + k + 1) +
                                   " expected '" + hunk.deletions[k] + "' found '" + base[at + k] + "'");
      }
    }
    out.insert(out.end(), base.begin() + static_cast<std::ptrdiff_t>(cursor),
               base.begin() + static_cast<std::ptrdiff_t>(at));
    out.insert(out.end(), hunk.insertions.begin(), hunk.insertions.end());
    cursor = at + hunk.old_len;
  }
  out.insert(out.end(), base.begin() + static_cast<std::ptrdiff_t>(cursor), base.end());
  return out;
}

std::string apply(std::string_view base, const EditDiff& edit) {
  const auto lines = split_lines(base);
  return join_lines(apply(std::span<const std::string>(lines), edit));
}

const char* to_string(ResolveErrorKind kind) {
  switch (kind) {
    case ResolveErrorKind::MalformedDecorator: return "MalformedDecorator";
    case ResolveErrorKind::BodyMismatch: return "BodyMismatch";
    case ResolveErrorKind::TruncatedHunk: return "TruncatedHunk";
    case ResolveErrorKind::ApplyConflict: return "ApplyConflict";
  }
  return "Unknown";
}

ResolveError::ResolveError(ResolveOutcome outcome)
    : std::runtime_error(std::string(to_string(outcome.failure->kind)) + " in edit " +
                         std::to_string(outcome.failure->edit_index) + ": " + outcome.failure->message),
      outcome_(std::move(outcome)) {}

ResolveOutcome resolve_lenient(std::string_view edit_text, std::string_view separator) {
  ResolveOutcome outcome;
  const auto chunks = split_edits(edit_text, separator);
  std::vector<std::string> program;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    EditDiff edit;
    try {
      edit = parse_diff(chunks[i]);
    } catch (const DiffError& e) {
      outcome.failure = ResolveFailure{from_diff_error(e.kind()), i, 0, e.line(), e.what()};
      break;
    }
    try {
      program = apply(std::span<const std::string>(program), edit);
    } catch (const ApplyConflict& e) {
      outcome.failure = ResolveFailure{ResolveErrorKind::ApplyConflict, i, e.hunk_index(), 0, e.what()};
      break;
    }
    outcome.prefixes.push_back(join_lines(program));
    ++outcome.edits_applied;
  }
  outcome.program = join_lines(program);
  return outcome;
}

std::string resolve(std::string_view edit_text, std::string_view separator) {
  auto outcome = resolve_lenient(edit_text, separator);
  if (!outcome.ok()) throw ResolveError(std::move(outcome));
  return std::move(outcome.program);
}

std::vector<std::string> resolve_prefixes(std::string_view edit_text, std::string_view separator) {
  auto outcome = resolve_lenient(edit_text, separator);
  if (!outcome.ok()) throw ResolveError(std::move(outcome));
  return std::move(outcome.prefixes);
}

}  // namespace lintseq
