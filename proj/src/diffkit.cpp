#include "lintseq/diffkit.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <unordered_map>

#include "lintseq/text.hpp"

namespace lintseq {

namespace {

enum class Op : std::uint8_t { Equal, Delete, Insert };

// Forward Myers O((N+M)D) with a per-step snapshot of the diagonal window,
// then a backtrack. On a tie between a deletion and an insertion the
// deletion is taken first, so deletions precede insertions in every run.
std::vector<Op> myers_script(std::span<const int> a, std::span<const int> b) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  const int max = n + m;
  std::vector<Op> ops;
  if (max == 0) return ops;

  const int offset = max + 1;
  std::vector<int> v(2 * static_cast<std::size_t>(max) + 3, 0);
  // trace[d] holds v[k] for k in [-d-1, d+1] as it was before step d.
  std::vector<std::vector<int>> trace;
  int final_d = -1;
  for (int d = 0; d <= max && final_d < 0; ++d) {
    trace.emplace_back(v.begin() + (offset - d - 1), v.begin() + (offset + d + 2));
    for (int k = -d; k <= d; k += 2) {
      int x;
      if (k == -d || (k != d && v[offset + k - 1] < v[offset + k + 1])) {
        x = v[offset + k + 1];
      } else {
        x = v[offset + k - 1] + 1;
      }
      int y = x - k;
      while (x < n && y < m && a[x] == b[y]) {
        ++x;
        ++y;
      }
      v[offset + k] = x;
      if (x >= n && y >= m) {
        final_d = d;
        break;
      }
    }
  }

  int x = n;
  int y = m;
  std::vector<Op> reversed;
  reversed.reserve(static_cast<std::size_t>(n + m));
  for (int d = final_d; d >= 0; --d) {
    const auto& snap = trace[static_cast<std::size_t>(d)];
    auto at = [&](int k) { return snap[static_cast<std::size_t>(k + d + 1)]; };
    const int k = x - y;
    int prev_k;
    if (k == -d || (k != d && at(k - 1) < at(k + 1))) {
      prev_k = k + 1;
    } else {
      prev_k = k - 1;
    }
    const int prev_x = at(prev_k);
    const int prev_y = prev_x - prev_k;
    while (x > prev_x && y > prev_y && x > 0 && y > 0) {
      reversed.push_back(Op::Equal);
      --x;
      --y;
    }
    if (d > 0) {
      if (x == prev_x) {
        reversed.push_back(Op::Insert);
      } else {
        reversed.push_back(Op::Delete);
      }
    }
    x = prev_x;
    y = prev_y;
  }
  ops.assign(reversed.rbegin(), reversed.rend());
  return ops;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

bool parse_number(std::string_view text, std::size_t& pos, std::size_t& out) {
  const std::size_t begin = pos;
  while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
  if (pos == begin || pos - begin > 9) return false;
  std::from_chars(text.data() + begin, text.data() + pos, out);
  return true;
}

bool parse_range(std::string_view text, std::size_t& pos, std::size_t& start, std::size_t& len) {
  if (!parse_number(text, pos, start)) return false;
  len = 1;
  if (pos < text.size() && text[pos] == ',') {
    ++pos;
    if (!parse_number(text, pos, len)) return false;
  }
  return true;
}

Hunk parse_decorator(std::string_view line, std::size_t line_no) {
  Hunk hunk;
  std::size_t pos = 0;
  auto fail = [&](const char* why) {
    return DiffError(DiffErrorKind::MalformedDecorator, line_no,
                     std::string("malformed decorator: ") + why + ": '" + std::string(line) + "'");
  };
  if (!starts_with(line, "@@ -")) throw fail("expected '@@ -'");
  pos = 4;
  if (!parse_range(line, pos, hunk.old_start, hunk.old_len)) throw fail("bad old range");
  if (line.substr(pos, 2) != " +") throw fail("expected ' +'");
  pos += 2;
  if (!parse_range(line, pos, hunk.new_start, hunk.new_len)) throw fail("bad new range");
  if (line.substr(pos, 3) != " @@") throw fail("expected closing '@@'");
  if (hunk.old_len + hunk.new_len == 0) throw fail("empty hunk");
  if ((hunk.old_len > 0 && hunk.old_start == 0) || (hunk.new_len > 0 && hunk.new_start == 0)) {
    throw fail("non-empty range starting at line 0");
  }
  return hunk;
}

}  // namespace

const char* to_string(DiffErrorKind kind) {
  switch (kind) {
    case DiffErrorKind::MalformedDecorator: return "MalformedDecorator";
    case DiffErrorKind::BodyMismatch: return "BodyMismatch";
    case DiffErrorKind::TruncatedHunk: return "TruncatedHunk";
    case DiffErrorKind::InvalidSequence: return "InvalidSequence";
  }
  return "Unknown";
}

DiffError::DiffError(DiffErrorKind kind, std::size_t line, const std::string& what)
    : std::runtime_error(what), kind_(kind), line_(line) {}

bool EditDiff::insertion_only() const {
  return std::all_of(hunks.begin(), hunks.end(), [](const Hunk& h) { return h.old_len == 0; });
}

std::string format_range(std::size_t start, std::size_t len) {
  if (len == 1) return std::to_string(start);
  return std::to_string(start) + "," + std::to_string(len);
}

std::string EditDiff::render() const {
  std::string out;
  bool first = true;
  auto line = [&](std::string_view prefix, std::string_view body) {
    if (!first) out += '\n';
    first = false;
    out += prefix;
    out += body;
  };
  for (const auto& h : hunks) {
    line("@@ -", format_range(h.old_start, h.old_len) + " +" + format_range(h.new_start, h.new_len) + " @@");
    for (const auto& d : h.deletions) line("-", d);
    for (const auto& i : h.insertions) line("+", i);
  }
  return out;
}

EditDiff diff(std::span<const std::string> before, std::span<const std::string> after) {
  // Intern lines so the matcher compares integers.
  std::unordered_map<std::string_view, int> ids;
  auto intern = [&](std::span<const std::string> lines) {
    std::vector<int> out;
    out.reserve(lines.size());
    for (const auto& l : lines) {
      auto [it, inserted] = ids.try_emplace(l, static_cast<int>(ids.size()));
      out.push_back(it->second);
    }
    return out;
  };
  const std::vector<int> a = intern(before);
  const std::vector<int> b = intern(after);

  std::size_t prefix = 0;
  while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
  std::size_t suffix = 0;
  while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
         a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix]) {
    ++suffix;
  }
  const auto middle = myers_script(std::span(a).subspan(prefix, a.size() - prefix - suffix),
                                   std::span(b).subspan(prefix, b.size() - prefix - suffix));

  EditDiff result;
  std::size_t i = prefix;
  std::size_t j = prefix;
  std::size_t k = 0;
  while (k < middle.size()) {
    if (middle[k] == Op::Equal) {
      ++i;
      ++j;
      ++k;
      continue;
    }
    Hunk h;
    const std::size_t i0 = i;
    const std::size_t j0 = j;
    while (k < middle.size() && middle[k] != Op::Equal) {
      if (middle[k] == Op::Delete) {
        h.deletions.push_back(before[i++]);
      } else {
        h.insertions.push_back(after[j++]);
      }
      ++k;
    }
    h.old_len = h.deletions.size();
    h.new_len = h.insertions.size();
    h.old_start = h.old_len > 0 ? i0 + 1 : i0;
    h.new_start = h.new_len > 0 ? j0 + 1 : j0;
    result.hunks.push_back(std::move(h));
  }
  return result;
}

EditDiff diff(std::string_view before, std::string_view after) {
  const auto a = split_lines(before);
  const auto b = split_lines(after);
  return diff(std::span<const std::string>(a), std::span<const std::string>(b));
}

std::vector<EditDiff> diff_states(const StateSequence& sequence) {
  auto invalid = [](const std::string& why) {
    return DiffError(DiffErrorKind::InvalidSequence, 0, "invalid state sequence: " + why);
  };
  const auto& states = sequence.states;
  if (states.empty()) throw invalid("no states");
  if (!states.front().kept_indices.empty()) throw invalid("first state is not empty");

  std::vector<std::vector<std::string>> lines;
  lines.reserve(states.size());
  for (std::size_t s = 0; s < states.size(); ++s) {
    const auto& st = states[s];
    lines.push_back(split_lines(st.text));
    if (lines.back().size() != st.kept_indices.size()) {
      throw invalid("state " + std::to_string(s) + " text/indices length mismatch");
    }
    for (std::size_t q = 1; q < st.kept_indices.size(); ++q) {
      if (st.kept_indices[q - 1] >= st.kept_indices[q]) {
        throw invalid("state " + std::to_string(s) + " indices not strictly increasing");
      }
    }
  }

  std::vector<EditDiff> diffs;
  diffs.reserve(states.size() - 1);
  for (std::size_t s = 1; s < states.size(); ++s) {
    const auto& prev = states[s - 1].kept_indices;
    const auto& next = states[s].kept_indices;
    const auto& next_lines = lines[s];
    const auto& prev_lines = lines[s - 1];
    if (next.size() <= prev.size()) throw invalid("state " + std::to_string(s) + " does not grow");

    EditDiff d;
    std::size_t p = 0;  // cursor into prev
    std::size_t q = 0;  // cursor into next
    while (q < next.size()) {
      if (p < prev.size() && prev[p] == next[q]) {
        if (prev_lines[p] != next_lines[q]) {
          throw invalid("state " + std::to_string(s) + " changes a kept line");
        }
        ++p;
        ++q;
        continue;
      }
      if (p < prev.size() && prev[p] < next[q]) {
        throw invalid("state " + std::to_string(s) + " drops index " + std::to_string(prev[p]));
      }
      Hunk h;
      h.old_start = p;
      h.new_start = q + 1;
      while (q < next.size() && (p >= prev.size() || next[q] < prev[p])) {
        h.insertions.push_back(next_lines[q]);
        ++q;
      }
      h.new_len = h.insertions.size();
      d.hunks.push_back(std::move(h));
    }
    if (p != prev.size()) throw invalid("state " + std::to_string(s) + " drops trailing lines");
    diffs.push_back(std::move(d));
  }
  return diffs;
}

EditDiff parse_diff(std::string_view text) {
  const auto lines = split_lines(text);
  EditDiff out;
  std::size_t i = 0;
  const std::size_t n = lines.size();
  while (i < n) {
    const std::string& line = lines[i];
    const std::size_t line_no = i + 1;
    if (is_blank(line) || starts_with(line, "\\")) {
      ++i;
      continue;
    }
    if (out.hunks.empty() && (starts_with(line, "--- ") || starts_with(line, "+++ ") ||
                              line == "---" || line == "+++")) {
      ++i;
      continue;
    }
    if (!starts_with(line, "@@")) {
      if (!out.hunks.empty() && (starts_with(line, "-") || starts_with(line, "+"))) {
        throw DiffError(DiffErrorKind::BodyMismatch, line_no,
                        "body line beyond declared hunk lengths: '" + line + "'");
      }
      throw DiffError(DiffErrorKind::MalformedDecorator, line_no,
                      "expected hunk decorator, found '" + line + "'");
    }
    Hunk h = parse_decorator(line, line_no);
    ++i;
    const std::size_t decorator_line = line_no;
    while (h.deletions.size() < h.old_len || h.insertions.size() < h.new_len) {
      const bool no_body = h.deletions.empty() && h.insertions.empty();
      if (i >= n || (no_body && starts_with(lines[i], "@@"))) {
        if (no_body) {
          throw DiffError(DiffErrorKind::TruncatedHunk, decorator_line, "hunk has no body lines");
        }
        throw DiffError(DiffErrorKind::BodyMismatch, decorator_line,
                        "hunk body shorter than declared -" + std::to_string(h.old_len) + " +" +
                            std::to_string(h.new_len));
      }
      const std::string& body = lines[i];
      if (starts_with(body, "\\")) {
        ++i;
        continue;
      }
      if (starts_with(body, "-") && h.insertions.empty() && h.deletions.size() < h.old_len) {
        h.deletions.push_back(body.substr(1));
      } else if (starts_with(body, "+") && h.deletions.size() == h.old_len &&
                 h.insertions.size() < h.new_len) {
        h.insertions.push_back(body.substr(1));
      } else {
        throw DiffError(DiffErrorKind::BodyMismatch, i + 1,
                        "unexpected body line for hunk at line " + std::to_string(decorator_line) +
                            ": '" + body + "'");
      }
      ++i;
    }
    out.hunks.push_back(std::move(h));
  }
  return out;
}

}  // namespace lintseq
