#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lintseq {

// Programs are handled as line lists. The canonical text form terminates
// every line with '\n', so join_lines/split_lines are exact inverses and
// the empty program (no lines) is distinct from a single blank line.

std::vector<std::string> split_lines(std::string_view text);
std::string join_lines(std::span<const std::string> lines);

// CRLF and lone CR become LF.
std::string normalize_newlines(std::string_view text);

bool is_valid_utf8(std::string_view bytes);

bool is_blank(std::string_view line);

// FNV-1a, 64-bit. Used for diagnostics and temp-file naming, not equality.
std::uint64_t content_hash(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace lintseq
