#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace lintseq {

// An order-preserving subset of a source program's lines.
struct ProgramState {
  std::vector<std::size_t> kept_indices;  // strictly increasing, 0-based
  std::string text;                       // kept lines, each '\n'-terminated

  bool operator==(const ProgramState&) const = default;
};

// States run from the empty program to the full source program; every
// state's kept_indices strictly contains its predecessor's.
struct StateSequence {
  std::string source_id;
  std::vector<ProgramState> states;

  std::size_t num_edits() const { return states.empty() ? 0 : states.size() - 1; }
  bool operator==(const StateSequence&) const = default;
};

}  // namespace lintseq
