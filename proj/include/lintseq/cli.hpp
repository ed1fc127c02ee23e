#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lintseq {

enum ExitStatus : int { kExitOk = 0, kExitFatal = 1, kExitPartial = 2 };

// `args` excludes the program name. Data goes to `out`; summaries,
// progress and single-line JSON error records go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lintseq
