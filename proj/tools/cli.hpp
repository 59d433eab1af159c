#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ddlab::cli {

// Exit codes: 0 clean run, 1 violations or library errors, 2 bad configuration.
inline constexpr int kExitOk = 0;
inline constexpr int kExitViolations = 1;
inline constexpr int kExitConfig = 2;

// args excludes the program name. Reports go to `out` (or to --out), one
// JSON object per line with sorted keys; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ddlab::cli
