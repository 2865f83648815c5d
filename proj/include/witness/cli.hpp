#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace witness {

/// Exit codes of the command-line front end.
enum ExitCode : int { kPass = 0, kFinding = 1, kError = 2, kExhausted = 3 };

/// args excludes the program name. Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace witness
