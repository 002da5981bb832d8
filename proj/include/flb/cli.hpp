#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flb {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitLoad = 2, kExitRuntime = 3 };

/// Runs one subcommand: simulate, ne-solve, estimate-mc or compare.
/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace flb
