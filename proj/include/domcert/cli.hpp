#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace domcert {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNegative = 2;

// Runs `domcert <args...>` (args exclude the program name). Subcommands:
// analyze, check, rates, simulate, pathcomplete.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace domcert
