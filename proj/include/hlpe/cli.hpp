#pragma once

#include <iosfwd>

namespace hlpe {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

// Parses the command line and runs one subcommand. Reports go to `out`,
// diagnostics and load warnings to `err`. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hlpe
