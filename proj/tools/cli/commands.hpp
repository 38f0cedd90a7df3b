#pragma once

#include <iosfwd>

namespace tiledwt::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDefective = 1;  // inspect only
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

// Runs one `tiledwt <subcommand> ...` invocation. Reports go to `out`,
// diagnostics and timing to `err`. argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tiledwt::cli
