#pragma once

#include <ostream>

namespace impedance::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitStrict = 3;
inline constexpr int kExitNoConvergence = 4;

// Runs the command line front end; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace impedance::cli
