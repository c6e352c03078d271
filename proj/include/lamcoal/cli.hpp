#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lamcoal {

/// Exit codes of the command-line tool.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int numeric_failure = 1;
inline constexpr int refused = 2;  // bad flags, malformed config, precondition or guard
}  // namespace exit_code

/// Runs one subcommand: psi-eval, speed-table, simulate, stable-sample,
/// simulate-z, fluctuations, sup-scaling or counterexample. Outputs and a
/// <subcommand>.manifest.json are written to --out-dir, else $LAMCOAL_OUT_DIR,
/// else the working directory.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace lamcoal
