#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hrcalc::experiments {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

// Names of all subcommands in help order.
std::vector<std::string> cli_commands();

// Runs `hrcalc <subcommand> [--config FILE] [--seed N] [--steps N] [--out PATH]
// [--set key=value]...` with args excluding the program name. CSV output goes
// to --out when given, else to `out`; diagnostics go to `err`. Config files
// and --set accept the subcommand's parameters plus seed, steps and out;
// command-line flags win over the config file.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hrcalc::experiments
