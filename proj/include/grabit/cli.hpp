#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace grabit {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,      // bad flags or invalid arguments
  kExitIo = 3,         // unreadable input or unwritable output
  kExitSchema = 4,     // malformed CSV, model document or scenario file
  kExitBounds = 5,     // response outside the censoring interval
  kExitNumerical = 6,  // non-finite values, log of a non-positive value, failed fit
};

/// Runs one command. `args` excludes the program name, e.g.
/// {"train", "--data", "d.csv", ...}. Messages go to `out` / `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace grabit
