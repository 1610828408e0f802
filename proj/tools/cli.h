#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pcc::cli {

// Exit statuses shared by every subcommand.
enum ExitStatus : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

// Runs one command line (without the program name) and returns its status.
// Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pcc::cli
