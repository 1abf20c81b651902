#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace arakelov::cli {

constexpr const char* kSchema = "arakelov-lab/1";

/// Exit codes: 0 success, 1 error, 2 an inequality check failed.
enum ExitCode : int { kOk = 0, kError = 1, kCheckFailed = 2 };

/// Runs the tool on args (without the program name). The JSON report goes to
/// out (or to --out), diagnostics to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace arakelov::cli
