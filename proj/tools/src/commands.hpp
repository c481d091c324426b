#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dynapool::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
  kPartialFailure = 3,
};

/// Runs the tool with `args` (program name excluded). Results go to `out`,
/// diagnostics to `err`; log records go to the process-wide spdlog logger.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Reads DYNAPOOL_LOG (trace, debug, info, warn, error, critical, off) and
/// installs a stderr logger. Unknown values fall back to warn.
void configure_logging();

}  // namespace dynapool::cli
