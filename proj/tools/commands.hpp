#pragma once

#include <string>
#include <vector>

namespace curb::cli {

/// Exit statuses of curbctl.
enum ExitCode : int {
  kOk = 0,
  kBadConfig = 1,    // invalid config file, flag or value
  kMissingInput = 2,  // a required input file or directory does not exist
  kNumeric = 3,      // training produced a non-finite loss or gradient
  kFailure = 4,      // any other error (corrupt input, I/O failure, ...)
};

/// Runs one curbctl invocation. args[0] is the program name.
int run(const std::vector<std::string>& args);

}  // namespace curb::cli
