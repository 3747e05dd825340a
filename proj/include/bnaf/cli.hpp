#pragma once

#include <string>
#include <vector>

namespace bnaf {

/// Runs one CLI command (args exclude the program name). Returns the process
/// exit code: 0 success, 2 usage/config, 3 numerical/convergence, 4 I/O.
int run_cli(std::vector<std::string> args);

}  // namespace bnaf
