#pragma once

#include <string>
#include <vector>

namespace rps {

// Entry point of the command-line tool.  Returns the process exit code:
//   0 success, 2 configuration error, 3 numerical blow-up,
//   4 non-convergence under --strict.
int run_cli(int argc, const char* const* argv);

// Convenience for tests: argv without the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace rps
