#pragma once

#include <string>
#include <vector>

namespace mixkin {

// Full command-line entry point. Returns the process exit code:
// 0 success, 2 validation error, 3 convergence failure, 4 internal error.
int run_cli(int argc, const char* const* argv);

// Convenience overload; args exclude the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace mixkin
