#pragma once

#include <string>
#include <vector>

namespace hdltex {

// Entry point behind the `hdltex` binary. `args` excludes the program name.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
int run_command(const std::vector<std::string>& args);

}  // namespace hdltex
