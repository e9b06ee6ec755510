#pragma once

#include <string>
#include <vector>

namespace switchsim::cli {

// Runs one CLI invocation (args without the program name). Returns the
// process exit code: 0 success, 2 invalid config/usage, 3 learner
// divergence.
int run(const std::vector<std::string>& args);

}  // namespace switchsim::cli
