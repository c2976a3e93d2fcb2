#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ecoevo::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kUsageError = 2;  // bad flags, missing input, bad config
inline constexpr int kCheckpointError = 3;

// Entry point shared by the executable and the tests. args[0] is the program
// name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ecoevo::cli
