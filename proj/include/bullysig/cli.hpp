#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bullysig::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // validation, resource or metric errors
inline constexpr int kExitUsage = 2;    // unknown command or flag, bad flag value

// Runs one command. `args` excludes the program name. Normal output goes to
// `out`, diagnostics and help after a usage error to `err`. The seed falls
// back to the BULLYSIG_SEED environment variable and then to 42.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bullysig::cli
