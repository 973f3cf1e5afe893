#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace emd::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFile = 3;

/// Runs one command line (without the program name). The JSON report goes to `out`, usage and
/// diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace emd::cli
