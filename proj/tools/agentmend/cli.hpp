#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace agentmend::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainFailure = 1;  // rejected fix, unresolved, failed pattern
inline constexpr int kExitUsage = 2;          // bad flags, missing files, bad config

/// Runs one command line (args[0] is the program name). Logs go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace agentmend::cli
