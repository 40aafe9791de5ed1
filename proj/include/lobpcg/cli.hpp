#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lobpcg::cli {

inline constexpr std::string_view kToolName = "lobpcg_kit";
inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kFormatVersion = 1;

// Exit codes.
inline constexpr int kExitConverged = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitMaxIter = 2;
inline constexpr int kExitBreakdown = 3;
inline constexpr int kExitDisconnected = 4;

/// Each command takes its arguments without the program and subcommand
/// names, e.g. {"--matrix", "a.mtx", "--nev", "2", "--out", "r.json"}.
int cmd_solve(const std::vector<std::string>& args);
int cmd_bench(const std::vector<std::string>& args);
int cmd_partition(const std::vector<std::string>& args);

/// Dispatches on args[0] (solve | bench | partition).
int run(const std::vector<std::string>& args);

}  // namespace lobpcg::cli
