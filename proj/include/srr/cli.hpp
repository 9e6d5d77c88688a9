#pragma once

namespace srr::cli {

// Exit codes: 0 success, 1 usage, 2 data error, 3 external-service failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitService = 3;

// Full command-line entry point (subcommands: score, judge, diagnose, stats,
// sandbox, config). Exposed so tests can drive commands in-process.
int run(int argc, const char* const* argv);

}  // namespace srr::cli
