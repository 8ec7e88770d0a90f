#pragma once

#include <string>
#include <vector>

namespace qkp::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kIoError = 3;
inline constexpr int kSolverError = 4;

// Entry point for the `qkp` tool; returns the process exit code.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace qkp::cli
