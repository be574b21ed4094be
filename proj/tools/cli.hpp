#pragma once

#include <string>
#include <vector>

namespace qmst::cli {

inline constexpr const char* kVersion = "1.0.0";

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInternal = 1;
inline constexpr int kUsage = 2;
inline constexpr int kDataError = 3;
inline constexpr int kDegenerate = 4;

// Entry point shared by the executable and the tests. args[0] is the
// program name.
int run(const std::vector<std::string>& args);

}  // namespace qmst::cli
