#pragma once
// Command-line front end. Exit codes: 0 no reject / success, 3 reject,
// 1 usage error, 2 data error.

#include <iosfwd>
#include <string>
#include <vector>

namespace subdetect::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitReject = 3;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace subdetect::cli
