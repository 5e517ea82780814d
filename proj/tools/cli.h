// Command-line front end. Exit codes: 0 success, 2 input error,
// 3 search exhausted, 4 model schema error.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace melcomp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSearchExhausted = 3;
inline constexpr int kExitSchema = 4;

/// Runs one invocation; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace melcomp::cli
