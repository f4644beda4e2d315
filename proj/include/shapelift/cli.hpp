#pragma once

// Command-line front end. `run` is what main() calls; it is a library
// function so the tests can drive every subcommand in-process.
//
// Exit codes: 0 success, 2 numerical failure, 64 usage error, 65 malformed
// or unreadable data.

#include <ostream>
#include <string>
#include <vector>

#include "shapelift/error.hpp"

namespace shapelift::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitData = 65;

int exit_code_for(ErrorCode code) noexcept;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shapelift::cli
