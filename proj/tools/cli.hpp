#pragma once

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

namespace zerolm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDegenerate = 3;

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception &e);

/// Runs the command line; argv[0] is the program name.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace zerolm::cli
