#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace weyl::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kHypothesisFailure = 1;
inline constexpr int kNumericalFailure = 2;
inline constexpr int kConfigFailure = 3;

/// Runs one subcommand; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace weyl::cli
