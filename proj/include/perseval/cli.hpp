#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace perseval::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

/// Parses a flat `key = value` file. Blank lines and lines starting with '#'
/// are ignored; keys are option names without the leading dashes.
std::map<std::string, std::string> parse_config(std::istream& in, const std::string& source_name);

/// Runs the command line; never throws. Returns the process exit code.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace perseval::cli
