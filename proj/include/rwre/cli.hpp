#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rwre {

/// Runs one command line. Exit codes: 0 success, 1 validation error,
/// 2 numeric failure, 3 budget exceeded. Failures print a JSON error object
/// on `err`; reports go to `out` unless a path option is given.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rwre
