#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace psst {

/// Runs one CLI invocation. Exit codes: 0 success, 1 validation failure
/// (including usage errors), 2 I/O or endpoint failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace psst
