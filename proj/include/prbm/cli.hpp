#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace prbm::cli {

/// Runs one `prbm` subcommand. Returns 0 on success, 1 on a domain error and
/// 2 on a usage error. `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

/// Parses "log:lo:hi:n", "lin:lo:hi:n" or a comma-separated list.
std::vector<double> parse_grid(const std::string& spec);

}  // namespace prbm::cli
