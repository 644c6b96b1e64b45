#ifndef LITMINE_TOOLS_CLI_HPP
#define LITMINE_TOOLS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace litmine::cli {

/// Runs one command line (argv[0] included). Errors go to `err` as a single
/// line and yield a nonzero status.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

} // namespace litmine::cli

#endif
