#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace affmetric {

// Runs the command-line front end on args (program name excluded).
// Exit codes: 0 success, 1 mismatch or rank failure, 2 usage or parse error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Golden artifacts keyed by path relative to the golden directory.
std::map<std::string, std::string> golden_files();

}  // namespace affmetric
