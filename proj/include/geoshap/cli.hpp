#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace geoshap {

// Entry point of the geoshap command-line tool. `args` excludes the program
// name. Returns the process exit code: 0 on success, 2 configuration,
// 3 data, 4 predictor or protocol, 5 numerical failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace geoshap
