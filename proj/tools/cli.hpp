#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace betadim::cli {

/// Exit statuses: 0 success, 1 usage, 2 domain error, 3 precision or horizon
/// exhausted.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

const char* version();

}  // namespace betadim::cli
