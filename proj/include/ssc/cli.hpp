#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ssc {

/// Entry point behind the `ssc` binary; also callable in-process by tests.
/// `args` excludes the program name. Exit codes: 0 success, 1 usage error,
/// 2 data error, 3 training error.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace ssc
