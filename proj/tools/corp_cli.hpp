#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace corp::cli {

enum ExitCode : int {
    kOk = 0,
    kInputError = 1,
    kCertificateFailed = 2,
    kDiverged = 3,
};

/// Run one command line (argv[0] included). Diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace corp::cli
