#pragma once

#include <ostream>

namespace ncdp::cli {

/// Exit codes.
enum Exit : int {
    kOk = 0,
    kBadInput = 1,
    kConditionFails = 2,
    kUndecided = 3,
    kSearchFailed = 4,
    kBudget = 5,
};

/// Entry point shared by the executable and the tests:
///   check <file>
///   solve <file> [--grid K --bmax B --eps E --eps-gap G --threads N --force --form cash|terminal]
///   oracle <file> [--grids lo:hi:points]
/// Reports go to --out, else $NCDP_OUT, else the working directory.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ncdp::cli
