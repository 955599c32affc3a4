#pragma once

#include <iosfwd>
#include <stdexcept>

namespace sandwich::cli {

enum ExitCode : int { kSuccess = 0, kNumericFailure = 1, kInputError = 2 };

/// Invalid option values or combinations discovered after parsing.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Entry point shared by the executable and the tests. Results go to `out`,
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace sandwich::cli
