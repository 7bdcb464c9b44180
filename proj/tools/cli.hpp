#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace affine_elastica::cli {

enum ExitCode { kPass = 0, kVerifyFailed = 1, kInputError = 2, kSynthesisFailed = 3 };

/// Runs one command line (without the program name) and returns the exit
/// code. Reports go to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace affine_elastica::cli
