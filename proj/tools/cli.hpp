#pragma once
// Command-line front end. run() never calls exit(); it returns the process
// status so tests can drive it in-process.
//
// Exit status: 0 ok, 1 verify found a failing check, 2 configuration error,
// 3 numerical failure, 4 I/O error.

#include <iosfwd>
#include <string>
#include <vector>

namespace qsmc::cli {

enum ExitCode { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kNumericalError = 3, kIoError = 4 };

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qsmc::cli
