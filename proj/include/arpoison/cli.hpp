#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace arpoison::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kValidation = 2,
  kIo = 3,
  kSearchExhausted = 4,
};

/// Runs the command line `args` (without the program name). Normal output
/// goes to `out`; failures print one `arpoison: error kind=... exit=...
/// message="..."` line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace arpoison::cli
