#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spcl::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInputError = 1,
  kValidationFailure = 2,
  kIterationCap = 3,
};

/// Entry point of the `spcl` executable. Diagnostics go to `err`, short
/// progress lines to `out`; artifacts are written below --out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spcl::cli
