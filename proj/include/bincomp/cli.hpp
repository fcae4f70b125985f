#pragma once

// The bincomp command line, callable in-process.
//
//   gen          fixture generation (components, weights, mixed matrix)
//   check-schur  Schur independence verdict for a component file
//   scd          sign component decomposition of a correlation matrix
//   bcd          binary component decomposition of a PSD matrix
//   mimo         simulated activity detection
//
// Exit codes are stable: see ExitCode.

#include <iosfwd>
#include <string>
#include <vector>

namespace bincomp::cli {

enum ExitCode : int {
  kSuccess = 0,
  kNegativeVerdict = 1,
  kUsageError = 2,
  kDecompositionFailed = 3,
  kDetectionMismatch = 4,
};

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bincomp::cli
