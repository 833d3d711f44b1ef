#ifndef MODALREG_CLI_COMMANDS_HPP
#define MODALREG_CLI_COMMANDS_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace modalreg::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kDataError = 3,
  kSamplerFailure = 4,
  kDiagnosticFailure = 5,
};

/// Runs the command line `args` (without the program name) and returns the
/// process exit code. Normal output goes to `out`, messages to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace modalreg::cli

#endif  // MODALREG_CLI_COMMANDS_HPP
