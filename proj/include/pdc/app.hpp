#ifndef PDC_APP_HPP
#define PDC_APP_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace pdc {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,     // bad arguments or config, nothing written
  kExitNumerical = 3,  // solver / estimator failure, nothing written
};

// Runs the command-line front end on argv-style arguments (without the
// program name). The one-line summary goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pdc

#endif  // PDC_APP_HPP
