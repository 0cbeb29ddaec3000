#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace adswave::cli {

enum ExitCode : int { kOk = 0, kVerdictFail = 1, kUsage = 2, kNumerical = 3 };

/// Runs one subcommand; args exclude the program name. Output files go to
/// --out (default "."), together with config.resolved.ini and manifest.json.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace adswave::cli
