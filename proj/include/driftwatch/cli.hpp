#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace driftwatch {

/// Process exit codes of the command-line front end.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitUsage = 2,
    kExitAlarm = 3,
};

/// Runs the driftwatch command line; `args` excludes the program name.
/// Reports go to `out`, diagnostics and the seed banner to `err`.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

/// Flat `key = value` configuration; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::string& path);

}  // namespace driftwatch
