#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace memsim {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    exit_ok = 0,
    exit_parse = 1,  // bad netlist, bad arguments, missing column
    exit_sim = 2,    // singular matrix or inner iteration failure
    exit_io = 3,
};

/// Runs the command line (args excludes the program name). All output goes to
/// `out` and `err`; nothing touches the process streams.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace memsim
