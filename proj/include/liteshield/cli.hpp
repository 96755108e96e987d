#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace liteshield {

// Exit codes of the command-line front end.
enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_data = 2, exit_internal = 3 };

// args excludes the program name. Human diagnostics go to err; `inspect`
// prints model metadata to out. Everything else is written to files.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace liteshield
