#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dqfd::cli {

// Entry point of the `dqfd` tool. Subcommands: demo-collect, train, eval,
// chat, trends. Returns the process exit code: 0 success, 1 usage error,
// 2 runtime failure.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err);

// Same, with the arguments after the program name.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace dqfd::cli
