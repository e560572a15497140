#ifndef ROADSEG_TOOLS_CLI_HPP
#define ROADSEG_TOOLS_CLI_HPP

namespace roadseg::cli {

/// Subcommand dispatch. Exit status: 0 success, 1 runtime/format failure,
/// 2 usage error.
int run(int argc, char** argv);

}  // namespace roadseg::cli

#endif  // ROADSEG_TOOLS_CLI_HPP
