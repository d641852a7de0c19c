#ifndef IFL_TOOLS_CLI_HPP_
#define IFL_TOOLS_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace ifl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Runs one subcommand. args excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ifl::cli

#endif  // IFL_TOOLS_CLI_HPP_
