#ifndef NEWSCLUST_TOOLS_COMMANDS_H_
#define NEWSCLUST_TOOLS_COMMANDS_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace newsclust::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

// Runs one command line (args[0] is the program name). Errors are written
// to `err` as a single JSON line: {"error":"validation|runtime",...}.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace newsclust::cli

#endif  // NEWSCLUST_TOOLS_COMMANDS_H_
