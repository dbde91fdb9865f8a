#ifndef CANTM_TOOLS_CLI_HPP_
#define CANTM_TOOLS_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace cantm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Runs one command line (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cantm::cli

#endif  // CANTM_TOOLS_CLI_HPP_
