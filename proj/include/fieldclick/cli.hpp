#ifndef FIELDCLICK_CLI_HPP
#define FIELDCLICK_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace fieldclick {

/// Version string embedded in every output manifest.
const char* version();

/**
 * Entry point of the `fieldclick` tool. `args` excludes the program name.
 * Subcommands: run, scan-epsilon, scan-coincidence, ergodicity, basis,
 * presets. Returns the process exit status.
 */
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fieldclick

#endif  // FIELDCLICK_CLI_HPP
