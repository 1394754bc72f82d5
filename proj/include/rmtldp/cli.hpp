#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace rmtldp::cli {

/// Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitNumeric = 1;
inline constexpr int kExitUsage = 2;

/// Parse `args` (without the program name), dispatch one subcommand and write its
/// outputs. Files named by --out are written atomically; "-" means `out`.
int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
        std::ostream& err = std::cerr);

}  // namespace rmtldp::cli
