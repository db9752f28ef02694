#pragma once

#include "cli_support.hpp"

#include <string>
#include <vector>

namespace sqavg::cli {

struct Command {
    const char* name;
    const char* help;
    void (*run)(const json& scenario, const RunFlags& flags, Report& report);
};

const std::vector<Command>& commands();

// Parses argv, runs one subcommand, maps errors to exit codes:
// 0 pass, 1 assertion failure, 2 configuration error, 3 scale cap.
int run_cli(int argc, char** argv);

}  // namespace sqavg::cli
