#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "shuttle/config.hpp"
#include "shuttle/errors.hpp"

namespace shuttle {

struct CommandOutput {
    nlohmann::json document;
    std::string text;   // human-readable table
    int exit_code = 0;  // 0 ok, 5 when a verification check failed
};

// 2 config, 3 degenerate, 4 numerical, 2 domain, 1 contract.
int exit_code_for(ErrorCategory category);

CommandOutput cmd_solve(const ProblemConfig& config);

// Simulates the reference process, or the control given in the config.
CommandOutput cmd_simulate(const ProblemConfig& config, std::ostream* csv = nullptr,
                           std::ostream* warnings = nullptr);

CommandOutput cmd_verify(const ProblemConfig& config, std::ostream* warnings = nullptr);

}  // namespace shuttle
