#pragma once

#include <string>
#include <vector>

namespace rqs {

/// Outcome of one command-line invocation. Exit codes: 0 the command
/// computed a report (verdicts such as "arbitrage" live inside it), 2 the
/// inputs or flags were rejected, 3 an engine invariant broke.
struct RunResult {
    int exit_code = 0;
    std::string out;  // report or error document
    std::string err;  // one-line human summary on failure
};

/// Parses flags, loads the model, dispatches the command, emits the
/// report. `args` excludes the program name.
RunResult run_cli(const std::vector<std::string>& args);

const char* engine_version();

} // namespace rqs
