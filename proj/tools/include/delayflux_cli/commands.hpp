#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "delayflux_cli/config.hpp"

namespace delayflux::cli {

enum ExitCode : int { kOk = 0, kNumericalFailure = 1, kUsageError = 2 };

struct Context {
    std::ostream& out;
    std::ostream& err;
    std::string out_dir;  // empty: nothing written to disk
};

/// --out, then the config's output.dir, then $DELAYFLUX_OUT, then ".".
std::string resolve_out_dir(const std::optional<std::string>& flag, const RunConfig* cfg);

int cmd_steady(double alpha, double m, const Context& ctx);
int cmd_hopf(double alpha, double m, const Context& ctx);
int cmd_simulate(const RunConfig& cfg, const Context& ctx);
int cmd_iterate(const RunConfig& cfg, const Context& ctx);
int cmd_sweep(const RunConfig& cfg, const Context& ctx);
int cmd_validate(const Context& ctx);

/// Full command line: parses argv, dispatches and maps failures to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace delayflux::cli
