#pragma once

#include <ostream>

#include "coneflow/cli/config.hpp"

namespace coneflow::cli {

enum ExitCode : int {
  kOk = 0,
  kToleranceBreach = 1,
  kConfigError = 2,
  kNumericalFailure = 3,
};

// Each command writes its document to `out` and returns an exit code.
// ConfigError and coneflow::Error propagate to the caller.
int cmd_trace(const RunConfig& cfg, std::ostream& out);
int cmd_integrals(const RunConfig& cfg, std::ostream& out);
int cmd_verify(const RunConfig& cfg, std::ostream& out);
int cmd_sweep(const RunConfig& cfg, std::ostream& out);

/// Full command line: cone-flow trace|integrals|verify|sweep --config <path>
/// [--out <path>] [--backend direct|lift|both] [--rtol <x>].
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace coneflow::cli
