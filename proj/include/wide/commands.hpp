#pragma once

#include <string>

#include "wide/config.hpp"

namespace wide {

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitNotConverged = 2 };

/// wide_ns entry point: minimize | incremental | reference | sweep | check.
int run_cli(int argc, char** argv);

/// Writes checkpoint.bin, minimize_report.json, el_report.json and
/// energy_report.csv for one minimized trajectory into `dir`.
void write_minimize_artifacts(const std::string& dir, const Trajectory& traj, const WideParams& params,
                              const MinimizeReport& report, const RunConfig& config);

}  // namespace wide
