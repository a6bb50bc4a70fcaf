#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wide/optimizer.hpp"

namespace wide {

enum class DatumKind { taylor_green, random_modes, file };

struct DatumSpec {
  DatumKind kind = DatumKind::taylor_green;
  double amplitude = 1.0;
  std::uint64_t seed = 1;
  double k_cut = 4.0;
  double slope = 1.0;
  std::string path;
};

struct DiagnosticsOptions {
  double s = -3.0;
  double buffer = 0.2;
  double tol_energy = 0.05;
  double obs_fraction = 0.8;
  /// Pass thresholds used by `check`.
  double kernel_gap_max = 1e-3;
  double strong_residual_max = 1e-3;
};

struct SweepOptions {
  std::vector<double> eps_list;
  std::optional<double> sigma_alt = 1.0;
  double trend_slack = 0.1;
};

struct RunConfig {
  GridSpec grid;
  WideParams params;
  double tau = 1e-2;
  DatumSpec datum;
  MinimizeOptions optimizer;
  DiagnosticsOptions diagnostics;
  SweepOptions sweep;
  std::string output_dir = "out";
  /// Records measured wall time in reports; off keeps reports byte-reproducible.
  bool wall_time = false;
  /// Non-fatal findings of validate(), e.g. an invalid energy certificate.
  std::vector<std::string> warnings;

  int steps() const;
  /// Throws ConfigError naming the violated rule.
  void validate();
};

/// Reads an INI file ([grid], [params], [datum], [optimizer], [diagnostics],
/// [sweep], [output]) or, for a .json path, the same keys as nested objects.
/// Unknown keys are rejected.
RunConfig load_config(const std::string& path);
RunConfig parse_config_string(const std::string& text, bool json);

/// Projected initial datum described by the config (before the eps cutoff).
VelocityField make_datum(const RunConfig& config);

}  // namespace wide
