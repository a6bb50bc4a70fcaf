#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wide/diagnostics.hpp"

namespace wide {

/// %.17g, the shortest width that round-trips every double.
std::string format_double(double x);

/// Ordered JSON object with doubles printed by format_double (null when non-finite).
class JsonObject {
 public:
  JsonObject& number(const std::string& key, double v);
  JsonObject& integer(const std::string& key, long long v);
  JsonObject& boolean(const std::string& key, bool v);
  JsonObject& text(const std::string& key, const std::string& v);
  JsonObject& numbers(const std::string& key, std::span<const double> v);
  JsonObject& object(const std::string& key, const JsonObject& v);
  JsonObject& objects(const std::string& key, const std::vector<JsonObject>& v);

  std::string dump(int indent = 0) const;

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
  std::vector<std::pair<std::string, JsonObject>> children_;
  std::vector<std::pair<std::string, std::vector<JsonObject>>> lists_;
  std::vector<std::pair<int, std::size_t>> order_;  ///< (kind, index)
};

JsonObject params_json(const WideParams& params, double tau, int steps);
JsonObject minimize_json(const MinimizeReport& report, bool wall_time);
JsonObject el_json(const ELReport& report);
JsonObject apriori_json(const AprioriBounds& bounds);
JsonObject energy_summary_json(const EnergyReport& report);
JsonObject certificate_json(const SigmaCertificate& c);

std::string energy_csv(const EnergyReport& report);
/// Columns eps, dist_L2H1, dist_CL2, total, inertia, stab, diss, eps_dt2, eps_conv2, strong_res.
std::string sweep_csv(const SweepReport& report);
JsonObject sweep_json(const SweepReport& report, bool wall_time);

/// Writes `text` to `path`, throwing ConfigError on failure.
void write_text(const std::string& path, const std::string& text);

}  // namespace wide
