#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wide/euler_lagrange.hpp"
#include "wide/optimizer.hpp"

namespace wide {

/// Per-slice energy balance. Time integrals use the trapezoid rule on the
/// slice grid for the centred quadrature and right endpoints for the interval one.
struct EnergyReport {
  std::vector<double> times;
  std::vector<double> energy;       ///< |u_n|^2
  std::vector<double> dissipation;  ///< |grad u_n|^2
  /// |u(t_n)|^2 + 2 nu int_0^{t_n} (1 - e^{-t/eps}) |grad u|^2
  std::vector<double> lhs_unif;
  /// |u(t_n)|^2 + 2 nu int_0^{t_n} |grad u|^2
  std::vector<double> lhs_ei;
  std::vector<double> slack_unif;  ///< rhs - lhs_unif
  std::vector<double> slack_ei;
  double rhs = 0.0;  ///< |u_0|^2
  double tol = 0.05;
  double probe_fraction = 0.8;
  /// Largest lhs_unif / rhs and largest |lhs_ei - rhs| / rhs over probes t_n <= probe_fraction T.
  double max_unif_ratio = 0.0;
  double max_ei_deviation = 0.0;
  bool violation = false;
};

EnergyReport energy_report(const Trajectory& traj, const WideParams& params, double tol = 0.05,
                           double probe_fraction = 0.8);

struct AprioriBounds {
  double eps_dt2 = 0.0;    ///< eps sum_n tau |(u_n - u_{n-1})/tau|^2
  double eps_conv2 = 0.0;  ///< eps sum_n tau |u_n.grad u_n|^2
  double dt_dual = 0.0;    ///< (sum_n tau |P (u_n - u_{n-1})/tau|_{H^s}^2)^{1/2}
  double conv_dual = 0.0;  ///< (sum_n tau |P(u_n.grad u_n)|_{H^s}^2)^{1/2}
  /// Above four divided by |u_0|^2 (squared quantities) or |u_0| (dual norms).
  double eps_dt2_ratio = 0.0;
  double eps_conv2_ratio = 0.0;
  double dt_dual_ratio = 0.0;
  double conv_dual_ratio = 0.0;
  /// max_n |P(u_n.grad u_n)|_{H^s} / (|u_n| |grad u_n|).
  double conv_shape = 0.0;
  double s = -3.0;
};

AprioriBounds apriori_bounds(const Trajectory& traj, const WideParams& params, SobolevIndex s = {-3.0});

struct SigmaCertificate {
  double c = 0.0;  ///< min{1, 2 sigma - 1/4, nu}(1 - e^{-1})
  bool valid = false;
};

SigmaCertificate sigma_certificate(const WideParams& params);

/// Distances between two trajectories on the same slice grid over t_n <= T_obs.
struct TrajectoryDistance {
  double l2h1 = 0.0;  ///< (sum tau |a_n - b_n|_{H^1}^2)^{1/2} / (sum tau |b_n|_{H^1}^2)^{1/2}
  double cl2 = 0.0;   ///< max |a_n - b_n| / max |b_n|
};

TrajectoryDistance trajectory_distance(const Trajectory& a, const Trajectory& b, double obs_fraction = 0.8);

struct SweepConfig {
  VelocityField datum;
  double tau = 1e-2;
  /// epsilon is overwritten per member.
  WideParams base;
  std::vector<double> eps_list;
  MinimizeOptions optimizer;
  double obs_fraction = 0.8;
  double trend_slack = 0.1;
  double tol_energy = 0.05;
  /// Second sigma run at the smallest and largest eps; disabled when empty.
  std::optional<double> sigma_alt = 1.0;
  SobolevIndex s{-3.0};
  ResidualWindow window;
  int workers = 1;
  bool keep_trajectories = false;
  std::function<void(const std::string&)> log;

  void validate() const;
};

struct SweepEntry {
  double epsilon = 0.0;
  double sigma = 0.0;
  TrajectoryDistance distance;
  FunctionalBreakdown breakdown;
  AprioriBounds apriori;
  double strong_res = 0.0;
  double kernel_gap = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool energy_violation = false;
  double energy_max_ratio = 0.0;
  double seconds = 0.0;
  MinimizeReport report;
  std::optional<Trajectory> trajectory;
};

struct SweepReport {
  std::vector<SweepEntry> entries;  ///< decreasing eps, base sigma
  Trajectory reference;
  bool partial = false;
  std::vector<double> failed_eps;
  bool trend_ok = true;
  /// dist(eps_{k+1}) / dist(eps_k) in L2(H1).
  std::vector<double> ratios;
  /// sigma_alt runs at the smallest and largest eps.
  std::vector<SweepEntry> sigma_entries;
  double sigma_gap_small = 0.0;  ///< |u(sigma) - u(sigma_alt)| at smallest eps
  double sigma_gap_large = 0.0;  ///< same at largest eps
  double eps_span = 0.0;         ///< |u(eps_max) - u(eps_min)| at base sigma
};

/// Runs minimize_global for every eps against the projection-method reference.
SweepReport epsilon_sweep(const SweepConfig& config);

}  // namespace wide
