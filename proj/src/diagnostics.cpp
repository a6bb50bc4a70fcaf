#include "wide/diagnostics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include "wide/reference.hpp"

namespace wide {

EnergyReport energy_report(const Trajectory& traj, const WideParams& params, double tol, double probe_fraction) {
  traj.check_structure();
  params.validate();
  EnergyReport r;
  r.tol = tol;
  r.probe_fraction = probe_fraction;
  const int N = traj.steps();
  if (N < 0) return r;
  const bool trapezoid = params.quadrature == QuadratureRule::centred;
  for (int n = 0; n <= N; ++n) {
    r.times.push_back(traj.time(n));
    r.energy.push_back(std::pow(l2_norm(traj.slices[n]), 2));
    r.dissipation.push_back(gradient_energy(traj.slices[n]));
  }
  r.rhs = r.energy[0];
  auto unif_weight = [&](int n) { return -std::expm1(-traj.time(n) / params.epsilon); };
  double int_unif = 0.0, int_ei = 0.0;
  const double t_probe = probe_fraction * traj.horizon() * (1 + 1e-12);
  for (int n = 0; n <= N; ++n) {
    if (n > 0) {
      const double a = r.dissipation[n], b = r.dissipation[n - 1];
      if (trapezoid) {
        int_ei += 0.5 * traj.tau * (a + b);
        int_unif += 0.5 * traj.tau * (unif_weight(n) * a + unif_weight(n - 1) * b);
      } else {
        int_ei += traj.tau * a;
        int_unif += traj.tau * unif_weight(n) * a;
      }
    }
    r.lhs_ei.push_back(r.energy[n] + 2 * params.nu * int_ei);
    r.lhs_unif.push_back(r.energy[n] + 2 * params.nu * int_unif);
    r.slack_ei.push_back(r.rhs - r.lhs_ei.back());
    r.slack_unif.push_back(r.rhs - r.lhs_unif.back());
    if (r.times[n] <= t_probe && r.rhs > 0.0) {
      r.max_unif_ratio = std::max(r.max_unif_ratio, r.lhs_unif.back() / r.rhs);
      r.max_ei_deviation = std::max(r.max_ei_deviation, std::abs(r.lhs_ei.back() - r.rhs) / r.rhs);
      if (r.lhs_unif.back() > r.rhs * (1 + tol)) r.violation = true;
    }
  }
  return r;
}

AprioriBounds apriori_bounds(const Trajectory& traj, const WideParams& params, SobolevIndex s) {
  traj.check_structure();
  params.validate();
  AprioriBounds b;
  b.s = s.s;
  const int N = traj.steps();
  double dt2 = 0.0, conv2 = 0.0, dt_dual2 = 0.0, conv_dual2 = 0.0;
  for (int n = 1; n <= N; ++n) {
    const VelocityField d = (1.0 / traj.tau) * (traj.slices[n] - traj.slices[n - 1]);
    const VelocityField c = params.convection ? advect(traj.slices[n]) : VelocityField(traj.grid);
    const double pc = sobolev_norm(leray_project(c), s);
    dt2 += traj.tau * std::pow(l2_norm(d), 2);
    conv2 += traj.tau * std::pow(l2_norm(c), 2);
    dt_dual2 += traj.tau * std::pow(sobolev_norm(leray_project(d), s), 2);
    conv_dual2 += traj.tau * pc * pc;
    const double denom = l2_norm(traj.slices[n]) * std::sqrt(gradient_energy(traj.slices[n]));
    if (denom > 0.0) b.conv_shape = std::max(b.conv_shape, pc / denom);
  }
  b.eps_dt2 = params.epsilon * dt2;
  b.eps_conv2 = params.epsilon * conv2;
  b.dt_dual = std::sqrt(dt_dual2);
  b.conv_dual = std::sqrt(conv_dual2);
  const double e0 = N >= 0 ? std::pow(l2_norm(traj.slices[0]), 2) : 0.0;
  if (e0 > 0.0) {
    b.eps_dt2_ratio = b.eps_dt2 / e0;
    b.eps_conv2_ratio = b.eps_conv2 / e0;
    b.dt_dual_ratio = b.dt_dual / std::sqrt(e0);
    b.conv_dual_ratio = b.conv_dual / std::sqrt(e0);
  }
  return b;
}

SigmaCertificate sigma_certificate(const WideParams& params) {
  SigmaCertificate c;
  c.valid = params.sigma > 0.125 && params.nu > 0.0;
  c.c = std::min({1.0, 2 * params.sigma - 0.25, params.nu}) * (-std::expm1(-1.0));
  return c;
}

TrajectoryDistance trajectory_distance(const Trajectory& a, const Trajectory& b, double obs_fraction) {
  a.check_structure();
  b.check_structure();
  if (a.steps() != b.steps() || !(a.grid == b.grid) || std::abs(a.tau - b.tau) > 1e-14 * b.tau)
    throw StructuralError("trajectory_distance needs trajectories on the same slice grid");
  const double t_obs = obs_fraction * b.horizon() * (1 + 1e-12);
  double num = 0.0, den = 0.0, cmax = 0.0, bmax = 0.0;
  for (int n = 0; n <= b.steps() && b.time(n) <= t_obs; ++n) {
    const VelocityField diff = a.slices[n] - b.slices[n];
    if (n > 0) {
      num += b.tau * std::pow(sobolev_norm(diff, {1.0}), 2);
      den += b.tau * std::pow(sobolev_norm(b.slices[n], {1.0}), 2);
    }
    cmax = std::max(cmax, l2_norm(diff));
    bmax = std::max(bmax, l2_norm(b.slices[n]));
  }
  TrajectoryDistance d;
  d.l2h1 = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  d.cl2 = bmax > 0.0 ? cmax / bmax : cmax;
  return d;
}

namespace {

int step_count(double horizon, double tau) {
  const double r = horizon / tau;
  const long n = std::lround(r);
  if (n < 1 || std::abs(r - n) > 1e-9 * r) throw ConfigError("tau must divide T");
  return static_cast<int>(n);
}

SweepEntry run_member(const SweepConfig& cfg, const Trajectory& reference, double eps, double sigma) {
  const auto start = std::chrono::steady_clock::now();
  WideParams params = cfg.base;
  params.epsilon = eps;
  params.sigma = sigma;
  const int N = reference.steps();
  const VelocityField u0 = prepare_initial_datum(cfg.datum, params);
  auto [traj, rep] = minimize_global(Trajectory::constant(u0, cfg.tau, N), params, cfg.optimizer);
  SweepEntry e;
  e.epsilon = eps;
  e.sigma = sigma;
  e.distance = trajectory_distance(traj, reference, cfg.obs_fraction);
  e.breakdown = rep.breakdown;
  e.apriori = apriori_bounds(traj, params, cfg.s);
  e.strong_res = strong_el_residual(traj, params, cfg.s, cfg.window);
  e.kernel_gap = kernel_convolution_check(traj, params, cfg.s).gap;
  e.grad_norm = rep.grad_norm;
  e.iterations = rep.iterations;
  e.converged = rep.converged;
  const auto energy = energy_report(traj, params, cfg.tol_energy, cfg.obs_fraction);
  e.energy_violation = energy.violation;
  e.energy_max_ratio = energy.max_unif_ratio;
  e.report = rep;
  e.trajectory = std::move(traj);
  e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return e;
}

}  // namespace

void SweepConfig::validate() const {
  datum.grid().validate();
  base.validate();
  if (eps_list.empty()) throw ConfigError("sweep.eps_list must not be empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw ConfigError("sweep.eps_list must be strictly decreasing");
    WideParams p = base;
    p.epsilon = eps_list[i];
    p.validate();
    check_epsilon_floor(p);
  }
  if (!(tau > 0.0)) throw ConfigError("time step must be positive");
  step_count(base.horizon, tau);
  if (!(obs_fraction > 0.0 && obs_fraction <= 1.0)) throw ConfigError("observation fraction must lie in (0, 1]");
  if (!(trend_slack >= 0.0)) throw ConfigError("sweep trend slack must be nonnegative");
  if (sigma_alt && !(*sigma_alt >= 0.0)) throw ConfigError("sweep.sigma_alt must be nonnegative");
  if (workers < 1) throw ConfigError("--workers must be at least 1");
  optimizer.validate();
}

SweepReport epsilon_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const int N = step_count(cfg.base.horizon, cfg.tau);
  SweepReport report;
  const VelocityField datum = leray_project(cfg.datum);
  report.reference = projection_solve(datum, cfg.base.nu, cfg.tau, N, cfg.base.convection).trajectory;

  struct Job {
    double eps;
    double sigma;
  };
  std::vector<Job> jobs;
  for (double e : cfg.eps_list) jobs.push_back({e, cfg.base.sigma});
  if (cfg.sigma_alt) {
    jobs.push_back({cfg.eps_list.back(), *cfg.sigma_alt});
    if (cfg.eps_list.size() > 1) jobs.push_back({cfg.eps_list.front(), *cfg.sigma_alt});
  }

  std::vector<SweepEntry> results(jobs.size());
  std::mutex log_mutex;
  auto run = [&](std::size_t i) {
    results[i] = run_member(cfg, report.reference, jobs[i].eps, jobs[i].sigma);
    if (cfg.log) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "eps=%g sigma=%g iters=%d converged=%d dist=%.4g (%.1fs)", jobs[i].eps,
                    jobs[i].sigma, results[i].iterations, int(results[i].converged), results[i].distance.l2h1,
                    results[i].seconds);
      std::lock_guard lock(log_mutex);
      cfg.log(buf);
    }
  };
  const std::size_t workers = std::min<std::size_t>(cfg.workers, jobs.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run(i);
  } else {
    std::mutex next_mutex;
    std::size_t next = 0;
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (;;) {
            std::size_t i;
            {
              std::lock_guard lock(next_mutex);
              if (next == jobs.size()) return;
              i = next++;
            }
            run(i);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  const std::size_t m = cfg.eps_list.size();
  report.entries.assign(results.begin(), results.begin() + m);
  report.sigma_entries.assign(results.begin() + m, results.end());
  for (const auto& e : results)
    if (!e.converged) {
      report.partial = true;
      report.failed_eps.push_back(e.epsilon);
    }
  for (std::size_t k = 1; k < m; ++k) {
    const auto& a = report.entries[k - 1].distance;
    const auto& b = report.entries[k].distance;
    report.ratios.push_back(a.l2h1 > 0.0 ? b.l2h1 / a.l2h1 : 0.0);
    if (b.l2h1 > (1 + cfg.trend_slack) * a.l2h1 || b.cl2 > (1 + cfg.trend_slack) * a.cl2) report.trend_ok = false;
  }
  const auto& small = *report.entries.back().trajectory;
  const auto& large = *report.entries.front().trajectory;
  report.eps_span = trajectory_distance(large, small, cfg.obs_fraction).l2h1;
  if (cfg.sigma_alt) {
    report.sigma_gap_small = trajectory_distance(*report.sigma_entries[0].trajectory, small, cfg.obs_fraction).l2h1;
    report.sigma_gap_large =
        m > 1 ? trajectory_distance(*report.sigma_entries[1].trajectory, large, cfg.obs_fraction).l2h1
              : report.sigma_gap_small;
  }
  if (!cfg.keep_trajectories) {
    for (auto& e : report.entries) e.trajectory.reset();
    for (auto& e : report.sigma_entries) e.trajectory.reset();
  }
  return report;
}

}  // namespace wide
