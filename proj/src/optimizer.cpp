#include "wide/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>

namespace wide {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

LbfgsOptions lbfgs_options(const MinimizeOptions& opts) {
  LbfgsOptions o;
  o.max_iters = opts.max_iters;
  o.grad_tol = opts.grad_tol;
  o.memory = opts.memory;
  o.c1 = opts.c1;
  o.c2 = opts.c2;
  return o;
}

/// Leray projection of every slice-sized block of a flat vector.
void project_blocks(const GridSpec& grid, std::span<double> v) {
  const std::size_t block = grid.dim * grid.points();
  VelocityField tmp(grid);
  for (std::size_t off = 0; off < v.size(); off += block) {
    auto dst = tmp.data();
    std::copy(v.begin() + off, v.begin() + off + block, dst.begin());
    auto hat = to_spectral(tmp);
    project_in_place(hat);
    const auto back = to_physical(hat);
    std::copy(back.data().begin(), back.data().end(), v.begin() + off);
  }
}

/// Inverse of the time-derivative plus viscous part of the Hessian, which is
/// tridiagonal in time for each Fourier mode.
class StokesPreconditioner {
 public:
  StokesPreconditioner(const WideFunctional& f) : grid_(f.grid()), steps_(f.steps()) {
    auto basis = SpectralBasis::get(grid_);
    const auto k2 = basis->k2();
    const auto& tw = f.weights();
    const double tau = f.tau();
    const double h = grid_.cell_volume();
    const double visc = f.params().nu / f.params().epsilon;
    modes_ = grid_.modes();
    const std::size_t N = steps_;
    inv_diag_.assign(modes_ * N, 0.0);
    upper_.assign(N, 0.0);
    for (std::size_t n = 1; n < N; ++n) upper_[n - 1] = -h * tw.w[n + 1] / tau;
    // Thomas factorization: modified diagonal per (mode, slice).
    for (std::size_t m = 0; m < modes_; ++m) {
      double prev_c = 0.0;
      for (std::size_t n = 1; n <= N; ++n) {
        const double wn1 = n < N ? tw.w[n + 1] : 0.0;
        const double diag = h * ((tw.w[n] + wn1) / tau + tau * tw.d[n] * visc * k2[m]);
        const double lower = n > 1 ? upper_[n - 2] : 0.0;
        const double denom = diag - lower * prev_c;
        inv_diag_[m * N + (n - 1)] = 1.0 / denom;
        prev_c = n < N ? upper_[n - 1] / denom : 0.0;
      }
    }
  }

  void apply(std::span<const double> in, std::span<double> out) const {
    const std::size_t block = grid_.dim * grid_.points();
    const std::size_t N = steps_;
    std::vector<SpectralField> hat(N);
    VelocityField tmp(grid_);
    for (std::size_t n = 0; n < N; ++n) {
      auto dst = tmp.data();
      std::copy(in.begin() + n * block, in.begin() + (n + 1) * block, dst.begin());
      hat[n] = to_spectral(tmp);
    }
    for (int i = 0; i < grid_.dim; ++i) {
      for (std::size_t m = 0; m < modes_; ++m) {
        const double* inv = &inv_diag_[m * N];
        // Forward sweep.
        Complex carry = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
          Complex& z = hat[n].data[i * modes_ + m];
          const double lower = n > 0 ? upper_[n - 1] : 0.0;
          z = (z - lower * carry) * inv[n];
          carry = z;
        }
        // Back substitution with c_n = upper_n * inv_n.
        for (std::size_t n = N - 1; n-- > 0;) {
          Complex& z = hat[n].data[i * modes_ + m];
          z -= upper_[n] * inv[n] * hat[n + 1].data[i * modes_ + m];
        }
      }
    }
    for (std::size_t n = 0; n < N; ++n) {
      const auto phys = to_physical(hat[n]);
      std::copy(phys.data().begin(), phys.data().end(), out.begin() + n * block);
    }
  }

 private:
  GridSpec grid_;
  int steps_;
  std::size_t modes_;
  std::vector<double> inv_diag_;
  std::vector<double> upper_;
};

}  // namespace

const char* to_string(Preconditioner p) { return p == Preconditioner::weight ? "weight" : "stokes"; }

Preconditioner parse_preconditioner(const std::string& name) {
  if (name == "weight") return Preconditioner::weight;
  if (name == "stokes") return Preconditioner::stokes;
  throw ConfigError("optimizer.preconditioner must be 'weight' or 'stokes', got '" + name + "'");
}

void MinimizeOptions::validate() const {
  if (max_iters < 0) throw ConfigError("optimizer.max_iters must be nonnegative");
  if (!(grad_tol > 0.0)) throw ConfigError("optimizer.grad_tol must be positive");
  if (memory < 1) throw ConfigError("optimizer.memory must be at least 1");
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) throw ConfigError("optimizer line search needs 0 < c1 < c2 < 1");
}

void check_epsilon_floor(const WideParams& params) {
  const double floor = params.horizon / 25.0;
  if (params.epsilon < floor * (1.0 - 1e-12)) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "epsilon = %.6g is below the floor T/25 = %.6g (rule: epsilon >= T/25)",
                  params.epsilon, floor);
    throw ConfigError(buf);
  }
}

double stationarity_norm(const WideFunctional& functional, const std::vector<SpectralField>& gradient) {
  auto basis = SpectralBasis::get(functional.grid());
  const auto& w = functional.weights().w;
  std::vector<double> terms;
  for (int n = 1; n <= functional.steps(); ++n) {
    double e = 0.0;
    for (int i = 0; i < functional.grid().dim; ++i) e += basis->weighted_energy(gradient[n].component(i), 0.0);
    terms.push_back(functional.tau() * e / (w[n] * w[n]));
  }
  return std::sqrt(pairwise_sum(terms));
}

std::pair<Trajectory, MinimizeReport> minimize_global(const Trajectory& init, const WideParams& params,
                                                      const MinimizeOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  params.validate();
  opts.validate();
  init.check_structure();
  check_epsilon_floor(params);
  if (std::abs(init.horizon() - params.horizon) > 1e-9 * params.horizon)
    throw ConfigError("trajectory horizon N*tau does not match params.T");
  const VelocityField& u0 = init.slices[0];
  if (l2_norm(leray_project(u0) - u0) > 1e-10 * std::max(1.0, l2_norm(u0)))
    throw InputError("initial slice is not divergence-free");

  WideFunctional functional(init.grid, init.tau, init.steps(), params);
  const GridSpec grid = init.grid;
  const int N = init.steps();
  const double tau = init.tau;
  const double h = grid.cell_volume();
  const std::size_t block = grid.dim * grid.points();
  const auto& w = functional.weights().w;

  Trajectory traj = init;
  for (int n = 1; n <= N; ++n) traj.slices[n] = leray_project(traj.slices[n]);
  std::vector<double> x = functional.flatten(traj);

  LbfgsProblem problem;
  problem.value_and_gradient = [&](std::span<const double> xx, std::span<double> g) {
    return functional.value_and_gradient(u0, xx, g);
  };
  problem.project = [&](std::span<double> v) { project_blocks(grid, v); };
  problem.stationarity = [&](std::span<const double>, std::span<const double> g) {
    std::vector<double> terms(N);
    for (int n = 1; n <= N; ++n) {
      double s = 0.0;
      for (std::size_t i = 0; i < block; ++i) {
        const double v = g[(n - 1) * block + i];
        s += v * v;
      }
      // G_n = g_n / (tau h), |G_n / w_n|^2 = h sum (g_n / (tau h w_n))^2.
      terms[n - 1] = tau * h * s / (tau * h * w[n] * tau * h * w[n]);
    }
    return std::sqrt(pairwise_sum(terms));
  };
  std::unique_ptr<StokesPreconditioner> stokes;
  if (opts.precondition) {
    if (opts.preconditioner == Preconditioner::stokes) {
      stokes = std::make_unique<StokesPreconditioner>(functional);
      problem.precondition = [&](std::span<const double> in, std::span<double> out) { stokes->apply(in, out); };
    } else {
      problem.precondition = [&](std::span<const double> in, std::span<double> out) {
        for (int n = 1; n <= N; ++n) {
          const double r = tau / (h * w[n]);
          for (std::size_t i = 0; i < block; ++i) out[(n - 1) * block + i] = r * in[(n - 1) * block + i];
        }
      };
    }
  }
  if (opts.verbose) {
    problem.progress = [](int it, double f, double m) {
      if (it % 50 == 0) std::fprintf(stderr, "  iter %5d  I = %.12e  |G/w| = %.3e\n", it, f, m);
    };
  }

  MinimizeReport report;
  if (N == 0) {
    report.breakdown = functional.evaluate(traj);
    report.initial_total = report.breakdown.total;
    report.converged = true;
    report.status = "converged";
    report.seconds = seconds_since(start);
    return {traj, report};
  }
  const auto res = lbfgs_minimize(problem, std::move(x), lbfgs_options(opts));
  functional.unflatten(res.x, traj);
  report.iterations = res.iterations;
  report.evaluations = res.evaluations;
  report.breakdown = functional.evaluate(traj);
  report.initial_total = res.initial_f;
  report.grad_norm = res.measure;
  report.converged = res.converged;
  report.status = res.status;
  report.seconds = seconds_since(start);
  return {traj, report};
}

double incremental_objective(const VelocityField& w, const VelocityField& u_prev, const WideParams& params,
                             double tau) {
  require_same_grid(w, u_prev);
  const auto& grid = w.grid();
  auto basis = SpectralBasis::get(grid);
  const auto wh = to_spectral(w);
  const auto uh = to_spectral(u_prev);
  SpectralField conv(grid);
  if (params.convection) {
    ConvectionWorkspace ws(grid);
    ws.load(wh);
    ws.convection(conv);
  }
  SpectralField m(grid);
  for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = (wh.data[i] - uh.data[i]) / tau + conv.data[i];
  double m2 = 0.0, c2 = 0.0;
  for (int i = 0; i < grid.dim; ++i) {
    m2 += basis->weighted_energy(m.component(i), 0.0);
    c2 += basis->weighted_energy(conv.component(i), 0.0);
  }
  return tau * (0.5 * m2 + 0.5 * params.sigma * c2) + 0.5 * params.nu * (gradient_energy(wh) - gradient_energy(uh));
}

VelocityField step_incremental(const VelocityField& u_prev, const WideParams& params, double tau,
                               const MinimizeOptions& opts, MinimizeReport* report) {
  const auto start = std::chrono::steady_clock::now();
  params.validate();
  opts.validate();
  if (!(tau > 0.0)) throw ConfigError("time step must be positive");
  const GridSpec grid = u_prev.grid();
  auto basis = SpectralBasis::get(grid);
  const auto k2 = basis->k2();
  const double h = grid.cell_volume();
  const std::size_t modes = grid.modes();
  const SpectralField uh = to_spectral(u_prev);
  ConvectionWorkspace ws(grid);

  auto value_and_gradient = [&](std::span<const double> x, std::span<double> g) {
    VelocityField w(grid);
    std::copy(x.begin(), x.end(), w.data().begin());
    const auto wh = to_spectral(w);
    SpectralField conv(grid);
    if (params.convection) {
      ws.load(wh);
      ws.convection(conv);
    }
    SpectralField m(grid), big(grid), grad(grid);
    for (std::size_t i = 0; i < m.data.size(); ++i) {
      m.data[i] = (wh.data[i] - uh.data[i]) / tau + conv.data[i];
      big.data[i] = m.data[i] + params.sigma * conv.data[i];
    }
    double m2 = 0.0, c2 = 0.0;
    for (int i = 0; i < grid.dim; ++i) {
      m2 += basis->weighted_energy(m.component(i), 0.0);
      c2 += basis->weighted_energy(conv.component(i), 0.0);
    }
    const double value =
        tau * (0.5 * m2 + 0.5 * params.sigma * c2) + 0.5 * params.nu * (gradient_energy(wh) - gradient_energy(uh));
    if (!std::isfinite(value)) throw NumericalError("non-finite one-slab objective");
    if (params.convection) ws.adjoint(big, grad);
    for (std::size_t i = 0; i < grad.data.size(); ++i) grad.data[i] *= tau;
    for (int i = 0; i < grid.dim; ++i) {
      auto gc = grad.component(i);
      const auto mc = m.component(i);
      const auto wc = wh.component(i);
      for (std::size_t k = 0; k < modes; ++k) gc[k] += mc[k] + params.nu * k2[k] * wc[k];
    }
    project_in_place(grad);
    const auto phys = to_physical(grad);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = h * phys.data()[i];
    return value;
  };

  LbfgsProblem problem;
  problem.value_and_gradient = value_and_gradient;
  problem.project = [&](std::span<double> v) { project_blocks(grid, v); };
  problem.stationarity = [&](std::span<const double>, std::span<const double> g) {
    double s = 0.0;
    for (double v : g) s += v * v;
    return std::sqrt(s / h);
  };
  if (opts.precondition) {
    problem.precondition = [&](std::span<const double> in, std::span<double> out) {
      VelocityField tmp(grid);
      std::copy(in.begin(), in.end(), tmp.data().begin());
      auto hat = to_spectral(tmp);
      for (int i = 0; i < grid.dim; ++i) {
        auto c = hat.component(i);
        for (std::size_t k = 0; k < modes; ++k) c[k] /= h * (1.0 / tau + params.nu * k2[k]);
      }
      const auto back = to_physical(hat);
      std::copy(back.data().begin(), back.data().end(), out.begin());
    };
  }
  const VelocityField start_field = leray_project(u_prev);
  std::vector<double> x(start_field.data().begin(), start_field.data().end());
  const auto res = lbfgs_minimize(problem, std::move(x), lbfgs_options(opts));
  VelocityField w(grid);
  std::copy(res.x.begin(), res.x.end(), w.data().begin());
  if (report) {
    report->iterations = res.iterations;
    report->evaluations = res.evaluations;
    report->initial_total = res.initial_f;
    report->breakdown = FunctionalBreakdown{};
    report->breakdown.total = res.f;
    report->grad_norm = res.measure;
    report->converged = res.converged;
    report->status = res.status;
    report->seconds = seconds_since(start);
  }
  return w;
}

Trajectory run_incremental(const VelocityField& u0, const WideParams& params, double tau, int steps,
                           const MinimizeOptions& opts, bool* all_converged) {
  if (steps < 0) throw ConfigError("number of steps must be nonnegative");
  Trajectory traj;
  traj.grid = u0.grid();
  traj.tau = tau;
  traj.slices.reserve(steps + 1);
  traj.slices.push_back(u0);
  bool ok = true;
  for (int n = 0; n < steps; ++n) {
    MinimizeReport rep;
    traj.slices.push_back(step_incremental(traj.slices.back(), params, tau, opts, &rep));
    ok = ok && rep.converged;
  }
  if (all_converged) *all_converged = ok;
  return traj;
}

}  // namespace wide
