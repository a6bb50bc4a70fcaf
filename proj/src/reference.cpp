#include "wide/reference.hpp"

#include <cmath>

namespace wide {

void ExactSolutionSpec::validate() const {
  if (!std::isfinite(amplitude)) throw ConfigError("exact solution amplitude must be finite");
  if (!(nu >= 0.0)) throw ConfigError("exact solution viscosity must be non-negative");
}

VelocityField taylor_green(double t, const GridSpec& grid, double nu, double amplitude) {
  if (grid.dim != 2) throw ConfigError("taylor_green is only available in 2D");
  VelocityField u(grid);
  const double a = amplitude * std::exp(-2.0 * nu * t);
  const double h = grid.domain_length / grid.n;
  const double scale = 2.0 * std::numbers::pi / grid.domain_length;
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j) {
      const double x = scale * i * h, y = scale * j * h;
      u.component(0)[i * grid.n + j] = a * std::sin(x) * std::cos(y);
      u.component(1)[i * grid.n + j] = -a * std::cos(x) * std::sin(y);
    }
  return u;
}

VelocityField exact_solution(const ExactSolutionSpec& spec, const GridSpec& grid, double t) {
  spec.validate();
  switch (spec.kind) {
    case ExactKind::taylor_green_2d:
      return taylor_green(t, grid, spec.nu, spec.amplitude);
  }
  throw ConfigError("unsupported exact solution kind");
}

namespace {

void heat_factor(SpectralField& f, double nu, double t) {
  const auto basis = SpectralBasis::get(f.grid);
  const auto k2 = basis->k2();
  for (int c = 0; c < f.grid.dim; ++c) {
    auto comp = f.component(c);
    for (std::size_t m = 0; m < f.modes; ++m) comp[m] *= std::exp(-nu * k2[m] * t);
  }
}

}  // namespace

VelocityField stokes_solve(const VelocityField& u0, double nu, double t) {
  auto hat = to_spectral(u0);
  heat_factor(hat, nu, t);
  return to_physical(hat);
}

ProjectionRun projection_solve(const VelocityField& u0, double nu, double tau, int steps, bool convection) {
  if (!(tau > 0.0) || steps < 0) throw InputError("projection_solve needs tau > 0 and steps >= 0");
  if (max_divergence(u0) > 1e-8 * std::max(1.0, u0.max_abs()))
    throw InputError("projection_solve needs a divergence-free initial datum");
  const GridSpec& g = u0.grid();
  ProjectionRun run;
  run.trajectory.grid = g;
  run.trajectory.tau = tau;
  run.trajectory.slices.reserve(steps + 1);
  run.trajectory.slices.push_back(u0);

  const auto basis = SpectralBasis::get(g);
  const auto k2 = basis->k2();
  std::vector<double> decay(g.modes());
  for (std::size_t m = 0; m < decay.size(); ++m) decay[m] = std::exp(-nu * k2[m] * tau);

  ConvectionWorkspace ws(g);
  SpectralField hat = to_spectral(u0);
  SpectralField conv(g);
  auto track_cfl = [&](const VelocityField& u) {
    run.cfl = std::max(run.cfl, u.max_abs() * tau * g.n / g.domain_length);
  };
  track_cfl(u0);
  for (int n = 0; n < steps; ++n) {
    if (convection) {
      ws.load(hat);
      ws.convection(conv);
      project_in_place(conv);
      for (std::size_t i = 0; i < hat.data.size(); ++i) hat.data[i] -= tau * conv.data[i];
    }
    for (int c = 0; c < g.dim; ++c) {
      auto comp = hat.component(c);
      for (std::size_t m = 0; m < decay.size(); ++m) comp[m] *= decay[m];
    }
    run.trajectory.slices.push_back(to_physical(hat));
    if (!std::isfinite(run.trajectory.slices.back().max_abs()))
      throw NumericalError("projection_solve produced non-finite values at step " + std::to_string(n + 1));
    track_cfl(run.trajectory.slices.back());
  }
  run.cfl_warning = run.cfl > 0.5;
  return run;
}

}  // namespace wide
