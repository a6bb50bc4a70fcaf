#pragma once

#include "wide/functional.hpp"

namespace wide {

enum class ExactKind { taylor_green_2d };

struct ExactSolutionSpec {
  ExactKind kind = ExactKind::taylor_green_2d;
  double amplitude = 1.0;
  double nu = 0.1;

  void validate() const;
};

/// e^{-2 nu t} a (sin x cos y, -cos x sin y).
VelocityField taylor_green(double t, const GridSpec& grid, double nu, double amplitude = 1.0);
VelocityField exact_solution(const ExactSolutionSpec& spec, const GridSpec& grid, double t);

/// Exact heat semigroup, mode-wise e^{-nu |k|^2 t}.
VelocityField stokes_solve(const VelocityField& u0, double nu, double t);

struct ProjectionRun {
  Trajectory trajectory;
  /// Largest max|u| tau n / L over the run; above 0.5 the step is flagged.
  double cfl = 0.0;
  bool cfl_warning = false;
};

/// u^{n+1} = e^{-nu A tau}(u^n - tau P[T(Tu^n . grad Tu^n)]) in Fourier space.
ProjectionRun projection_solve(const VelocityField& u0, double nu, double tau, int steps, bool convection = true);

}  // namespace wide
