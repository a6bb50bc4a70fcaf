#pragma once

#include <string>
#include <utility>

#include "wide/functional.hpp"
#include "wide/lbfgs.hpp"

namespace wide {

enum class Preconditioner { weight, stokes };

const char* to_string(Preconditioner p);
Preconditioner parse_preconditioner(const std::string& name);

struct MinimizeOptions {
  int max_iters = 2000;
  double grad_tol = 1e-6;
  int memory = 10;
  double c1 = 1e-4;
  double c2 = 0.9;
  /// Off: plain L-BFGS with identity initial Hessian.
  bool precondition = true;
  Preconditioner preconditioner = Preconditioner::stokes;
  bool verbose = false;

  void validate() const;
};

struct MinimizeReport {
  int iterations = 0;
  int evaluations = 0;
  FunctionalBreakdown breakdown;
  double initial_total = 0.0;
  /// sqrt(sum_n tau |G_n / w_n|^2): the gradient rescaled by the slice weights.
  double grad_norm = 0.0;
  bool converged = false;
  double seconds = 0.0;
  std::string status;
};

/// Rejects eps < T/25.
void check_epsilon_floor(const WideParams& params);

double stationarity_norm(const WideFunctional& functional, const std::vector<SpectralField>& gradient);

/// Minimizes the discrete functional over slices 1..N with slice 0 held fixed.
std::pair<Trajectory, MinimizeReport> minimize_global(const Trajectory& init, const WideParams& params,
                                                      const MinimizeOptions& opts);

/// One causal slab: minimizes
///   tau [ |(w - u)/tau + w.grad w|^2/2 + sigma/2 |w.grad w|^2 ] + nu/2 |grad w|^2
/// over divergence-free w.
VelocityField step_incremental(const VelocityField& u_prev, const WideParams& params, double tau,
                               const MinimizeOptions& opts, MinimizeReport* report = nullptr);

double incremental_objective(const VelocityField& w, const VelocityField& u_prev, const WideParams& params, double tau);

Trajectory run_incremental(const VelocityField& u0, const WideParams& params, double tau, int steps,
                           const MinimizeOptions& opts, bool* all_converged = nullptr);

}  // namespace wide
