#pragma once

#include <span>
#include <vector>

#include "wide/field.hpp"

namespace wide {

/// How e^{-t/eps} is integrated against the slice terms.
///   interval: every term of slice n uses w_n, the average over (t_{n-1}, t_n].
///   centred:  the dissipation of slice n uses the average over the cell
///             (t_n - tau/2, t_n + tau/2], slice 0 contributes its half cell, and the
///             constant continuation u(t) = u_N for t > T is integrated exactly.
enum class QuadratureRule { centred, interval };

const char* to_string(QuadratureRule rule);
QuadratureRule parse_quadrature(const std::string& name);

struct WideParams {
  double epsilon = 0.1;
  double sigma = 0.25;
  double nu = 0.1;
  double horizon = 1.0;
  QuadratureRule quadrature = QuadratureRule::centred;
  /// false drops u.grad(u) everywhere (linear Stokes problem).
  bool convection = true;

  bool energy_certificate_valid() const { return sigma > 0.125; }
  /// Throws ConfigError on non-positive eps/nu/T or negative sigma.
  void validate() const;
};

/// Slices u_0..u_N at t_n = n tau; u_0 is the fixed initial datum.
struct Trajectory {
  GridSpec grid;
  double tau = 0.0;
  std::vector<VelocityField> slices;

  int steps() const { return static_cast<int>(slices.size()) - 1; }
  double time(int n) const { return n * tau; }
  double horizon() const { return steps() * tau; }

  static Trajectory constant(const VelocityField& u0, double tau, int steps);
  /// Throws StructuralError when a slice lives on a different grid.
  void check_structure() const;
};

/// Integrated exponential weights of the discrete functional
///   I = sum_{n=1}^N tau w_n [ |m_n|^2/2 + sigma/2 |C_n|^2 ]
///     + tail (1+sigma)/2 |C_N|^2
///     + sum_{n=0}^N tau d_n nu/(2 eps) |grad u_n|^2
/// with m_n = (u_n - u_{n-1})/tau + C_n and C_n = T[(Tu_n).grad(Tu_n)].
struct TimeWeights {
  std::vector<double> w;  ///< size N+1, w[0] = 0
  std::vector<double> d;  ///< size N+1
  double tail = 0.0;
};

/// w_n = (eps/tau)(e^{-t_{n-1}/eps} - e^{-t_n/eps}), n = 1..N.
std::vector<double> exp_weights(const WideParams& params, double tau, int steps);
TimeWeights time_weights(const WideParams& params, double tau, int steps);

struct FunctionalBreakdown {
  double inertia = 0.0;
  double stabilization = 0.0;
  double dissipation = 0.0;
  double total = 0.0;
};

/// Deterministic pairwise reduction.
double pairwise_sum(std::span<const double> values);

class WideFunctional {
 public:
  WideFunctional(const GridSpec& grid, double tau, int steps, const WideParams& params);

  const GridSpec& grid() const { return grid_; }
  double tau() const { return tau_; }
  int steps() const { return steps_; }
  const WideParams& params() const { return params_; }
  const TimeWeights& weights() const { return weights_; }

  FunctionalBreakdown evaluate(const Trajectory& traj) const;

  /// Riesz representative G_1..G_N of the derivative with respect to
  /// sum_{n=1}^N tau <., .>; slot 0 is zero. Every slice is Leray-projected.
  std::vector<SpectralField> gradient_spectral(const Trajectory& traj,
                                               FunctionalBreakdown* value = nullptr) const;
  std::vector<VelocityField> gradient(const Trajectory& traj, FunctionalBreakdown* value = nullptr) const;

  /// Flat interface over the unknown slices 1..N (grid values, component-major).
  std::size_t unknowns() const { return static_cast<std::size_t>(steps_) * slice_size_; }
  std::vector<double> flatten(const Trajectory& traj) const;
  void unflatten(std::span<const double> x, Trajectory& traj) const;
  /// Euclidean gradient of x -> I(u_0, x); equals tau h^d G_n per slice.
  double value_and_gradient(const VelocityField& u0, std::span<const double> x, std::span<double> g) const;
  double value(const VelocityField& u0, std::span<const double> x) const;

 private:
  void check(const Trajectory& traj) const;

  GridSpec grid_;
  double tau_;
  int steps_;
  WideParams params_;
  TimeWeights weights_;
  std::size_t slice_size_;
};

FunctionalBreakdown eval_functional(const Trajectory& traj, const WideParams& params);
std::vector<VelocityField> grad_functional(const Trajectory& traj, const WideParams& params);

/// Leray projection followed by the largest radial cutoff k_max with
/// |grad u|^2 + eps |u.grad u|^2 <= C0/eps.
VelocityField prepare_initial_datum(const VelocityField& u0_raw, const WideParams& params, double c0 = 100.0);

}  // namespace wide
