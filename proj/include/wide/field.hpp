#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "wide/grid.hpp"
#include "wide/spectral.hpp"

namespace wide {

/// One velocity snapshot: `dim` real component arrays of n^dim values, row-major.
class VelocityField {
 public:
  VelocityField() = default;
  explicit VelocityField(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  int dim() const { return grid_.dim; }
  std::size_t points() const { return points_; }

  std::span<double> component(int i) { return {data_.data() + i * points_, points_}; }
  std::span<const double> component(int i) const { return {data_.data() + i * points_, points_}; }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  VelocityField& operator+=(const VelocityField& other);
  VelocityField& operator-=(const VelocityField& other);
  VelocityField& operator*=(double a);
  /// this += a * x
  VelocityField& axpy(double a, const VelocityField& x);

  double max_abs() const;

  friend VelocityField operator+(VelocityField a, const VelocityField& b) { return a += b; }
  friend VelocityField operator-(VelocityField a, const VelocityField& b) { return a -= b; }
  friend VelocityField operator*(double s, VelocityField a) { return a *= s; }

  bool operator==(const VelocityField&) const = default;

 private:
  GridSpec grid_;
  std::size_t points_ = 0;
  std::vector<double> data_;
};

struct ScalarField {
  GridSpec grid;
  std::vector<double> values;
};

/// Fourier coefficients of a VelocityField, component-major.
struct SpectralField {
  GridSpec grid;
  std::size_t modes = 0;
  std::vector<Complex> data;

  SpectralField() = default;
  explicit SpectralField(const GridSpec& g);
  std::span<Complex> component(int i) { return {data.data() + i * modes, modes}; }
  std::span<const Complex> component(int i) const { return {data.data() + i * modes, modes}; }
};

void require_same_grid(const VelocityField& a, const VelocityField& b);

SpectralField to_spectral(const VelocityField& f);
VelocityField to_physical(const SpectralField& f);

/// Mode-wise P = I - k k^T/|k|^2; also removes the mean and Nyquist modes.
void project_in_place(SpectralField& f);
VelocityField leray_project(const VelocityField& f);

/// Dealiased u.grad(u).
VelocityField advect(const VelocityField& u);

/// -Laplacian, mode-wise |k|^2.
VelocityField stokes_apply(const VelocityField& u);

/// (sum_k (1+|k|^2)^s |f_k|^2)^{1/2}, normalized so that s = 0 is the L2 norm.
double sobolev_norm(const VelocityField& f, SobolevIndex s);
double sobolev_norm(const SpectralField& f, SobolevIndex s);

/// Cell-volume weighted grid sum of f.g.
double inner_product(const VelocityField& f, const VelocityField& g);
double l2_norm(const VelocityField& f);
/// Same inner product evaluated on Fourier coefficients.
double inner_product(const SpectralField& f, const SpectralField& g);
/// ||grad u||^2 computed spectrally.
double gradient_energy(const VelocityField& u);
double gradient_energy(const SpectralField& u_hat);

ScalarField divergence(const VelocityField& u);
double max_divergence(const VelocityField& u);
double component_mean(const VelocityField& u, int i);

/// Keeps modes with |k| <= kmax (radial cutoff).
VelocityField spectral_truncate(const VelocityField& f, double kmax);

/// Projected random field with Gaussian coefficients on 0 < |k| <= k_cut, amplitude
/// spectrum (1+|k|^2)^{-slope/2}, rescaled so ||u||^2 = amplitude^2 L^d / 2
/// (the energy of the unit Taylor-Green vortex in 2D).
VelocityField random_field(const GridSpec& grid, std::uint64_t seed, double k_cut,
                           double slope = 1.0, double amplitude = 1.0);

/// Grid-point CSV: coordinates then components, one row per point.
void write_field_csv(const VelocityField& f, const std::string& path);

/// Dealiased convection kernels at a fixed velocity.
///
/// load() caches the truncated velocity T u and its gradient on the grid. The
/// other members then evaluate, on retained modes only,
///   convection:  T[(Tu).grad(Tu)]
///   linearized:  T[(Tphi).grad(Tu) + (Tu).grad(Tphi)]
///   adjoint:     T[(grad Tu)^T Tm] - T[div(Tm (x) Tu)]
/// so that <m, linearized(phi)> = <adjoint(m), phi> to rounding. Not thread-safe;
/// use one workspace per thread.
class ConvectionWorkspace {
 public:
  explicit ConvectionWorkspace(const GridSpec& grid);

  void load(const SpectralField& u_hat);
  void convection(SpectralField& out) const;
  void linearized(const SpectralField& phi_hat, SpectralField& out) const;
  void adjoint(const SpectralField& m_hat, SpectralField& out) const;

  /// T[(grad Tu)^T Tm] alone.
  void transpose_gradient_product(const SpectralField& m_hat, SpectralField& out) const;
  /// Flux tensor Tm_i Tu_j on the grid, stored row-major over (i, j).
  std::vector<std::vector<double>> flux(const SpectralField& m_hat) const;
  /// T[div_j F_ij] of a grid flux tensor.
  void flux_divergence(const std::vector<std::vector<double>>& flux, SpectralField& out) const;

  const std::vector<double>& velocity(int i) const { return tu_[i]; }
  const std::vector<double>& gradient(int i, int j) const { return grad_[i * dim_ + j]; }
  const SpectralBasis& basis() const { return *basis_; }

 private:
  void truncated_physical(std::span<const Complex> in, std::vector<double>& out) const;
  void forward_truncated(std::span<const double> in, std::span<Complex> out) const;

  std::shared_ptr<const SpectralBasis> basis_;
  int dim_;
  std::vector<std::vector<double>> tu_;
  std::vector<std::vector<double>> grad_;
};

}  // namespace wide
