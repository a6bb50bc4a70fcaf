#pragma once

#include <array>
#include <vector>

#include "wide/functional.hpp"

namespace wide {

/// Euler-Lagrange quantities of one slice n >= 1.
struct ELSlice {
  VelocityField v;   ///< P(m_n), m_n = D_n + C_n
  VelocityField f;   ///< eps T[(grad Tu_n)^T T M_n], M_n = m_n + sigma C_n
  VelocityField g;   ///< -eps T[div(T M_n (x) T u_n)], the field paired like the flux
  std::vector<std::vector<double>> g_flux;  ///< eps T M_n (x) T u_n, row-major (i, j)
  VelocityField Au;
  VelocityField B;   ///< P(C_n)
};

/// Slot 0 is left default-constructed (u_0 carries no equation).
struct ELTerms {
  std::vector<ELSlice> slices;
  std::vector<double> q;    ///< w_{n+1}/w_n
  std::vector<double> rho;  ///< d_n/w_n
};

ELTerms assemble_el_terms(const Trajectory& traj, const WideParams& params);

/// Discrete strong residual per slice, R_n = eps G_n / w_n, which expands to
///   eps (v_n - q_n v_{n+1})/tau + P(f_n + g_n) + rho_n nu A u_n  (n < N).
std::vector<VelocityField> el_strong_terms(const Trajectory& traj, const WideParams& params);

/// Smooth compactly supported test trajectory: a bump in time centred at
/// `centre` with half-width `half_width` times a divergence-free single Fourier
/// mode with wavevector (kx, ky) (2D) or (kx, ky, 0) (3D).
Trajectory bump_test_function(const GridSpec& grid, double tau, int steps, std::array<int, 2> k, double centre,
                              double half_width);

/// sqrt(sum_n tau |phi_n|^2).
double trajectory_l2(const Trajectory& phi);

/// Weak form, evaluated slice by slice from m, M and the linearized convection:
///   sum_n tau [ <m_n, eps (phi_n - q phi_{n-1})/tau> + eps <M_n, C'(u_n) phi_n>
///               + rho_n nu <grad u_n, grad phi_n> ].
/// Tests must be divergence-free and vanish at both ends.
std::vector<double> weak_el_residual(const Trajectory& traj, const WideParams& params,
                                     const std::vector<Trajectory>& tests);

struct ResidualWindow {
  double buffer = 0.2;  ///< terminal fraction of [0, T] left out
};

/// sqrt(sum_{n in window} tau |P R_n|_{H^s}^2) over slices 1 .. floor((1-buffer)N).
double strong_el_residual(const Trajectory& traj, const WideParams& params, SobolevIndex s,
                          ResidualWindow window = {});

struct KernelCheck {
  double gap = 0.0;           ///< max over probes of |v_j - rhs_j|_{H^s}
  double relative_gap = 0.0;  ///< gap / max_j |v_j|_{H^s}
  std::vector<double> probe_times;
};

/// Compares v at 8 probe slices in [tau, 0.6T] with the discrete convolution
///   q^{N-j} v_N - (tau/eps) sum_{n=j}^{N-1} q^{n-j} (P(f_n + g_n) + rho_n nu A u_n).
KernelCheck kernel_convolution_check(const Trajectory& traj, const WideParams& params, SobolevIndex s,
                                     int probes = 8, double last_fraction = 0.6);

struct KernelNorms {
  double l1 = 0.0;
  double l2 = 0.0;
};

/// Quadrature of K(t) = e^{t/eps}/eps on t <= 0.
KernelNorms kernel_norms(double epsilon);

/// Mean-zero p with -Laplace p = div(u.grad u + partner); then
/// grad p = -(I - P)(u.grad u + partner).
ScalarField recover_pressure(const VelocityField& u, const VelocityField* partner = nullptr);
VelocityField pressure_gradient(const ScalarField& p);

struct ELReport {
  std::vector<double> weak_residuals;
  double weak_max = 0.0;
  double strong_norm = 0.0;
  double kernel_gap = 0.0;
  double kernel_relative_gap = 0.0;
  double fg_l1_dual = 0.0;  ///< sum_n tau |f_n + g_n|_{H^s}
  double v_l2_dual = 0.0;   ///< sqrt(sum_n tau |v_n|_{H^s}^2)
  double kernel_l1 = 0.0;
  double kernel_l2 = 0.0;
  double s = -3.0;
  double buffer = 0.2;
};

ELReport el_report(const Trajectory& traj, const WideParams& params, SobolevIndex s, ResidualWindow window = {});

}  // namespace wide
