#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "wide/field.hpp"

namespace testsupport {

inline constexpr double pi = std::numbers::pi;

inline wide::GridSpec grid2(int n) {
  wide::GridSpec g;
  g.dim = 2;
  g.n = n;
  return g;
}

/// Samples an analytic 2D vector field at the grid points.
inline wide::VelocityField sample(const wide::GridSpec& g,
                                  const std::function<std::pair<double, double>(double, double)>& f) {
  wide::VelocityField u(g);
  const double h = g.domain_length / g.n;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const auto [a, b] = f(i * h, j * h);
      u.component(0)[i * g.n + j] = a;
      u.component(1)[i * g.n + j] = b;
    }
  return u;
}

inline wide::VelocityField taylor_green_field(const wide::GridSpec& g, double amp = 1.0) {
  return sample(g, [amp](double x, double y) {
    return std::pair{amp * std::sin(x) * std::cos(y), -amp * std::cos(x) * std::sin(y)};
  });
}

/// Derivative along `axis` of the trigonometric interpolant of a 2D scalar
/// array, by a direct O(n^4) DFT. Independent of the FFT library.
inline std::vector<double> naive_derivative(std::span<const double> f, int n, int axis) {
  using C = std::complex<double>;
  std::vector<C> c(n * n);
  const double w = 2.0 * pi / n;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      C s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += f[i * n + j] * std::polar(1.0, -w * (p * i + q * j));
      c[p * n + q] = s / double(n * n);
    }
  std::vector<double> out(n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      C s = 0.0;
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
          const int kp = p <= n / 2 ? p : p - n;
          const int kq = q <= n / 2 ? q : q - n;
          int k = axis == 0 ? kp : kq;
          if (std::abs(k) == n / 2) k = 0;
          s += C(0.0, double(k)) * c[p * n + q] * std::polar(1.0, w * (p * i + q * j));
        }
      out[i * n + j] = s.real();
    }
  return out;
}

inline double grid_dot(std::span<const double> a, std::span<const double> b, double cell) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * cell;
}

}  // namespace testsupport
