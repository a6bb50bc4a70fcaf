#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "wide/grid.hpp"

namespace wide {

using Complex = std::complex<double>;

/// FFT plans and per-mode wavenumber tables for one grid.
///
/// Coefficients are stored as Fourier coefficients of the real-to-complex half
/// spectrum, c_k = n^{-d} sum_x f(x) e^{-i k.x}, so that inverse() is a plain
/// sum and the L2 norm is L^d * sum_k mult_k |c_k|^2.
class SpectralBasis {
 public:
  /// Shared, thread-safe lookup; plans are created once per (dim, n, L, dealias).
  static std::shared_ptr<const SpectralBasis> get(const GridSpec& grid);

  explicit SpectralBasis(const GridSpec& grid);
  ~SpectralBasis();
  SpectralBasis(const SpectralBasis&) = delete;
  SpectralBasis& operator=(const SpectralBasis&) = delete;

  const GridSpec& grid() const { return grid_; }
  std::size_t real_size() const { return real_size_; }
  std::size_t complex_size() const { return complex_size_; }

  void forward(std::span<const double> in, std::span<Complex> out) const;
  void inverse(std::span<const Complex> in, std::span<double> out) const;

  /// Physical wavenumber along `axis` (Nyquist index mapped to +n/2).
  std::span<const double> k(int axis) const { return k_[axis]; }
  /// Wavenumber used for first derivatives: zero on the Nyquist plane of that axis.
  std::span<const double> dk(int axis) const { return dk_[axis]; }
  std::span<const double> k2() const { return k2_; }
  std::span<const double> multiplicity() const { return mult_; }
  /// True where every |k_i| lies below the dealiasing cutoff.
  std::span<const unsigned char> retained() const { return retained_; }
  /// True where some axis sits at the Nyquist index.
  std::span<const unsigned char> nyquist() const { return nyquist_; }

  /// L^d * sum_k mult_k (1 + |k|^2)^s |c_k|^2 for one scalar component.
  double weighted_energy(std::span<const Complex> coeffs, double s) const;

 private:
  GridSpec grid_;
  std::size_t real_size_ = 0;
  std::size_t complex_size_ = 0;
  void* plan_forward_ = nullptr;
  void* plan_inverse_ = nullptr;
  std::vector<std::vector<double>> k_;
  std::vector<std::vector<double>> dk_;
  std::vector<double> k2_;
  std::vector<double> mult_;
  std::vector<unsigned char> retained_;
  std::vector<unsigned char> nyquist_;
};

}  // namespace wide
