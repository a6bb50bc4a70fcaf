#pragma once

#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wide {

/// Invalid run configuration (bad parameters, unreadable inputs).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fields or trajectories that do not fit together (grid or length mismatch).
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied an argument outside the operation's domain.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values encountered during a computation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Periodic box [0, L)^dim sampled with n points per axis.
struct GridSpec {
  int dim = 2;
  int n = 32;
  double domain_length = 2.0 * std::numbers::pi;
  double dealias = 2.0 / 3.0;

  std::size_t points() const;
  /// Number of complex coefficients in the real-to-complex half spectrum.
  std::size_t modes() const;
  /// Volume of one grid cell, (L/n)^dim.
  double cell_volume() const;
  double domain_volume() const;
  /// Largest retained |k_i| under the dealiasing rule (strict |k_i| < dealias*n/2).
  int dealias_cutoff() const;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

std::string describe(const GridSpec& grid);

/// Exponent of a periodic Sobolev norm; negative values give dual norms.
struct SobolevIndex {
  double s = 0.0;
};

}  // namespace wide
