#include "wide/field.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace wide {

namespace {

constexpr Complex kI{0.0, 1.0};

}  // namespace

VelocityField::VelocityField(const GridSpec& grid)
    : grid_(grid), points_(grid.points()), data_(grid.dim * grid.points(), 0.0) {}

VelocityField& VelocityField::operator+=(const VelocityField& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

VelocityField& VelocityField::operator-=(const VelocityField& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

VelocityField& VelocityField::operator*=(double a) {
  for (auto& v : data_) v *= a;
  return *this;
}

VelocityField& VelocityField::axpy(double a, const VelocityField& x) {
  require_same_grid(*this, x);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * x.data_[i];
  return *this;
}

double VelocityField::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

SpectralField::SpectralField(const GridSpec& g)
    : grid(g), modes(g.modes()), data(g.dim * g.modes(), Complex{}) {}

void require_same_grid(const VelocityField& a, const VelocityField& b) {
  if (!(a.grid() == b.grid()) || a.data().size() != b.data().size())
    throw StructuralError("field grid mismatch: " + describe(a.grid()) + " vs " + describe(b.grid()));
}

SpectralField to_spectral(const VelocityField& f) {
  auto basis = SpectralBasis::get(f.grid());
  SpectralField out(f.grid());
  for (int i = 0; i < f.dim(); ++i) basis->forward(f.component(i), out.component(i));
  return out;
}

VelocityField to_physical(const SpectralField& f) {
  auto basis = SpectralBasis::get(f.grid);
  VelocityField out(f.grid);
  for (int i = 0; i < f.grid.dim; ++i) basis->inverse(f.component(i), out.component(i));
  return out;
}

void project_in_place(SpectralField& f) {
  auto basis = SpectralBasis::get(f.grid);
  const int d = f.grid.dim;
  const auto k2 = basis->k2();
  const auto nyq = basis->nyquist();
  std::vector<std::span<const double>> k(d);
  for (int a = 0; a < d; ++a) k[a] = basis->k(a);
  for (std::size_t m = 0; m < f.modes; ++m) {
    if (k2[m] == 0.0 || nyq[m]) {
      for (int i = 0; i < d; ++i) f.data[i * f.modes + m] = 0.0;
      continue;
    }
    Complex kdotu = 0.0;
    for (int i = 0; i < d; ++i) kdotu += k[i][m] * f.data[i * f.modes + m];
    const Complex c = kdotu / k2[m];
    for (int i = 0; i < d; ++i) f.data[i * f.modes + m] -= c * k[i][m];
  }
}

VelocityField leray_project(const VelocityField& f) {
  auto hat = to_spectral(f);
  project_in_place(hat);
  return to_physical(hat);
}

VelocityField advect(const VelocityField& u) {
  ConvectionWorkspace ws(u.grid());
  ws.load(to_spectral(u));
  SpectralField c(u.grid());
  ws.convection(c);
  return to_physical(c);
}

VelocityField stokes_apply(const VelocityField& u) {
  auto hat = to_spectral(u);
  auto basis = SpectralBasis::get(u.grid());
  const auto k2 = basis->k2();
  for (int i = 0; i < u.dim(); ++i) {
    auto c = hat.component(i);
    for (std::size_t m = 0; m < hat.modes; ++m) c[m] *= k2[m];
  }
  return to_physical(hat);
}

double sobolev_norm(const SpectralField& f, SobolevIndex s) {
  auto basis = SpectralBasis::get(f.grid);
  double sum = 0.0;
  for (int i = 0; i < f.grid.dim; ++i) sum += basis->weighted_energy(f.component(i), s.s);
  return std::sqrt(sum);
}

double sobolev_norm(const VelocityField& f, SobolevIndex s) { return sobolev_norm(to_spectral(f), s); }

double inner_product(const VelocityField& f, const VelocityField& g) {
  require_same_grid(f, g);
  const auto a = f.data();
  const auto b = g.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum * f.grid().cell_volume();
}

double l2_norm(const VelocityField& f) { return std::sqrt(inner_product(f, f)); }

double inner_product(const SpectralField& f, const SpectralField& g) {
  if (!(f.grid == g.grid)) throw StructuralError("spectral field grid mismatch");
  auto basis = SpectralBasis::get(f.grid);
  const auto mult = basis->multiplicity();
  double sum = 0.0;
  for (int i = 0; i < f.grid.dim; ++i) {
    const auto a = f.component(i);
    const auto b = g.component(i);
    for (std::size_t m = 0; m < f.modes; ++m) sum += mult[m] * (a[m].real() * b[m].real() + a[m].imag() * b[m].imag());
  }
  return sum * f.grid.domain_volume();
}

double gradient_energy(const SpectralField& u_hat) {
  auto basis = SpectralBasis::get(u_hat.grid);
  const auto k2 = basis->k2();
  const auto mult = basis->multiplicity();
  double sum = 0.0;
  for (int i = 0; i < u_hat.grid.dim; ++i) {
    auto c = u_hat.component(i);
    for (std::size_t m = 0; m < u_hat.modes; ++m) sum += mult[m] * k2[m] * std::norm(c[m]);
  }
  return sum * u_hat.grid.domain_volume();
}

double gradient_energy(const VelocityField& u) { return gradient_energy(to_spectral(u)); }

ScalarField divergence(const VelocityField& u) {
  auto hat = to_spectral(u);
  auto basis = SpectralBasis::get(u.grid());
  std::vector<Complex> div(hat.modes, Complex{});
  for (int i = 0; i < u.dim(); ++i) {
    const auto dk = basis->dk(i);
    const auto c = hat.component(i);
    for (std::size_t m = 0; m < hat.modes; ++m) div[m] += kI * dk[m] * c[m];
  }
  ScalarField out{u.grid(), std::vector<double>(u.points())};
  basis->inverse(div, out.values);
  return out;
}

double max_divergence(const VelocityField& u) {
  const auto div = divergence(u);
  double m = 0.0;
  for (double v : div.values) m = std::max(m, std::abs(v));
  return m;
}

double component_mean(const VelocityField& u, int i) {
  double sum = 0.0;
  for (double v : u.component(i)) sum += v;
  return sum / static_cast<double>(u.points());
}

VelocityField spectral_truncate(const VelocityField& f, double kmax) {
  auto hat = to_spectral(f);
  auto basis = SpectralBasis::get(f.grid());
  const auto k2 = basis->k2();
  const double cut = kmax * kmax * (1.0 + 1e-12);
  for (int i = 0; i < f.dim(); ++i) {
    auto c = hat.component(i);
    for (std::size_t m = 0; m < hat.modes; ++m)
      if (k2[m] > cut) c[m] = 0.0;
  }
  return to_physical(hat);
}

VelocityField random_field(const GridSpec& grid, std::uint64_t seed, double k_cut, double slope,
                           double amplitude) {
  grid.validate();
  auto basis = SpectralBasis::get(grid);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField hat(grid);
  const auto k2 = basis->k2();
  for (int i = 0; i < grid.dim; ++i) {
    auto c = hat.component(i);
    for (std::size_t m = 0; m < hat.modes; ++m) {
      // Draw for every mode so the sequence does not depend on k_cut.
      const double re = normal(rng);
      const double im = normal(rng);
      if (k2[m] == 0.0 || k2[m] > k_cut * k_cut) continue;
      const double a = std::pow(1.0 + k2[m], -0.5 * slope);
      c[m] = a * Complex(re, im);
    }
  }
  // Physical round trip enforces Hermitian symmetry on the self-conjugate planes.
  VelocityField u = leray_project(to_physical(hat));
  const double norm = l2_norm(u);
  if (norm == 0.0) return u;
  const double target = amplitude * std::sqrt(grid.domain_volume() / 2.0);
  u *= target / norm;
  return u;
}

void write_field_csv(const VelocityField& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  const auto& g = f.grid();
  const double h = g.domain_length / g.n;
  static const char* axes[] = {"x", "y", "z"};
  static const char* comps[] = {"u", "v", "w"};
  for (int a = 0; a < g.dim; ++a) os << axes[a] << ',';
  for (int i = 0; i < g.dim; ++i) os << comps[i] << (i + 1 < g.dim ? "," : "\n");
  os.precision(17);
  std::vector<int> idx(g.dim, 0);
  for (std::size_t p = 0; p < f.points(); ++p) {
    std::size_t rem = p;
    for (int a = g.dim - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % g.n);
      rem /= g.n;
    }
    for (int a = 0; a < g.dim; ++a) os << idx[a] * h << ',';
    for (int i = 0; i < g.dim; ++i) os << f.component(i)[p] << (i + 1 < g.dim ? "," : "\n");
  }
}

ConvectionWorkspace::ConvectionWorkspace(const GridSpec& grid)
    : basis_(SpectralBasis::get(grid)), dim_(grid.dim) {
  tu_.assign(dim_, std::vector<double>(grid.points()));
  grad_.assign(dim_ * dim_, std::vector<double>(grid.points()));
}

void ConvectionWorkspace::truncated_physical(std::span<const Complex> in, std::vector<double>& out) const {
  const auto keep = basis_->retained();
  std::vector<Complex> tmp(in.size());
  for (std::size_t m = 0; m < in.size(); ++m) tmp[m] = keep[m] ? in[m] : Complex{};
  basis_->inverse(tmp, out);
}

void ConvectionWorkspace::forward_truncated(std::span<const double> in, std::span<Complex> out) const {
  basis_->forward(in, out);
  const auto keep = basis_->retained();
  for (std::size_t m = 0; m < out.size(); ++m)
    if (!keep[m]) out[m] = 0.0;
}

void ConvectionWorkspace::load(const SpectralField& u_hat) {
  const std::size_t modes = basis_->complex_size();
  std::vector<Complex> tmp(modes);
  for (int i = 0; i < dim_; ++i) {
    const auto c = u_hat.component(i);
    truncated_physical(c, tu_[i]);
    for (int j = 0; j < dim_; ++j) {
      const auto dk = basis_->dk(j);
      for (std::size_t m = 0; m < modes; ++m) tmp[m] = kI * dk[m] * c[m];
      truncated_physical(tmp, grad_[i * dim_ + j]);
    }
  }
}

void ConvectionWorkspace::convection(SpectralField& out) const {
  const std::size_t pts = basis_->real_size();
  std::vector<double> prod(pts);
  for (int i = 0; i < dim_; ++i) {
    std::fill(prod.begin(), prod.end(), 0.0);
    for (int j = 0; j < dim_; ++j) {
      const auto& uj = tu_[j];
      const auto& g = grad_[i * dim_ + j];
      for (std::size_t p = 0; p < pts; ++p) prod[p] += uj[p] * g[p];
    }
    forward_truncated(prod, out.component(i));
  }
}

void ConvectionWorkspace::linearized(const SpectralField& phi_hat, SpectralField& out) const {
  const std::size_t pts = basis_->real_size();
  const std::size_t modes = basis_->complex_size();
  std::vector<std::vector<double>> tphi(dim_, std::vector<double>(pts));
  for (int i = 0; i < dim_; ++i) truncated_physical(phi_hat.component(i), tphi[i]);
  std::vector<double> prod(pts);
  std::vector<double> dphi(pts);
  std::vector<Complex> tmp(modes);
  for (int i = 0; i < dim_; ++i) {
    std::fill(prod.begin(), prod.end(), 0.0);
    const auto c = phi_hat.component(i);
    for (int j = 0; j < dim_; ++j) {
      const auto& g = grad_[i * dim_ + j];
      const auto dk = basis_->dk(j);
      for (std::size_t m = 0; m < modes; ++m) tmp[m] = kI * dk[m] * c[m];
      truncated_physical(tmp, dphi);
      const auto& uj = tu_[j];
      const auto& pj = tphi[j];
      for (std::size_t p = 0; p < pts; ++p) prod[p] += pj[p] * g[p] + uj[p] * dphi[p];
    }
    forward_truncated(prod, out.component(i));
  }
}

void ConvectionWorkspace::transpose_gradient_product(const SpectralField& m_hat, SpectralField& out) const {
  const std::size_t pts = basis_->real_size();
  std::vector<std::vector<double>> tm(dim_, std::vector<double>(pts));
  for (int i = 0; i < dim_; ++i) truncated_physical(m_hat.component(i), tm[i]);
  std::vector<double> prod(pts);
  for (int i = 0; i < dim_; ++i) {
    std::fill(prod.begin(), prod.end(), 0.0);
    for (int l = 0; l < dim_; ++l) {
      const auto& g = grad_[l * dim_ + i];
      const auto& ml = tm[l];
      for (std::size_t p = 0; p < pts; ++p) prod[p] += g[p] * ml[p];
    }
    forward_truncated(prod, out.component(i));
  }
}

std::vector<std::vector<double>> ConvectionWorkspace::flux(const SpectralField& m_hat) const {
  const std::size_t pts = basis_->real_size();
  std::vector<double> tm(pts);
  std::vector<std::vector<double>> f(dim_ * dim_, std::vector<double>(pts));
  for (int i = 0; i < dim_; ++i) {
    truncated_physical(m_hat.component(i), tm);
    for (int j = 0; j < dim_; ++j) {
      const auto& uj = tu_[j];
      auto& fij = f[i * dim_ + j];
      for (std::size_t p = 0; p < pts; ++p) fij[p] = tm[p] * uj[p];
    }
  }
  return f;
}

void ConvectionWorkspace::flux_divergence(const std::vector<std::vector<double>>& flux,
                                          SpectralField& out) const {
  const std::size_t modes = basis_->complex_size();
  std::vector<Complex> tmp(modes);
  for (int i = 0; i < dim_; ++i) {
    auto o = out.component(i);
    std::fill(o.begin(), o.end(), Complex{});
    for (int j = 0; j < dim_; ++j) {
      forward_truncated(flux[i * dim_ + j], tmp);
      const auto dk = basis_->dk(j);
      for (std::size_t m = 0; m < modes; ++m) o[m] += kI * dk[m] * tmp[m];
    }
  }
}

void ConvectionWorkspace::adjoint(const SpectralField& m_hat, SpectralField& out) const {
  transpose_gradient_product(m_hat, out);
  SpectralField div(m_hat.grid);
  flux_divergence(flux(m_hat), div);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= div.data[i];
}

}  // namespace wide
