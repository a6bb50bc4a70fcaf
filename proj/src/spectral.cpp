#include "wide/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace wide {

namespace {

// FFTW's planner is not re-entrant; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::size_t GridSpec::points() const {
  std::size_t p = 1;
  for (int i = 0; i < dim; ++i) p *= static_cast<std::size_t>(n);
  return p;
}

std::size_t GridSpec::modes() const {
  std::size_t p = static_cast<std::size_t>(n / 2 + 1);
  for (int i = 1; i < dim; ++i) p *= static_cast<std::size_t>(n);
  return p;
}

double GridSpec::cell_volume() const { return std::pow(domain_length / n, dim); }

double GridSpec::domain_volume() const { return std::pow(domain_length, dim); }

int GridSpec::dealias_cutoff() const {
  const double bound = dealias * n / 2.0;
  int kmax = static_cast<int>(std::ceil(bound)) - 1;
  if (kmax < 0) kmax = 0;
  if (kmax > n / 2 - 1) kmax = n / 2 - 1;
  return kmax;
}

void GridSpec::validate() const {
  if (dim != 2 && dim != 3) throw ConfigError("grid.dim must be 2 or 3, got " + std::to_string(dim));
  if (n < 8 || n % 2 != 0) throw ConfigError("grid.n must be even and >= 8, got " + std::to_string(n));
  if (!(domain_length > 0.0) || !std::isfinite(domain_length))
    throw ConfigError("grid.domain_length must be positive");
  if (!(dealias > 0.0 && dealias <= 1.0)) throw ConfigError("grid.dealias must lie in (0, 1]");
}

std::string describe(const GridSpec& grid) {
  return std::to_string(grid.dim) + "D n=" + std::to_string(grid.n);
}

std::shared_ptr<const SpectralBasis> SpectralBasis::get(const GridSpec& grid) {
  using Key = std::tuple<int, int, double, double>;
  static std::map<Key, std::shared_ptr<const SpectralBasis>> cache;
  static std::mutex cache_mutex;
  const Key key{grid.dim, grid.n, grid.domain_length, grid.dealias};
  std::lock_guard lock(cache_mutex);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto basis = std::make_shared<const SpectralBasis>(grid);
  cache.emplace(key, basis);
  return basis;
}

SpectralBasis::SpectralBasis(const GridSpec& grid) : grid_(grid) {
  grid_.validate();
  const int d = grid_.dim;
  const int n = grid_.n;
  real_size_ = grid_.points();
  complex_size_ = grid_.modes();

  {
    std::lock_guard lock(planner_mutex());
    std::vector<int> shape(d, n);
    std::vector<double> rbuf(real_size_);
    std::vector<Complex> cbuf(complex_size_);
    // FFTW_UNALIGNED keeps the chosen codelets independent of buffer alignment,
    // which keeps repeated runs bit-identical.
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plan_forward_ = fftw_plan_dft_r2c(d, shape.data(), rbuf.data(),
                                      reinterpret_cast<fftw_complex*>(cbuf.data()), flags);
    plan_inverse_ = fftw_plan_dft_c2r(d, shape.data(),
                                      reinterpret_cast<fftw_complex*>(cbuf.data()), rbuf.data(),
                                      flags | FFTW_DESTROY_INPUT);
  }

  const double scale = 2.0 * std::numbers::pi / grid_.domain_length;
  const int half = n / 2 + 1;
  const int kcut = grid_.dealias_cutoff();
  k_.assign(d, std::vector<double>(complex_size_));
  dk_.assign(d, std::vector<double>(complex_size_));
  k2_.resize(complex_size_);
  mult_.resize(complex_size_);
  retained_.resize(complex_size_);
  nyquist_.resize(complex_size_);

  for (std::size_t idx = 0; idx < complex_size_; ++idx) {
    // Row-major: last axis is the halved one.
    std::size_t rem = idx;
    std::vector<int> index(d);
    index[d - 1] = static_cast<int>(rem % half);
    rem /= half;
    for (int a = d - 2; a >= 0; --a) {
      index[a] = static_cast<int>(rem % n);
      rem /= n;
    }
    double k2 = 0.0;
    bool keep = true;
    bool nyq = false;
    for (int a = 0; a < d; ++a) {
      int ki = index[a] <= n / 2 ? index[a] : index[a] - n;
      const bool at_nyquist = std::abs(ki) == n / 2;
      nyq = nyq || at_nyquist;
      keep = keep && std::abs(ki) <= kcut;
      k_[a][idx] = scale * ki;
      dk_[a][idx] = at_nyquist ? 0.0 : scale * ki;
      k2 += k_[a][idx] * k_[a][idx];
    }
    k2_[idx] = k2;
    const int last = index[d - 1];
    mult_[idx] = (last == 0 || last == n / 2) ? 1.0 : 2.0;
    retained_[idx] = keep ? 1 : 0;
    nyquist_[idx] = nyq ? 1 : 0;
  }
}

SpectralBasis::~SpectralBasis() {
  std::lock_guard lock(planner_mutex());
  if (plan_forward_) fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
  if (plan_inverse_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inverse_));
}

void SpectralBasis::forward(std::span<const double> in, std::span<Complex> out) const {
  // r2c leaves its input intact for out-of-place transforms.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_forward_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
  const double inv = 1.0 / static_cast<double>(real_size_);
  for (auto& c : out) c *= inv;
}

void SpectralBasis::inverse(std::span<const Complex> in, std::span<double> out) const {
  std::vector<Complex> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_inverse_),
                       reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

double SpectralBasis::weighted_energy(std::span<const Complex> coeffs, double s) const {
  double sum = 0.0;
  if (s == 0.0) {
    for (std::size_t i = 0; i < complex_size_; ++i) sum += mult_[i] * std::norm(coeffs[i]);
  } else {
    for (std::size_t i = 0; i < complex_size_; ++i)
      sum += mult_[i] * std::pow(1.0 + k2_[i], s) * std::norm(coeffs[i]);
  }
  return grid_.domain_volume() * sum;
}

}  // namespace wide
