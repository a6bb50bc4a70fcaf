#include "wide/functional.hpp"

#include <algorithm>
#include <cmath>

namespace wide {

namespace {

double spectral_l2sq(const SpectralBasis& basis, const SpectralField& f) {
  double sum = 0.0;
  for (int i = 0; i < f.grid.dim; ++i) sum += basis.weighted_energy(f.component(i), 0.0);
  return sum;
}

double finite_or_throw(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("non-finite ") + what + " in WIDE functional");
  return v;
}

}  // namespace

const char* to_string(QuadratureRule rule) {
  return rule == QuadratureRule::centred ? "centred" : "interval";
}

QuadratureRule parse_quadrature(const std::string& name) {
  if (name == "centred" || name == "centered") return QuadratureRule::centred;
  if (name == "interval") return QuadratureRule::interval;
  throw ConfigError("params.quadrature must be 'centred' or 'interval', got '" + name + "'");
}

void WideParams::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("params.epsilon must be positive");
  if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("params.nu must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("params.T must be positive");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("params.sigma must be nonnegative");
}

Trajectory Trajectory::constant(const VelocityField& u0, double tau, int steps) {
  Trajectory t;
  t.grid = u0.grid();
  t.tau = tau;
  t.slices.assign(steps + 1, u0);
  return t;
}

void Trajectory::check_structure() const {
  if (slices.empty()) throw StructuralError("trajectory has no slices");
  if (!(tau > 0.0)) throw StructuralError("trajectory time step must be positive");
  for (std::size_t n = 0; n < slices.size(); ++n) {
    if (!(slices[n].grid() == grid) || slices[n].data().size() != grid.dim * grid.points())
      throw StructuralError("slice " + std::to_string(n) + " is on grid " + describe(slices[n].grid()) +
                            ", trajectory grid is " + describe(grid));
  }
}

std::vector<double> exp_weights(const WideParams& params, double tau, int steps) {
  const double eps = params.epsilon;
  const double cell = -std::expm1(-tau / eps);
  std::vector<double> w(steps);
  for (int n = 1; n <= steps; ++n) w[n - 1] = (eps / tau) * std::exp(-(n - 1) * tau / eps) * cell;
  return w;
}

TimeWeights time_weights(const WideParams& params, double tau, int steps) {
  TimeWeights tw;
  const auto w = exp_weights(params, tau, steps);
  tw.w.assign(steps + 1, 0.0);
  std::copy(w.begin(), w.end(), tw.w.begin() + 1);
  tw.d.assign(steps + 1, 0.0);
  if (params.quadrature == QuadratureRule::interval) {
    std::copy(w.begin(), w.end(), tw.d.begin() + 1);
    return tw;
  }
  const double eps = params.epsilon;
  const double T = steps * tau;
  tw.d[0] = (eps / tau) * -std::expm1(-0.5 * tau / eps);
  const double cell = -std::expm1(-tau / eps);
  for (int n = 1; n < steps; ++n) tw.d[n] = (eps / tau) * std::exp(-(n - 0.5) * tau / eps) * cell;
  // Last cell runs to infinity.
  if (steps > 0) tw.d[steps] = (eps / tau) * std::exp(-(T - 0.5 * tau) / eps);
  tw.tail = eps * std::exp(-T / eps);
  return tw;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

WideFunctional::WideFunctional(const GridSpec& grid, double tau, int steps, const WideParams& params)
    : grid_(grid), tau_(tau), steps_(steps), params_(params) {
  grid_.validate();
  params_.validate();
  if (!(tau > 0.0)) throw ConfigError("time step must be positive");
  if (steps < 0) throw ConfigError("number of steps must be nonnegative");
  weights_ = time_weights(params_, tau_, steps_);
  slice_size_ = grid_.dim * grid_.points();
}

void WideFunctional::check(const Trajectory& traj) const {
  traj.check_structure();
  if (!(traj.grid == grid_)) throw StructuralError("trajectory grid does not match functional grid");
  if (traj.steps() != steps_) {
    throw StructuralError("trajectory has " + std::to_string(traj.steps()) + " steps, functional expects " +
                          std::to_string(steps_));
  }
  if (std::abs(traj.tau - tau_) > 1e-14 * tau_) throw StructuralError("trajectory time step mismatch");
}

FunctionalBreakdown WideFunctional::evaluate(const Trajectory& traj) const {
  check(traj);
  auto basis = SpectralBasis::get(grid_);
  ConvectionWorkspace ws(grid_);
  const auto& tw = weights_;
  const double sigma = params_.sigma;
  const double diss_coef = params_.nu / (2.0 * params_.epsilon);

  std::vector<double> inertia(steps_ + 1, 0.0), stab(steps_ + 1, 0.0), diss(steps_ + 1, 0.0);
  SpectralField prev = to_spectral(traj.slices[0]);
  SpectralField conv(grid_);
  SpectralField m(grid_);
  diss[0] = tau_ * tw.d[0] * diss_coef * gradient_energy(prev);
  for (int n = 1; n <= steps_; ++n) {
    SpectralField cur = to_spectral(traj.slices[n]);
    if (params_.convection) {
      ws.load(cur);
      ws.convection(conv);
    }
    for (std::size_t i = 0; i < m.data.size(); ++i) {
      m.data[i] = (cur.data[i] - prev.data[i]) / tau_;
      if (params_.convection) m.data[i] += conv.data[i];
    }
    const double c2 = params_.convection ? spectral_l2sq(*basis, conv) : 0.0;
    inertia[n] = tau_ * tw.w[n] * 0.5 * spectral_l2sq(*basis, m);
    stab[n] = tau_ * tw.w[n] * 0.5 * sigma * c2;
    if (n == steps_) {
      inertia[n] += tw.tail * 0.5 * c2;
      stab[n] += tw.tail * 0.5 * sigma * c2;
    }
    diss[n] = tau_ * tw.d[n] * diss_coef * gradient_energy(cur);
    prev = std::move(cur);
  }
  FunctionalBreakdown b;
  b.inertia = finite_or_throw(pairwise_sum(inertia), "inertia");
  b.stabilization = finite_or_throw(pairwise_sum(stab), "stabilization");
  b.dissipation = finite_or_throw(pairwise_sum(diss), "dissipation");
  b.total = b.inertia + b.stabilization + b.dissipation;
  return b;
}

std::vector<SpectralField> WideFunctional::gradient_spectral(const Trajectory& traj,
                                                            FunctionalBreakdown* value) const {
  check(traj);
  if (value) *value = evaluate(traj);
  auto basis = SpectralBasis::get(grid_);
  const auto k2 = basis->k2();
  const auto& tw = weights_;
  const double sigma = params_.sigma;
  const std::size_t modes = grid_.modes();
  const int d = grid_.dim;

  std::vector<SpectralField> u(steps_ + 1);
  for (int n = 0; n <= steps_; ++n) u[n] = to_spectral(traj.slices[n]);

  ConvectionWorkspace ws(grid_);
  std::vector<SpectralField> conv(steps_ + 1, SpectralField(grid_));
  if (params_.convection) {
    for (int n = 1; n <= steps_; ++n) {
      ws.load(u[n]);
      ws.convection(conv[n]);
    }
  }
  // m_n weighted by w_n; index N+1 is implicitly zero.
  std::vector<SpectralField> wm(steps_ + 2, SpectralField(grid_));
  for (int n = 1; n <= steps_; ++n) {
    for (std::size_t i = 0; i < wm[n].data.size(); ++i)
      wm[n].data[i] = tw.w[n] * ((u[n].data[i] - u[n - 1].data[i]) / tau_ + conv[n].data[i]);
  }

  std::vector<SpectralField> grad(steps_ + 1, SpectralField(grid_));
  SpectralField adj_in(grid_);
  SpectralField adj_out(grid_);
  const double diss = params_.nu / params_.epsilon;
  for (int n = 1; n <= steps_; ++n) {
    auto& g = grad[n];
    for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] = (wm[n].data[i] - wm[n + 1].data[i]) / tau_;
    if (params_.convection) {
      // Adj(w_n M_n) with M_n = m_n + sigma C_n, plus the tail term at n = N.
      double cw = tw.w[n] * sigma;
      if (n == steps_) cw += tw.tail * (1.0 + sigma) / tau_;
      for (std::size_t i = 0; i < adj_in.data.size(); ++i) adj_in.data[i] = wm[n].data[i] + cw * conv[n].data[i];
      ws.load(u[n]);
      ws.adjoint(adj_in, adj_out);
      for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += adj_out.data[i];
    }
    const double c = tw.d[n] * diss;
    for (int a = 0; a < d; ++a) {
      auto gc = g.component(a);
      auto uc = u[n].component(a);
      for (std::size_t k = 0; k < modes; ++k) gc[k] += c * k2[k] * uc[k];
    }
    project_in_place(g);
  }
  return grad;
}

std::vector<VelocityField> WideFunctional::gradient(const Trajectory& traj, FunctionalBreakdown* value) const {
  const auto hat = gradient_spectral(traj, value);
  std::vector<VelocityField> out;
  out.reserve(hat.size());
  out.emplace_back(grid_);
  for (std::size_t n = 1; n < hat.size(); ++n) out.push_back(to_physical(hat[n]));
  return out;
}

std::vector<double> WideFunctional::flatten(const Trajectory& traj) const {
  check(traj);
  std::vector<double> x(unknowns());
  for (int n = 1; n <= steps_; ++n) {
    const auto s = traj.slices[n].data();
    std::copy(s.begin(), s.end(), x.begin() + (n - 1) * slice_size_);
  }
  return x;
}

void WideFunctional::unflatten(std::span<const double> x, Trajectory& traj) const {
  if (x.size() != unknowns()) throw StructuralError("flat vector has the wrong length");
  traj.grid = grid_;
  traj.tau = tau_;
  traj.slices.resize(steps_ + 1, VelocityField(grid_));
  for (int n = 1; n <= steps_; ++n) {
    if (!(traj.slices[n].grid() == grid_)) traj.slices[n] = VelocityField(grid_);
    auto s = traj.slices[n].data();
    std::copy(x.begin() + (n - 1) * slice_size_, x.begin() + n * slice_size_, s.begin());
  }
}

double WideFunctional::value(const VelocityField& u0, std::span<const double> x) const {
  Trajectory traj;
  traj.slices.assign(1, u0);
  unflatten(x, traj);
  return evaluate(traj).total;
}

double WideFunctional::value_and_gradient(const VelocityField& u0, std::span<const double> x,
                                          std::span<double> g) const {
  if (g.size() != unknowns()) throw StructuralError("gradient buffer has the wrong length");
  Trajectory traj;
  traj.slices.assign(1, u0);
  unflatten(x, traj);
  FunctionalBreakdown b;
  const auto hat = gradient_spectral(traj, &b);
  const double scale = tau_ * grid_.cell_volume();
  for (int n = 1; n <= steps_; ++n) {
    const auto phys = to_physical(hat[n]);
    const auto s = phys.data();
    auto out = g.subspan((n - 1) * slice_size_, slice_size_);
    for (std::size_t i = 0; i < slice_size_; ++i) out[i] = scale * s[i];
  }
  return b.total;
}

FunctionalBreakdown eval_functional(const Trajectory& traj, const WideParams& params) {
  traj.check_structure();
  return WideFunctional(traj.grid, traj.tau, traj.steps(), params).evaluate(traj);
}

std::vector<VelocityField> grad_functional(const Trajectory& traj, const WideParams& params) {
  traj.check_structure();
  return WideFunctional(traj.grid, traj.tau, traj.steps(), params).gradient(traj);
}

VelocityField prepare_initial_datum(const VelocityField& u0_raw, const WideParams& params, double c0) {
  params.validate();
  if (!(c0 > 0.0)) throw ConfigError("datum.C0 must be positive");
  const VelocityField u = leray_project(u0_raw);
  const double eps = params.epsilon;
  const double bound = c0 / eps;
  auto measure = [&](const VelocityField& f) {
    const double c = l2_norm(advect(f));
    return gradient_energy(f) + eps * c * c;
  };
  if (u.max_abs() == 0.0) return u;
  if (measure(u) <= bound) return u;

  auto basis = SpectralBasis::get(u.grid());
  const auto hat = to_spectral(u);
  double cmax = 0.0;
  for (const auto& c : hat.data) cmax = std::max(cmax, std::abs(c));
  std::vector<double> radii;
  for (std::size_t m = 0; m < hat.modes; ++m) {
    if (basis->k2()[m] == 0.0) continue;
    bool nonzero = false;
    for (int i = 0; i < u.dim(); ++i) nonzero = nonzero || std::abs(hat.component(i)[m]) > 1e-13 * cmax;
    if (nonzero) radii.push_back(std::sqrt(basis->k2()[m]));
  }
  std::sort(radii.begin(), radii.end(), std::greater<>());
  radii.erase(std::unique(radii.begin(), radii.end(), [](double a, double b) { return std::abs(a - b) < 1e-9; }),
              radii.end());
  for (double r : radii) {
    VelocityField cut = spectral_truncate(u, r);
    if (measure(cut) <= bound) return cut;
  }
  throw ConfigError("datum.C0 = " + std::to_string(c0) + " admits no nonzero mode of the initial datum at epsilon = " +
                    std::to_string(eps));
}

}  // namespace wide
