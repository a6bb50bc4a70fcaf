#include "wide/euler_lagrange.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>

namespace wide {

namespace {

constexpr Complex kI{0.0, 1.0};

struct SliceState {
  SpectralField u, conv, m, big;
};

/// Spectral u_n, C_n, m_n and M_n for n = 0..N (conv/m/M of slot 0 unused).
std::vector<SliceState> slice_states(const Trajectory& traj, const WideParams& params, ConvectionWorkspace& ws) {
  const int N = traj.steps();
  std::vector<SliceState> st(N + 1);
  for (int n = 0; n <= N; ++n) {
    st[n].u = to_spectral(traj.slices[n]);
    st[n].conv = SpectralField(traj.grid);
    st[n].m = SpectralField(traj.grid);
    st[n].big = SpectralField(traj.grid);
  }
  for (int n = 1; n <= N; ++n) {
    if (params.convection) {
      ws.load(st[n].u);
      ws.convection(st[n].conv);
    }
    for (std::size_t i = 0; i < st[n].m.data.size(); ++i) {
      st[n].m.data[i] = (st[n].u.data[i] - st[n - 1].u.data[i]) / traj.tau + st[n].conv.data[i];
      st[n].big.data[i] = st[n].m.data[i] + params.sigma * st[n].conv.data[i];
    }
  }
  return st;
}

SpectralField stokes_spectral(const SpectralField& u) {
  auto basis = SpectralBasis::get(u.grid);
  const auto k2 = basis->k2();
  SpectralField out(u.grid);
  for (int i = 0; i < u.grid.dim; ++i) {
    const auto a = u.component(i);
    auto b = out.component(i);
    for (std::size_t m = 0; m < u.modes; ++m) b[m] = k2[m] * a[m];
  }
  return out;
}

double dual_norm(const SpectralField& f, SobolevIndex s) { return sobolev_norm(f, s); }

std::vector<SpectralField> strong_spectral(const Trajectory& traj, const WideParams& params) {
  WideFunctional functional(traj.grid, traj.tau, traj.steps(), params);
  auto grad = functional.gradient_spectral(traj);
  const auto& w = functional.weights().w;
  for (int n = 1; n <= traj.steps(); ++n)
    for (auto& c : grad[n].data) c *= params.epsilon / w[n];
  return grad;
}

int window_end(int steps, double buffer) {
  return std::max(1, static_cast<int>(std::floor((1.0 - buffer) * steps + 1e-9)));
}

}  // namespace

ELTerms assemble_el_terms(const Trajectory& traj, const WideParams& params) {
  traj.check_structure();
  params.validate();
  const GridSpec& grid = traj.grid;
  const int N = traj.steps();
  const double eps = params.epsilon;
  ConvectionWorkspace ws(grid);
  const auto st = slice_states(traj, params, ws);
  const auto tw = time_weights(params, traj.tau, N);

  ELTerms terms;
  terms.slices.resize(N + 1);
  terms.q.assign(N + 1, 0.0);
  terms.rho.assign(N + 1, 0.0);
  for (int n = 1; n <= N; ++n) {
    terms.q[n] = n < N ? tw.w[n + 1] / tw.w[n] : 0.0;
    terms.rho[n] = tw.d[n] / tw.w[n];
    ELSlice& e = terms.slices[n];
    SpectralField tmp = st[n].m;
    project_in_place(tmp);
    e.v = to_physical(tmp);
    tmp = st[n].conv;
    project_in_place(tmp);
    e.B = to_physical(tmp);
    e.Au = to_physical(stokes_spectral(st[n].u));
    SpectralField f(grid), g(grid);
    if (params.convection) {
      ws.load(st[n].u);
      ws.transpose_gradient_product(st[n].big, f);
      e.g_flux = ws.flux(st[n].big);
      for (auto& comp : e.g_flux)
        for (auto& x : comp) x *= eps;
      ws.flux_divergence(e.g_flux, g);
      for (auto& c : f.data) c *= eps;
      for (auto& c : g.data) c = -c;
    } else {
      e.g_flux.assign(grid.dim * grid.dim, std::vector<double>(grid.points(), 0.0));
    }
    e.f = to_physical(f);
    e.g = to_physical(g);
  }
  return terms;
}

std::vector<VelocityField> el_strong_terms(const Trajectory& traj, const WideParams& params) {
  const auto hat = strong_spectral(traj, params);
  std::vector<VelocityField> out;
  out.emplace_back(traj.grid);
  for (int n = 1; n <= traj.steps(); ++n) out.push_back(to_physical(hat[n]));
  return out;
}

Trajectory bump_test_function(const GridSpec& grid, double tau, int steps, std::array<int, 2> k, double centre,
                              double half_width) {
  if (k[0] == 0 && k[1] == 0) throw InputError("test function wavevector must be nonzero");
  const double T = steps * tau;
  if (!(half_width > 0.0) || centre - half_width < 0.0 || centre + half_width > T)
    throw InputError("test function support must lie inside [0, T]");
  VelocityField mode(grid);
  const int n = grid.n;
  const double h = grid.domain_length / n;
  const double scale = 2.0 * std::numbers::pi / grid.domain_length;
  const double kn = std::hypot(k[0], k[1]);
  for (std::size_t p = 0; p < grid.points(); ++p) {
    // Row-major: the first two axes are x and y.
    std::size_t rem = p;
    std::vector<int> idx(grid.dim);
    for (int a = grid.dim - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % n);
      rem /= n;
    }
    const double phase = scale * (k[0] * idx[0] * h + k[1] * idx[1] * h);
    mode.component(0)[p] = -k[1] / kn * std::cos(phase);
    mode.component(1)[p] = k[0] / kn * std::cos(phase);
  }
  Trajectory phi;
  phi.grid = grid;
  phi.tau = tau;
  for (int j = 0; j <= steps; ++j) {
    const double r = (j * tau - centre) / half_width;
    const double b = std::abs(r) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0;
    phi.slices.push_back(b * mode);
  }
  return phi;
}

double trajectory_l2(const Trajectory& phi) {
  std::vector<double> t;
  for (int n = 1; n <= phi.steps(); ++n) {
    const double a = l2_norm(phi.slices[n]);
    t.push_back(phi.tau * a * a);
  }
  return std::sqrt(pairwise_sum(t));
}

std::vector<double> weak_el_residual(const Trajectory& traj, const WideParams& params,
                                     const std::vector<Trajectory>& tests) {
  traj.check_structure();
  params.validate();
  const int N = traj.steps();
  for (std::size_t t = 0; t < tests.size(); ++t) {
    const auto& phi = tests[t];
    phi.check_structure();
    if (!(phi.grid == traj.grid) || phi.steps() != N || std::abs(phi.tau - traj.tau) > 1e-14 * traj.tau)
      throw StructuralError("test function " + std::to_string(t) + " does not match the trajectory layout");
    double scale = 0.0;
    for (const auto& s : phi.slices) scale = std::max(scale, s.max_abs());
    if (phi.slices.front().max_abs() > 1e-14 * scale || phi.slices.back().max_abs() > 1e-14 * scale)
      throw InputError("test function " + std::to_string(t) + " must vanish at t = 0 and t = T");
    for (const auto& s : phi.slices)
      if (max_divergence(s) > 1e-10 * std::max(scale, 1e-300))
        throw InputError("test function " + std::to_string(t) + " is not divergence-free");
  }
  const double eps = params.epsilon;
  const double tau = traj.tau;
  ConvectionWorkspace ws(traj.grid);
  const auto st = slice_states(traj, params, ws);
  const auto tw = time_weights(params, tau, N);

  std::vector<std::vector<double>> contrib(tests.size(), std::vector<double>(N + 1, 0.0));
  std::vector<SpectralField> prev(tests.size());
  for (std::size_t t = 0; t < tests.size(); ++t) prev[t] = to_spectral(tests[t].slices[0]);
  SpectralField lin(traj.grid), diff(traj.grid);
  for (int n = 1; n <= N; ++n) {
    const double q = n > 1 ? tw.w[n] / tw.w[n - 1] : 0.0;
    const double rho = tw.d[n] / tw.w[n];
    if (params.convection) ws.load(st[n].u);
    const auto au = stokes_spectral(st[n].u);
    for (std::size_t t = 0; t < tests.size(); ++t) {
      auto cur = to_spectral(tests[t].slices[n]);
      for (std::size_t i = 0; i < diff.data.size(); ++i) diff.data[i] = eps * (cur.data[i] - q * prev[t].data[i]) / tau;
      double v = inner_product(st[n].m, diff) + rho * params.nu * inner_product(au, cur);
      if (params.convection) {
        ws.linearized(cur, lin);
        v += eps * inner_product(st[n].big, lin);
      }
      contrib[t][n] = tau * v;
      prev[t] = std::move(cur);
    }
  }
  std::vector<double> out;
  for (const auto& c : contrib) out.push_back(pairwise_sum(c));
  return out;
}

double strong_el_residual(const Trajectory& traj, const WideParams& params, SobolevIndex s, ResidualWindow window) {
  const auto r = strong_spectral(traj, params);
  const int end = std::min(traj.steps(), window_end(traj.steps(), window.buffer));
  std::vector<double> terms;
  for (int n = 1; n <= end; ++n) {
    const double a = dual_norm(r[n], s);
    terms.push_back(traj.tau * a * a);
  }
  return std::sqrt(pairwise_sum(terms));
}

KernelCheck kernel_convolution_check(const Trajectory& traj, const WideParams& params, SobolevIndex s, int probes,
                                     double last_fraction) {
  traj.check_structure();
  KernelCheck kc;
  const int N = traj.steps();
  if (N < 2) return kc;
  const double eps = params.epsilon;
  const double tau = traj.tau;
  ConvectionWorkspace ws(traj.grid);
  const auto st = slice_states(traj, params, ws);
  const auto tw = time_weights(params, tau, N);
  auto basis = SpectralBasis::get(traj.grid);
  const auto k2 = basis->k2();

  std::vector<SpectralField> v(N + 1), h(N + 1);
  SpectralField f(traj.grid), g(traj.grid);
  for (int n = 1; n <= N; ++n) {
    v[n] = st[n].m;
    project_in_place(v[n]);
    h[n] = SpectralField(traj.grid);
    if (params.convection) {
      ws.load(st[n].u);
      ws.adjoint(st[n].big, h[n]);
      for (auto& c : h[n].data) c *= eps;
      project_in_place(h[n]);
    }
    const double rho = tw.d[n] / tw.w[n];
    for (int i = 0; i < traj.grid.dim; ++i) {
      auto hc = h[n].component(i);
      const auto uc = st[n].u.component(i);
      for (std::size_t m = 0; m < h[n].modes; ++m) hc[m] += rho * params.nu * k2[m] * uc[m];
    }
  }
  // Backward recursion S_j = q S_{j+1} - (tau/eps) h_j, S_N = v_N.
  std::vector<SpectralField> S(N + 1);
  S[N] = v[N];
  for (int j = N - 1; j >= 1; --j) {
    const double q = tw.w[j + 1] / tw.w[j];
    S[j] = SpectralField(traj.grid);
    for (std::size_t i = 0; i < S[j].data.size(); ++i) S[j].data[i] = q * S[j + 1].data[i] - (tau / eps) * h[j].data[i];
  }
  const int last = std::max(1, static_cast<int>(std::floor(last_fraction * N + 1e-9)));
  double vmax = 0.0;
  for (int p = 0; p < probes; ++p) {
    const int j = probes > 1 ? 1 + static_cast<int>(std::lround(double(p) * (last - 1) / (probes - 1))) : 1;
    kc.probe_times.push_back(j * tau);
    SpectralField d = v[j];
    for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] -= S[j].data[i];
    kc.gap = std::max(kc.gap, dual_norm(d, s));
    vmax = std::max(vmax, dual_norm(v[j], s));
  }
  kc.relative_gap = vmax > 0.0 ? kc.gap / vmax : 0.0;
  return kc;
}

KernelNorms kernel_norms(double epsilon) {
  if (!(epsilon > 0.0)) throw InputError("kernel needs epsilon > 0");
  boost::math::quadrature::exp_sinh<double> integrator;
  // K(-s) for s >= 0.
  const double l1 = integrator.integrate([epsilon](double s) { return std::exp(-s / epsilon) / epsilon; }, 0.0,
                                         std::numeric_limits<double>::infinity());
  const double l2sq = integrator.integrate(
      [epsilon](double s) { return std::exp(-2.0 * s / epsilon) / (epsilon * epsilon); }, 0.0,
      std::numeric_limits<double>::infinity());
  return {l1, std::sqrt(l2sq)};
}

ScalarField recover_pressure(const VelocityField& u, const VelocityField* partner) {
  VelocityField rhs = advect(u);
  if (partner) rhs += *partner;
  const auto hat = to_spectral(rhs);
  auto basis = SpectralBasis::get(u.grid());
  const auto k2 = basis->k2();
  std::vector<Complex> p(hat.modes, Complex{});
  for (int i = 0; i < u.dim(); ++i) {
    const auto dk = basis->dk(i);
    const auto c = hat.component(i);
    for (std::size_t m = 0; m < hat.modes; ++m)
      if (k2[m] > 0.0) p[m] += kI * dk[m] * c[m] / k2[m];
  }
  ScalarField out{u.grid(), std::vector<double>(u.points())};
  basis->inverse(p, out.values);
  return out;
}

VelocityField pressure_gradient(const ScalarField& p) {
  auto basis = SpectralBasis::get(p.grid);
  std::vector<Complex> hat(p.grid.modes());
  basis->forward(p.values, hat);
  SpectralField g(p.grid);
  for (int i = 0; i < p.grid.dim; ++i) {
    const auto dk = basis->dk(i);
    auto c = g.component(i);
    for (std::size_t m = 0; m < hat.size(); ++m) c[m] = kI * dk[m] * hat[m];
  }
  return to_physical(g);
}

ELReport el_report(const Trajectory& traj, const WideParams& params, SobolevIndex s, ResidualWindow window) {
  ELReport r;
  r.s = s.s;
  r.buffer = window.buffer;
  const int N = traj.steps();
  const double T = traj.horizon();
  if (N >= 4) {
    std::vector<Trajectory> tests;
    const std::array<std::array<int, 2>, 4> ks{{{1, 1}, {0, 1}, {2, 1}, {1, 3}}};
    const std::array<double, 4> centres{0.3, 0.4, 0.5, 0.35};
    for (std::size_t i = 0; i < ks.size(); ++i) {
      auto phi = bump_test_function(traj.grid, traj.tau, N, ks[i], centres[i] * T, 0.25 * T);
      const double nrm = trajectory_l2(phi);
      for (auto& sl : phi.slices) sl *= 1.0 / nrm;
      tests.push_back(std::move(phi));
    }
    r.weak_residuals = weak_el_residual(traj, params, tests);
    for (double v : r.weak_residuals) r.weak_max = std::max(r.weak_max, std::abs(v));
  }
  r.strong_norm = strong_el_residual(traj, params, s, window);
  const auto kc = kernel_convolution_check(traj, params, s);
  r.kernel_gap = kc.gap;
  r.kernel_relative_gap = kc.relative_gap;
  const auto terms = assemble_el_terms(traj, params);
  std::vector<double> fg, vv;
  for (int n = 1; n <= N; ++n) {
    const auto a = sobolev_norm(terms.slices[n].f + terms.slices[n].g, s);
    const auto b = sobolev_norm(terms.slices[n].v, s);
    fg.push_back(traj.tau * a);
    vv.push_back(traj.tau * b * b);
  }
  r.fg_l1_dual = pairwise_sum(fg);
  r.v_l2_dual = std::sqrt(pairwise_sum(vv));
  const auto kn = kernel_norms(params.epsilon);
  r.kernel_l1 = kn.l1;
  r.kernel_l2 = kn.l2;
  return r;
}

}  // namespace wide
