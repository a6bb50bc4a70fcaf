#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "support.hpp"
#include "wide/diagnostics.hpp"
#include "wide/io.hpp"
#include "wide/reference.hpp"
#include "wide/report_io.hpp"

using namespace wide;
using namespace testsupport;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt_g(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Trajectory random_trajectory(const GridSpec& g, double tau, int steps, std::uint64_t seed) {
  Trajectory t;
  t.grid = g;
  t.tau = tau;
  for (int n = 0; n <= steps; ++n) t.slices.push_back(random_field(g, seed * 1000 + n, 5.0));
  return t;
}

/// Spectral partial derivative of one scalar array.
std::vector<double> derivative(const GridSpec& g, std::span<const double> f, int axis) {
  const auto basis = SpectralBasis::get(g);
  std::vector<Complex> c(g.modes());
  basis->forward(f, c);
  const auto dk = basis->dk(axis);
  for (std::size_t m = 0; m < c.size(); ++m) c[m] *= Complex(0.0, dk[m]);
  std::vector<double> out(g.points());
  basis->inverse(c, out);
  return out;
}

Outcome gradient_fidelity() {
  const GridSpec g = grid2(16);
  const int N = 16;
  const double tau = 0.02;
  double worst = 0.0;
  int checked = 0;
  for (int k = 0; k < 20; ++k) {
    WideParams p;
    p.epsilon = 0.1;
    p.sigma = k % 3 == 0 ? 1.0 : 0.25;
    p.horizon = N * tau;
    p.quadrature = k < 10 ? QuadratureRule::centred : QuadratureRule::interval;
    const auto traj = random_trajectory(g, tau, N, 100 + k);
    const WideFunctional F(g, tau, N, p);
    const auto x = F.flatten(traj);
    std::vector<double> grad(x.size());
    F.value_and_gradient(traj.slices[0], x, grad);
    for (int dir = 0; dir < 3; ++dir) {
      const auto d = F.flatten(random_trajectory(g, tau, N, 5000 + 10 * k + dir));
      const double h = 1e-5;
      std::vector<double> xp(x), xm(x);
      double slope = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        xp[i] += h * d[i];
        xm[i] -= h * d[i];
        slope += grad[i] * d[i];
      }
      const double fd = (F.value(traj.slices[0], xp) - F.value(traj.slices[0], xm)) / (2 * h);
      worst = std::max(worst, std::abs(fd - slope) / std::abs(slope));
      ++checked;
    }
  }
  return {worst <= 1e-6, "worst relative error " + fmt_g("%.2e", worst) + " over " + std::to_string(checked) +
                             " directions on 20 random trajectories (n=16, N=16)"};
}

Outcome variational_identities() {
  const GridSpec g = grid2(32);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  double idem = 0.0, orth = 0.0, skew = 0.0, duality = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    VelocityField f(g);
    for (double& v : f.data()) v = normal(rng);
    const auto pf = leray_project(f);
    idem = std::max(idem, l2_norm(leray_project(pf) - pf) / l2_norm(f));
    orth = std::max(orth, std::abs(inner_product(pf, f - pf)) / std::pow(l2_norm(f), 2));

    const auto u = random_field(g, 40 + trial, 10.0);
    const auto c = advect(u);
    skew = std::max(skew, std::abs(inner_product(c, u)) / (l2_norm(c) * l2_norm(u)));

    const auto psi = random_field(g, 80 + trial, 10.0);
    double grad_pair = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        grad_pair += grid_dot(derivative(g, u.component(i), j), derivative(g, psi.component(i), j), g.cell_volume());
    const double au = inner_product(stokes_apply(u), psi);
    duality = std::max(duality, std::abs(au - grad_pair) / std::sqrt(gradient_energy(u) * gradient_energy(psi)));
  }
  const double worst = std::max({idem, orth, skew, duality});
  return {worst <= 1e-11, "idempotence " + fmt_g("%.1e", idem) + ", orthogonality " + fmt_g("%.1e", orth) +
                              ", skew symmetry " + fmt_g("%.1e", skew) + ", Stokes duality " + fmt_g("%.1e", duality)};
}

Outcome constant_trajectory() {
  // Quadrature of the analytic Taylor-Green derivatives on a fine periodic grid.
  const int m = 64;
  const double h = 2 * pi / m;
  double conv2 = 0.0, grad2 = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double x = i * h, y = j * h;
      const double u = std::sin(x) * std::cos(y), v = -std::cos(x) * std::sin(y);
      const double ux = std::cos(x) * std::cos(y), uy = -std::sin(x) * std::sin(y);
      const double vx = std::sin(x) * std::sin(y), vy = -std::cos(x) * std::cos(y);
      conv2 += std::pow(u * ux + v * uy, 2) + std::pow(u * vx + v * vy, 2);
      grad2 += ux * ux + uy * uy + vx * vx + vy * vy;
    }
  conv2 *= h * h;
  grad2 *= h * h;
  const bool quad_ok = std::abs(conv2 - pi * pi) <= 1e-10 * pi * pi && std::abs(grad2 - 4 * pi * pi) <= 1e-10 * 4 * pi * pi;

  WideParams p;
  p.epsilon = 0.1;
  p.sigma = 0.25;
  p.nu = 0.1;
  p.horizon = 2.0;
  const auto t = Trajectory::constant(taylor_green(0.0, grid2(32), p.nu), 1e-2, 200);
  const double value = eval_functional(t, p).total;
  const double closed = p.epsilon * (1 + p.sigma) / 2 * conv2 + p.nu / 2 * grad2;
  const double rel = std::abs(value - closed) / closed;
  return {quad_ok && rel <= 0.01, "I = " + fmt_g("%.10f", value) + " vs closed form " + fmt_g("%.10f", closed) +
                                      " (relative " + fmt_g("%.1e", rel) + "); quadrature |u.grad u|^2 = " +
                                      fmt_g("%.12f", conv2) + ", |grad u|^2 = " + fmt_g("%.12f", grad2)};
}

Outcome stokes_oracle() {
  const GridSpec g = grid2(32);
  const double tau = 1e-2;
  const int N = 100;
  const auto u0 = random_field(g, 12, 4.0);
  const auto basis = SpectralBasis::get(g);
  const auto k2 = basis->k2();
  const auto c0 = to_spectral(u0);
  double worst = 0.0;
  for (double eps : {0.4, 0.2, 0.1, 0.05}) {
    WideParams p;
    p.epsilon = eps;
    p.horizon = 1.0;
    p.convection = false;
    MinimizeOptions o;
    o.grad_tol = 1e-9;
    const auto [traj, rep] = minimize_global(Trajectory::constant(u0, tau, N), p, o);
    std::map<double, std::vector<double>> profile;
    double num = 0.0, den = 0.0;
    for (int n = 1; n <= N; ++n) {
      SpectralField expect = c0;
      for (int c = 0; c < 2; ++c)
        for (std::size_t mode = 0; mode < g.modes(); ++mode) {
          auto& coeff = expect.component(c)[mode];
          if (coeff == Complex(0.0)) continue;
          auto it = profile.find(k2[mode]);
          if (it == profile.end())
            it = profile.emplace(k2[mode], stokes_mode_oracle(1.0, k2[mode], eps, p.nu, tau, N)).first;
          coeff *= it->second[n];
        }
      const auto oracle = to_physical(expect);
      num += std::pow(l2_norm(traj.slices[n] - oracle), 2);
      den += std::pow(l2_norm(oracle), 2);
    }
    worst = std::max(worst, std::sqrt(num / den));
  }

  SweepConfig sc;
  sc.datum = taylor_green(0.0, g, 0.1);
  sc.tau = tau;
  sc.base.horizon = 1.0;
  sc.base.convection = false;
  sc.eps_list = {0.4, 0.2, 0.1, 0.05};
  sc.sigma_alt.reset();
  const auto sweep = epsilon_sweep(sc);
  bool ratios_ok = true;
  std::string ratios;
  for (double r : sweep.ratios) {
    ratios_ok = ratios_ok && r >= 0.4 && r <= 0.7;
    ratios += (ratios.empty() ? "" : ", ") + fmt_g("%.3f", r);
  }
  return {worst <= 1e-3 && ratios_ok && !sweep.partial,
          "max relative deviation from the per-mode oracle " + fmt_g("%.2e", worst) +
              "; heat-semigroup distance ratios [" + ratios + "]"};
}

Outcome reference_accuracy() {
  const GridSpec g = grid2(32);
  const auto run = projection_solve(taylor_green(0.0, g, 0.1), 0.1, 1e-3, 1000);
  const double err = (run.trajectory.slices.back() - taylor_green(1.0, g, 0.1)).max_abs();
  return {err <= 5e-3 && !run.cfl_warning, "max-norm error at T=1: " + fmt_g("%.2e", err)};
}

struct SweepFixture {
  SweepReport report;
  double seconds = 0.0;
};

const SweepFixture& nonlinear_sweep() {
  static const SweepFixture fixture = [] {
    const auto start = std::chrono::steady_clock::now();
    SweepConfig sc;
    sc.datum = taylor_green(0.0, grid2(32), 0.1);
    sc.tau = 1e-2;
    sc.base.horizon = 1.0;
    sc.base.nu = 0.1;
    sc.base.sigma = 0.25;
    sc.eps_list = {0.4, 0.2, 0.1, 0.05};
    sc.sigma_alt = 1.0;
    SweepFixture f;
    f.report = epsilon_sweep(sc);
    f.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return f;
  }();
  return fixture;
}

Outcome causal_limit() {
  const auto& r = nonlinear_sweep().report;
  std::string d;
  for (const auto& e : r.entries) d += (d.empty() ? "" : ", ") + fmt_g("%.4f", e.distance.l2h1);
  const double smallest = r.entries.back().distance.l2h1;
  return {r.trend_ok && !r.partial && smallest <= 0.05,
          "relative L2(0,0.8;H1) distances [" + d + "] for eps = 0.4..0.05, smallest " + fmt_g("%.4f", smallest) +
              ", trend " + (r.trend_ok ? "ok" : "violated")};
}

Outcome energy_estimate() {
  const auto& r = nonlinear_sweep().report;
  bool ok = true;
  double worst = 0.0;
  for (const auto& e : r.entries) {
    if (e.converged) ok = ok && !e.energy_violation;
    worst = std::max(worst, e.energy_max_ratio);
  }
  Trajectory exact;
  exact.grid = grid2(32);
  exact.tau = 1e-2;
  for (int n = 0; n <= 100; ++n) exact.slices.push_back(taylor_green(n * 1e-2, exact.grid, 0.1));
  WideParams p;
  const auto er = energy_report(exact, p);
  return {ok && er.max_ei_deviation <= 1e-3,
          "largest lhs_unif/rhs over the sweep " + fmt_g("%.6f", worst) + "; exact solution equality gap " +
              fmt_g("%.2e", er.max_ei_deviation)};
}

Outcome apriori() {
  const auto& r = nonlinear_sweep().report;
  double dt_min = 1e300, dt_max = 0.0, cv_min = 1e300, cv_max = 0.0, gap = 0.0, knorm = 0.0;
  for (const auto& e : r.entries) {
    dt_min = std::min(dt_min, e.apriori.eps_dt2);
    dt_max = std::max(dt_max, e.apriori.eps_dt2);
    cv_min = std::min(cv_min, e.apriori.eps_conv2);
    cv_max = std::max(cv_max, e.apriori.eps_conv2);
    if (e.converged) gap = std::max(gap, e.kernel_gap);
    const auto k = kernel_norms(e.epsilon);
    knorm = std::max({knorm, std::abs(k.l1 - 1.0), std::abs(k.l2 - 1.0 / std::sqrt(2 * e.epsilon))});
  }
  const double dt_ratio = dt_max / dt_min, cv_ratio = cv_max / cv_min;
  const bool ok = dt_ratio <= 2.0 && cv_ratio <= 2.0 && knorm <= 1e-10 && gap <= 1e-3;
  return {ok, "max/min of eps|d_t u|^2 " + fmt_g("%.2f", dt_ratio) + ", of eps|u.grad u|^2 " +
                  fmt_g("%.2f", cv_ratio) + " (limit 2); kernel norm error " + fmt_g("%.1e", knorm) +
                  "; kernel gap " + fmt_g("%.1e", gap)};
}

Outcome sigma_threshold() {
  WideParams p;
  bool flags = true;
  for (double s : {0.0, 0.1, 0.125}) {
    p.sigma = s;
    flags = flags && !sigma_certificate(p).valid;
  }
  p.sigma = 0.25;
  flags = flags && sigma_certificate(p).valid;
  const auto& r = nonlinear_sweep().report;
  const bool ok = flags && r.sigma_gap_small < r.eps_span;
  return {ok, std::string("certificate flags ") + (flags ? "correct" : "wrong") + "; sigma 0.25 vs 1.0 at eps=0.05: " +
                  fmt_g("%.4f", r.sigma_gap_small) + " (at eps=0.4: " + fmt_g("%.4f", r.sigma_gap_large) +
                  "), eps=0.4 vs 0.05 at sigma 0.25: " + fmt_g("%.4f", r.eps_span)};
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const GridSpec g = grid2(16);
  WideParams p;
  p.horizon = 0.5;
  auto once = [&] {
    const auto u0 = prepare_initial_datum(random_field(g, 2024, 4.0), p);
    auto [traj, rep] = minimize_global(Trajectory::constant(u0, 0.02, 25), p, MinimizeOptions{});
    const std::string text = minimize_json(rep, false).dump() + el_json(el_report(traj, p, {-3.0})).dump() +
                             energy_csv(energy_report(traj, p));
    return std::pair{traj, text};
  };
  const auto [a, ta] = once();
  const auto [b, tb] = once();
  const auto dir = std::filesystem::temp_directory_path();
  const auto pa = (dir / "wide_acceptance_a.bin").string(), pb = (dir / "wide_acceptance_b.bin").string();
  write_checkpoint(a, p, pa);
  const auto back = read_checkpoint(pa);
  write_checkpoint(back.trajectory, back.params, pb);
  const bool same_reports = ta == tb && a.slices == b.slices;
  const bool round_trip = back.trajectory.slices == a.slices && slurp(pa) == slurp(pb);
  std::filesystem::remove(pa);
  std::filesystem::remove(pb);
  return {same_reports && round_trip, std::string("repeated reports ") + (same_reports ? "identical" : "differ") +
                                          ", checkpoint round trip " + (round_trip ? "bit-exact" : "lossy")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient fidelity", gradient_fidelity},
      {"variational identities", variational_identities},
      {"constant-trajectory value", constant_trajectory},
      {"Stokes-flag oracle", stokes_oracle},
      {"reference solver accuracy", reference_accuracy},
      {"causal limit sweep", causal_limit},
      {"energy estimate", energy_estimate},
      {"a-priori bounds", apriori},
      {"sigma threshold", sigma_threshold},
      {"determinism and round trip", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("criterion %2zu %s  %s: %s (%.1f s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
