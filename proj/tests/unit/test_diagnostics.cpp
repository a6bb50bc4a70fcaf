#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "wide/diagnostics.hpp"
#include "wide/reference.hpp"

using namespace wide;
using namespace testsupport;

namespace {

Trajectory exact_tg(const GridSpec& g, double nu, double tau, int steps) {
  Trajectory t;
  t.grid = g;
  t.tau = tau;
  for (int n = 0; n <= steps; ++n) t.slices.push_back(taylor_green(n * tau, g, nu));
  return t;
}

SweepConfig small_sweep(bool convection) {
  SweepConfig c;
  c.datum = taylor_green(0.0, grid2(16), 0.1);
  c.tau = 0.02;
  c.base.horizon = 1.0;
  c.base.convection = convection;
  c.eps_list = {0.2, 0.1};
  c.sigma_alt.reset();
  return c;
}

}  // namespace

TEST_CASE("energy report on the exact taylor-green trajectory") {
  WideParams p;
  p.epsilon = 0.1;
  const auto t = exact_tg(grid2(32), 0.1, 1e-2, 100);
  const auto r = energy_report(t, p);
  CHECK(r.rhs == doctest::Approx(2 * pi * pi).epsilon(1e-13));
  CHECK(r.max_ei_deviation <= 1e-3);
  for (double s : r.slack_ei) CHECK(std::abs(s) <= 1e-3 * r.rhs);
  CHECK_FALSE(r.violation);
  for (std::size_t n = 0; n < r.times.size(); ++n) {
    CHECK(r.lhs_unif[n] <= r.lhs_ei[n] + 1e-12);
    if (n > 0) CHECK(r.lhs_ei[n] - r.energy[n] >= r.lhs_ei[n - 1] - r.energy[n - 1]);
    CHECK(r.energy[n] == doctest::Approx(2 * pi * pi * std::exp(-0.4 * r.times[n])).epsilon(1e-12));
  }
  auto pi_rule = p;
  pi_rule.quadrature = QuadratureRule::interval;
  CHECK(energy_report(t, pi_rule).max_ei_deviation <= 1e-3);
}

TEST_CASE("energy report of zero and growing trajectories") {
  WideParams p;
  p.horizon = 0.2;
  const auto z = energy_report(Trajectory::constant(VelocityField(grid2(16)), 0.02, 10), p);
  CHECK(z.rhs == 0.0);
  CHECK_FALSE(z.violation);
  for (double v : z.lhs_unif) CHECK(v == 0.0);
  for (double v : z.lhs_ei) CHECK(v == 0.0);

  auto grow = Trajectory::constant(taylor_green(0, grid2(16), 0.1), 0.02, 10);
  for (int n = 1; n <= 10; ++n) grow.slices[n] *= 1.0 + 0.05 * n;
  const auto r = energy_report(grow, p);
  CHECK(r.violation);
  // Probes stop at 0.8 T: growth confined to the last slices is not flagged.
  auto late = Trajectory::constant(taylor_green(0, grid2(16), 0.1), 0.02, 10);
  late.slices[10] *= 2.0;
  CHECK_FALSE(energy_report(late, p).violation);
}

TEST_CASE("energy inequality at a converged minimizer") {
  WideParams p;
  p.epsilon = 0.1;
  p.sigma = 0.25;
  MinimizeOptions o;
  const auto [traj, rep] = minimize_global(Trajectory::constant(taylor_green(0, grid2(32), 0.1), 1e-2, 100), p, o);
  REQUIRE(rep.converged);
  const auto r = energy_report(traj, p);
  CHECK_FALSE(r.violation);
  CHECK(r.max_unif_ratio <= 1.0 + 1e-12);
}

TEST_CASE("a-priori quantities") {
  WideParams p;
  p.horizon = 0.2;
  const auto z = apriori_bounds(Trajectory::constant(VelocityField(grid2(16)), 0.02, 10), p);
  CHECK(z.eps_dt2 == 0.0);
  CHECK(z.eps_conv2 == 0.0);
  CHECK(z.dt_dual == 0.0);
  CHECK(z.conv_dual == 0.0);

  p.epsilon = 0.3;
  const auto tg = Trajectory::constant(taylor_green(0, grid2(32), 0.1), 0.02, 10);
  const auto b = apriori_bounds(tg, p);
  CHECK(b.eps_dt2 == 0.0);
  CHECK(b.eps_conv2 == doctest::Approx(0.3 * 0.2 * pi * pi).epsilon(1e-12));
  CHECK(b.conv_dual < 1e-13);
  CHECK(b.eps_conv2_ratio == doctest::Approx(b.eps_conv2 / (2 * pi * pi)).epsilon(1e-12));

  // |P(T[u.grad u])|_{H^{-s}} <= C_s |u| |grad u| with C_s^2 = L^{-d} sum_k (1+|k|^2)^{-s}
  // over retained modes, since the grid L1 norm bounds every coefficient.
  const auto g = grid2(32);
  Trajectory r;
  r.grid = g;
  r.tau = 0.05;
  for (int n = 0; n <= 4; ++n) r.slices.push_back(random_field(g, 70 + n, 10.0));
  const double s = 3.0;
  double cs2 = 0.0;
  const int kc = g.dealias_cutoff();
  for (int a = -kc; a <= kc; ++a)
    for (int c = -kc; c <= kc; ++c) cs2 += std::pow(1.0 + a * a + c * c, -s);
  cs2 /= 4 * pi * pi;
  const auto rb = apriori_bounds(r, p, {-s});
  CHECK(rb.conv_shape > 0.0);
  CHECK(rb.conv_shape <= std::sqrt(cs2));
}

TEST_CASE("sigma certificate") {
  WideParams p;
  p.sigma = 0.25;
  p.nu = 0.1;
  auto c = sigma_certificate(p);
  CHECK(c.valid);
  CHECK(c.c == doctest::Approx(0.1 * (1 - std::exp(-1.0))).epsilon(1e-15));
  CHECK(c.c == doctest::Approx(0.06321).epsilon(1e-4));
  p.sigma = 0.125;
  CHECK_FALSE(sigma_certificate(p).valid);
  p.sigma = 0.1;
  CHECK_FALSE(sigma_certificate(p).valid);
  p.sigma = 10.0;
  p.nu = 2.0;
  c = sigma_certificate(p);
  CHECK(c.valid);
  CHECK(c.c == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-15));
  p.nu = 0.0;
  CHECK_FALSE(sigma_certificate(p).valid);
}

TEST_CASE("trajectory distance") {
  const auto t = exact_tg(grid2(16), 0.1, 0.1, 10);
  const auto d0 = trajectory_distance(t, t);
  CHECK(d0.l2h1 == 0.0);
  CHECK(d0.cl2 == 0.0);
  auto s = t;
  for (auto& x : s.slices) x *= 1.1;
  const auto d = trajectory_distance(s, t);
  CHECK(d.l2h1 == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(d.cl2 == doctest::Approx(0.1).epsilon(1e-12));
  const auto u = exact_tg(grid2(16), 0.1, 0.1, 9);
  CHECK_THROWS_AS(trajectory_distance(u, t), StructuralError);
}

TEST_CASE("single-eps sweep reproduces minimize_global") {
  auto c = small_sweep(true);
  c.eps_list = {0.1};
  c.keep_trajectories = true;
  const auto r = epsilon_sweep(c);
  REQUIRE(r.entries.size() == 1);
  WideParams p = c.base;
  p.epsilon = 0.1;
  const auto [traj, rep] = minimize_global(Trajectory::constant(prepare_initial_datum(c.datum, p), c.tau, 50), p, c.optimizer);
  CHECK(r.entries[0].breakdown.total == rep.breakdown.total);
  CHECK(r.entries[0].iterations == rep.iterations);
  CHECK(r.entries[0].trajectory->slices == traj.slices);
  CHECK(r.ratios.empty());
  CHECK(r.trend_ok);
  CHECK_FALSE(r.partial);
}

TEST_CASE("stokes-flag sweep converges at first order") {
  auto c = small_sweep(false);
  c.datum = leray_project(random_field(grid2(16), 5, 4.0));
  c.eps_list = {0.4, 0.2, 0.1, 0.05};
  const auto r = epsilon_sweep(c);
  REQUIRE(r.ratios.size() == 3);
  for (std::size_t k = 1; k < 3; ++k) {
    CHECK(r.ratios[k] >= 0.4);
    CHECK(r.ratios[k] <= 0.7);
  }
  CHECK(r.trend_ok);
  for (const auto& e : r.entries) CHECK(e.apriori.eps_conv2 == 0.0);
}

TEST_CASE("sweep validation, partial runs and worker independence") {
  auto c = small_sweep(true);
  c.eps_list = {0.1, 0.2};
  CHECK_THROWS_AS(epsilon_sweep(c), ConfigError);
  c.eps_list = {0.2, 0.01};
  CHECK_THROWS_AS(epsilon_sweep(c), ConfigError);
  c.eps_list = {0.2, 0.1};
  c.tau = 0.03;
  CHECK_THROWS_AS(epsilon_sweep(c), ConfigError);
  c.tau = 0.02;
  c.workers = 0;
  CHECK_THROWS_AS(epsilon_sweep(c), ConfigError);

  c.workers = 1;
  c.optimizer.max_iters = 1;
  const auto partial = epsilon_sweep(c);
  CHECK(partial.partial);
  CHECK(partial.failed_eps == std::vector<double>{0.2, 0.1});

  c.optimizer.max_iters = 2000;
  c.sigma_alt = 1.0;
  const auto one = epsilon_sweep(c);
  c.workers = 3;
  const auto three = epsilon_sweep(c);
  REQUIRE(one.sigma_entries.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(one.entries[k].breakdown.total == three.entries[k].breakdown.total);
    CHECK(one.entries[k].distance.l2h1 == three.entries[k].distance.l2h1);
  }
  CHECK(one.sigma_gap_small == three.sigma_gap_small);
  CHECK(one.sigma_gap_small < one.sigma_gap_large);
}
