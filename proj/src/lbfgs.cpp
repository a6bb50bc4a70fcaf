#include "wide/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace wide {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

struct Pair {
  std::vector<double> s, y, hy;  // hy = H0 y without the scalar
  double rho;
};

/// Minimizer of the cubic through (a, fa, ga), (b, fb, gb), safeguarded into the bracket.
double cubic_step(double a, double fa, double ga, double b, double fb, double gb) {
  const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - ga * gb;
  double t;
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    t = b - (b - a) * (gb + d2 - d1) / (gb - ga + 2.0 * d2);
  } else {
    t = 0.5 * (a + b);
  }
  const double lo = std::min(a, b), hi = std::max(a, b);
  const double margin = 0.1 * (hi - lo);
  if (!std::isfinite(t) || t < lo + margin || t > hi - margin) t = 0.5 * (a + b);
  return t;
}

struct Trial {
  double alpha = 0.0;
  double f = 0.0;
  double dphi = 0.0;
  std::vector<double> x, g;
};

}  // namespace

LbfgsResult lbfgs_minimize(const LbfgsProblem& problem, std::vector<double> x0, const LbfgsOptions& opts) {
  const std::size_t n = x0.size();
  LbfgsResult res;
  std::vector<double> x = std::move(x0);
  std::vector<double> g(n);
  double f = problem.value_and_gradient(x, g);
  res.evaluations = 1;
  res.initial_f = f;
  auto measure = [&](std::span<const double> xx, std::span<const double> gg) {
    return problem.stationarity ? problem.stationarity(xx, gg) : norm(gg);
  };
  auto apply_h0 = [&](std::span<const double> in, std::span<double> out) {
    if (problem.precondition)
      problem.precondition(in, out);
    else
      std::copy(in.begin(), in.end(), out.begin());
  };

  std::deque<Pair> history;
  double gamma = 1.0;
  std::vector<double> d(n), q(n), r(n);
  double meas = measure(x, g);
  int iter = 0;
  bool restarted = false;
  res.status = "max_iters";

  while (true) {
    if (problem.progress) problem.progress(iter, f, meas);
    if (meas <= opts.grad_tol) {
      res.converged = true;
      res.status = "converged";
      break;
    }
    if (iter >= opts.max_iters) break;

    // Two-loop recursion with H0 = gamma * M.
    std::copy(g.begin(), g.end(), q.begin());
    std::vector<double> alpha(history.size());
    for (std::size_t k = history.size(); k-- > 0;) {
      alpha[k] = history[k].rho * dot(history[k].s, q);
      for (std::size_t i = 0; i < n; ++i) q[i] -= alpha[k] * history[k].y[i];
    }
    apply_h0(q, r);
    for (auto& v : r) v *= gamma;
    for (std::size_t k = 0; k < history.size(); ++k) {
      const double beta = history[k].rho * dot(history[k].y, r);
      for (std::size_t i = 0; i < n; ++i) r[i] += (alpha[k] - beta) * history[k].s[i];
    }
    for (std::size_t i = 0; i < n; ++i) d[i] = -r[i];
    if (problem.project) problem.project(d);

    double dphi0 = dot(g, d);
    if (!(dphi0 < 0.0)) {
      // Not a descent direction: fall back to the preconditioned gradient.
      history.clear();
      apply_h0(g, d);
      for (auto& v : d) v = -v;
      if (problem.project) problem.project(d);
      dphi0 = dot(g, d);
      if (!(dphi0 < 0.0)) {
        res.status = "no_descent_direction";
        break;
      }
    }

    // Strong Wolfe line search.
    const double f0 = f;
    auto evaluate = [&](double a) {
      Trial t;
      t.alpha = a;
      t.x.resize(n);
      t.g.resize(n);
      for (std::size_t i = 0; i < n; ++i) t.x[i] = x[i] + a * d[i];
      t.f = problem.value_and_gradient(t.x, t.g);
      t.dphi = dot(t.g, d);
      ++res.evaluations;
      return t;
    };
    auto armijo = [&](const Trial& t) { return t.f <= f0 + opts.c1 * t.alpha * dphi0; };
    auto curvature = [&](const Trial& t) { return std::abs(t.dphi) <= -opts.c2 * dphi0; };
    // Accepted when decrease cannot be resolved in floating point.
    auto approx_wolfe = [&](const Trial& t) {
      return t.f <= f0 + opts.f_noise * std::abs(f0) && t.dphi >= opts.c2 * dphi0 &&
             t.dphi <= (2.0 * opts.c1 - 1.0) * dphi0;
    };

    double a0 = 1.0;
    if (history.empty() && !problem.precondition) a0 = std::min(1.0, 1.0 / std::max(norm(d), 1e-300));
    Trial prev{0.0, f0, dphi0, x, g};
    Trial best = prev;
    Trial accepted;
    bool found = false;
    int evals = 0;
    double a = a0;
    Trial lo, hi;
    bool zoom = false;
    while (evals < opts.max_line_evals) {
      Trial t = evaluate(a);
      ++evals;
      if (t.f < best.f) best = t;
      if (!std::isfinite(t.f)) {
        hi = t;
        lo = prev;
        zoom = true;
        break;
      }
      if ((armijo(t) && curvature(t)) || approx_wolfe(t)) {
        accepted = std::move(t);
        found = true;
        break;
      }
      if (!armijo(t) || (evals > 1 && t.f >= prev.f)) {
        lo = prev;
        hi = std::move(t);
        zoom = true;
        break;
      }
      if (t.dphi >= 0.0) {
        lo = std::move(t);
        hi = prev;
        zoom = true;
        break;
      }
      prev = std::move(t);
      a = std::min(4.0 * a, 1e8);
    }
    while (zoom && !found && evals < opts.max_line_evals) {
      double at;
      if (std::isfinite(hi.f))
        at = cubic_step(lo.alpha, lo.f, lo.dphi, hi.alpha, hi.f, hi.dphi);
      else
        at = 0.5 * (lo.alpha + hi.alpha);
      if (std::abs(hi.alpha - lo.alpha) < 1e-16 * std::max(1.0, lo.alpha)) break;
      Trial t = evaluate(at);
      ++evals;
      if (t.f < best.f) best = t;
      if ((armijo(t) && curvature(t)) || approx_wolfe(t)) {
        accepted = std::move(t);
        found = true;
        break;
      }
      if (!std::isfinite(t.f) || !armijo(t) || t.f >= lo.f) {
        hi = std::move(t);
      } else {
        if (t.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = std::move(t);
      }
    }
    if (!found && best.alpha > 0.0 && best.f < f0) {
      accepted = best;
      found = true;
    }
    if (!found) {
      if (!restarted && !history.empty()) {
        history.clear();
        gamma = 1.0;
        restarted = true;
        continue;
      }
      res.status = "line_search_failed";
      break;
    }
    restarted = false;

    Pair p;
    p.s.resize(n);
    p.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      p.s[i] = accepted.x[i] - x[i];
      p.y[i] = accepted.g[i] - g[i];
    }
    const double sy = dot(p.s, p.y);
    x = std::move(accepted.x);
    g = std::move(accepted.g);
    f = accepted.f;
    ++iter;
    meas = measure(x, g);
    if (sy > 1e-300) {
      p.hy.resize(n);
      apply_h0(p.y, p.hy);
      const double yhy = dot(p.y, p.hy);
      if (yhy > 0.0) gamma = sy / yhy;
      p.rho = 1.0 / sy;
      p.hy.clear();
      history.push_back(std::move(p));
      if (static_cast<int>(history.size()) > opts.memory) history.pop_front();
    }
  }
  res.x = std::move(x);
  res.f = f;
  res.measure = meas;
  res.iterations = iter;
  return res;
}

}  // namespace wide
