#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace wide {

struct LbfgsOptions {
  int max_iters = 1000;
  double grad_tol = 1e-6;
  int memory = 10;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_evals = 40;
  /// Relative objective noise tolerated by the approximate Wolfe test.
  double f_noise = 1e-15;
};

/// Callbacks describing a smooth minimization problem on R^n. All vectors
/// handed to the callbacks have the problem dimension.
struct LbfgsProblem {
  std::function<double(std::span<const double> x, std::span<double> g)> value_and_gradient;
  /// Optional linear map applied in place to search directions.
  std::function<void(std::span<double> v)> project;
  /// Optional symmetric positive definite approximation of the inverse Hessian.
  std::function<void(std::span<const double> in, std::span<double> out)> precondition;
  /// Convergence measure; defaults to the Euclidean gradient norm.
  std::function<double(std::span<const double> x, std::span<const double> g)> stationarity;
  std::function<void(int iter, double f, double measure)> progress;
};

struct LbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  double initial_f = 0.0;
  double measure = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string status;
};

LbfgsResult lbfgs_minimize(const LbfgsProblem& problem, std::vector<double> x0, const LbfgsOptions& opts);

}  // namespace wide
