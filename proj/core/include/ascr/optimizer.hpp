#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ascr {

using Objective = std::function<double(std::span<const double>)>;

struct OptimizerOptions {
  int max_iterations = 200;
  double rel_tol = 1e-8;    // relative change of the objective between iterations
  double grad_tol = 1e-4;   // infinity norm of the gradient
  double max_step = 3.0;    // largest change of any coordinate in one line search
  // start from the inverse of a finite-difference Hessian (2 n^2 extra
  // evaluations) instead of a scaled identity
  bool hessian_start = true;
  std::vector<double> lower;  // optional box bounds, empty for none
  std::vector<double> upper;
};

struct OptimizerResult {
  std::vector<double> x;
  double value = 0.0;
  std::vector<double> gradient;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
};

/// Central-difference gradient with per-coordinate step max(1e-5, 1e-7 |x_i|).
/// Falls back to a one-sided difference when one side is not finite.
std::vector<double> numerical_gradient(const Objective& f, std::span<const double> x, double fx,
                                       int* evaluations = nullptr);

/// Forward differences of numerical gradients, symmetrized.
std::vector<double> numerical_hessian(const Objective& f, std::span<const double> x, std::span<const double> gradient,
                                      int* evaluations = nullptr);

/// Minimizes f by BFGS with numerical gradients and a backtracking line
/// search. Non-finite objective values are treated as infeasible. Bounds, if
/// given, are enforced by projection.
OptimizerResult minimize_bfgs(const Objective& f, std::vector<double> x0, const OptimizerOptions& options = {});

}  // namespace ascr
