#include "ascr/optimizer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "ascr/error.hpp"

namespace ascr {

namespace {

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

std::vector<double> numerical_gradient(const Objective& f, std::span<const double> x, double fx, int* evaluations) {
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> g(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = std::max(1e-5, 1e-7 * std::abs(x[i]));
    point[i] = x[i] + h;
    const double up = f(point);
    point[i] = x[i] - h;
    const double down = f(point);
    point[i] = x[i];
    if (evaluations) *evaluations += 2;
    if (std::isfinite(up) && std::isfinite(down)) {
      g[i] = (up - down) / (2.0 * h);
    } else if (std::isfinite(up)) {
      g[i] = (up - fx) / h;
    } else if (std::isfinite(down)) {
      g[i] = (fx - down) / h;
    } else {
      g[i] = 0.0;
    }
  }
  return g;
}

std::vector<double> numerical_hessian(const Objective& f, std::span<const double> x, std::span<const double> gradient,
                                      int* evaluations) {
  const std::size_t n = x.size();
  std::vector<double> h(n * n, 0.0);
  std::vector<double> point(x.begin(), x.end());
  for (std::size_t i = 0; i < n; ++i) {
    const double step = 1e-3 * std::max(1.0, std::abs(x[i]));
    point[i] = x[i] + step;
    const double fp = f(point);
    if (evaluations) ++*evaluations;
    const auto gp = numerical_gradient(f, point, fp, evaluations);
    point[i] = x[i];
    for (std::size_t j = 0; j < n; ++j) h[i * n + j] = (gp[j] - gradient[j]) / step;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (h[i * n + j] + h[j * n + i]);
      h[i * n + j] = h[j * n + i] = v;
    }
  }
  return h;
}

OptimizerResult minimize_bfgs(const Objective& f, std::vector<double> x0, const OptimizerOptions& options) {
  const auto n = static_cast<Eigen::Index>(x0.size());
  const bool bounded = !options.lower.empty() || !options.upper.empty();
  if (bounded && (options.lower.size() != x0.size() || options.upper.size() != x0.size())) {
    throw std::invalid_argument("optimizer bounds must match the parameter count");
  }
  auto project = [&](Eigen::VectorXd& v) {
    if (!bounded) return;
    for (Eigen::Index i = 0; i < n; ++i) {
      v[i] = std::clamp(v[i], options.lower[static_cast<std::size_t>(i)], options.upper[static_cast<std::size_t>(i)]);
    }
  };

  OptimizerResult result;
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(x0.data(), n);
  project(x);
  auto eval = [&](const Eigen::VectorXd& v) {
    ++result.evaluations;
    const double value = f(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
    return std::isnan(value) ? std::numeric_limits<double>::infinity() : value;
  };
  auto gradient = [&](const Eigen::VectorXd& v, double fv) {
    const auto g = numerical_gradient(f, std::span<const double>(v.data(), static_cast<std::size_t>(v.size())), fv,
                                      &result.evaluations);
    Eigen::VectorXd out = Eigen::Map<const Eigen::VectorXd>(g.data(), n);
    if (bounded) {
      // drop components pushing against an active bound
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto s = static_cast<std::size_t>(i);
        if ((v[i] <= options.lower[s] && out[i] > 0.0) || (v[i] >= options.upper[s] && out[i] < 0.0)) out[i] = 0.0;
      }
    }
    return out;
  };

  double fx = eval(x);
  if (!std::isfinite(fx)) {
    throw NumericalError("objective is not finite at the start values; try different start values");
  }
  Eigen::VectorXd g = gradient(x, fx);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  bool fresh_hessian = true;
  if (options.hessian_start && n > 0) {
    const auto hv = numerical_hessian(f, std::span<const double>(x.data(), static_cast<std::size_t>(n)),
                                      std::span<const double>(g.data(), static_cast<std::size_t>(n)),
                                      &result.evaluations);
    const Eigen::MatrixXd hess = Eigen::Map<const Eigen::MatrixXd>(hv.data(), n, n);
    if (hess.allFinite()) {
      // eigenvalues made positive and bounded away from zero
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
      Eigen::VectorXd ev = es.eigenvalues().cwiseAbs();
      const double floor = std::max(1e-8, 1e-6 * ev.maxCoeff());
      for (Eigen::Index i = 0; i < n; ++i) ev[i] = 1.0 / std::max(ev[i], floor);
      h_inv = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
      fresh_hessian = false;
    }
  }
  bool small_change = false;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter + 1;
    if (small_change && inf_norm(g) < options.grad_tol) {
      result.converged = true;
      result.message = "converged";
      break;
    }
    Eigen::VectorXd dir = -h_inv * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      h_inv.setIdentity();
      fresh_hessian = true;
      dir = -g;
      slope = g.dot(dir);
      if (!(slope < 0.0)) {
        result.converged = inf_norm(g) < options.grad_tol;
        result.message = result.converged ? "converged" : "zero search direction";
        break;
      }
    }
    const double biggest = inf_norm(dir);
    double step = biggest > options.max_step ? options.max_step / biggest : 1.0;

    Eigen::VectorXd trial(n);
    double f_trial = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      trial = x + step * dir;
      project(trial);
      f_trial = eval(trial);
      if (std::isfinite(f_trial) && f_trial <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      // Near the optimum of a stiff problem the predicted decrease can fall
      // below the rounding level of f; take the step if f is unchanged within
      // that level so the gradient can still be driven down.
      const double noise = 1e-13 * std::max(1.0, std::abs(fx));
      if (std::isfinite(f_trial) && -step * slope < noise && f_trial <= fx + noise) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!fresh_hessian) {
        h_inv.setIdentity();
        fresh_hessian = true;
        continue;
      }
      result.converged = inf_norm(g) < options.grad_tol;
      result.message = result.converged ? "converged" : "line search failed";
      break;
    }

    const Eigen::VectorXd s = trial - x;
    const Eigen::VectorXd g_new = gradient(trial, f_trial);
    const Eigen::VectorXd y = g_new - g;
    small_change = std::abs(fx - f_trial) <= options.rel_tol * std::max(1.0, std::abs(f_trial));
    x = trial;
    fx = f_trial;
    g = g_new;

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh_hessian) {
        // scale the initial inverse Hessian before the first update
        h_inv *= sy / y.squaredNorm();
        fresh_hessian = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
      h_inv = (eye - rho * s * y.transpose()) * h_inv * (eye - rho * y * s.transpose()) + rho * s * s.transpose();
    }
  }
  if (result.message.empty()) {
    if (small_change && inf_norm(g) < options.grad_tol) {
      result.converged = true;
      result.message = "converged";
    } else {
      result.message = "maximum iterations reached";
    }
  }
  result.x.assign(x.data(), x.data() + n);
  result.value = fx;
  result.gradient.assign(g.data(), g.data() + n);
  return result;
}

}  // namespace ascr
