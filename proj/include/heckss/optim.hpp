#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>

namespace heckss {

// Objective for minimization: returns f(x) and writes the gradient.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct BfgsOptions {
  int max_iterations = 1000;
  double gradient_tolerance = 1e-8;  // max-norm
  double relative_f_tolerance = 1e-15;
  int stall_limit = 5;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd gradient;
  int iterations = 0;
  bool gradient_converged = false;
};

/// BFGS on the inverse Hessian with a backtracking Armijo line search.
/// Updates that would break positive definiteness (s'y <= 0) are skipped.
inline BfgsResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& opt = {}) {
  BfgsResult res;
  const Eigen::Index dim = x0.size();
  res.x = std::move(x0);
  res.value = f(res.x, res.gradient);
  if (!std::isfinite(res.value)) return res;

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(dim, dim);
  // Scale the first step so it moves roughly one unit.
  const double g0 = res.gradient.lpNorm<Eigen::Infinity>();
  if (g0 > 1.0) H /= g0;

  Eigen::VectorXd trial_grad(dim);
  int stalls = 0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    res.iterations = it + 1;
    if (res.gradient.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance) {
      res.gradient_converged = true;
      return res;
    }
    Eigen::VectorXd dir = -H * res.gradient;
    double slope = dir.dot(res.gradient);
    if (!(slope < 0.0)) {
      H.setIdentity();
      dir = -res.gradient;
      slope = -res.gradient.squaredNorm();
    }
    double step = 1.0, trial_value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd trial;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      trial = res.x + step * dir;
      trial_value = f(trial, trial_grad);
      if (std::isfinite(trial_value) && trial_value <= res.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (++stalls >= opt.stall_limit) break;
      H.setIdentity();
      continue;
    }
    const Eigen::VectorXd s = trial - res.x;
    const Eigen::VectorXd y = trial_grad - res.gradient;
    const double improvement = res.value - trial_value;
    res.x = trial;
    res.gradient = trial_grad;
    const double old_value = res.value;
    res.value = trial_value;

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (it == 0) H *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = H * y;
      H += (rho * rho * y.dot(Hy) + rho) * s * s.transpose() - rho * (Hy * s.transpose() + s * Hy.transpose());
    }
    if (improvement <= opt.relative_f_tolerance * (1.0 + std::fabs(old_value))) {
      if (++stalls >= opt.stall_limit) break;
    } else {
      stalls = 0;
    }
  }
  res.gradient_converged = res.gradient.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance;
  return res;
}

/// Hessian by central differences of an analytic gradient, symmetrized.
/// Step per coordinate: 1e-5 * (1 + |x_j|).
inline Eigen::MatrixXd hessian_from_gradient(const Objective& f, const Eigen::VectorXd& x) {
  const Eigen::Index dim = x.size();
  Eigen::MatrixXd H(dim, dim);
  Eigen::VectorXd gp(dim), gm(dim), xp = x, xm = x;
  for (Eigen::Index j = 0; j < dim; ++j) {
    const double h = 1e-5 * (1.0 + std::fabs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    f(xp, gp);
    f(xm, gm);
    H.col(j) = (gp - gm) / (2.0 * h);
    xp[j] = xm[j] = x[j];
  }
  return 0.5 * (H + H.transpose());
}

}  // namespace heckss
