#pragma once

// Frequentist fitters: probit, Heckman two-step and full maximum likelihood.
// They supply starting values for the Gibbs sampler and drive the stepwise
// baseline.

#include <Eigen/Dense>
#include <cmath>
#include <algorithm>
#include <optional>
#include <span>

#include "heckss/dataset.hpp"
#include "heckss/errors.hpp"
#include "heckss/likelihood.hpp"
#include "heckss/normal.hpp"
#include "heckss/optim.hpp"
#include "heckss/params.hpp"

namespace heckss {

struct FitResult {
  NaturalParams params;
  double loglik = -std::numeric_limits<double>::infinity();
  bool converged = false;
  // Standard errors on the natural scale, ordered
  // (alpha0, alpha[q], beta0, beta[p], sigma, rho).
  std::optional<Eigen::VectorXd> std_errors;
  int iterations = 0;
  // Max-norm of the log-likelihood gradient in the unconstrained coordinates.
  double gradient_norm = std::numeric_limits<double>::infinity();
};

struct ProbitFit {
  Eigen::VectorXd coef;  // (intercept, slopes)
  double loglik = -std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
};

/// Probit MLE of s on (1, W) by Newton-Raphson with step halving.
inline ProbitFit probit_fit(const Eigen::MatrixXd& W, std::span<const std::uint8_t> s,
                            int max_iterations = 100) {
  const Eigen::Index n = W.rows(), k = W.cols() + 1;
  Eigen::MatrixXd D(n, k);
  D.col(0).setOnes();
  D.rightCols(k - 1) = W;
  auto evaluate = [&](const Eigen::VectorXd& b, Eigen::VectorXd* g, Eigen::MatrixXd* H) {
    const Eigen::VectorXd eta = D * b;
    double ll = 0.0;
    Eigen::VectorXd gi(n), hi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (s[static_cast<std::size_t>(i)]) {
        ll += normal_logcdf(eta[i]);
        gi[i] = inverse_mills(eta[i]);
      } else {
        ll += normal_logcdf(-eta[i]);
        gi[i] = -inverse_mills(-eta[i]);
      }
      hi[i] = gi[i] * (gi[i] + eta[i]);
    }
    if (g) *g = D.transpose() * gi;
    if (H) *H = -(D.transpose() * hi.asDiagonal() * D);
    return ll;
  };

  ProbitFit fit;
  fit.coef = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
  fit.loglik = evaluate(fit.coef, &g, &H);
  for (int it = 0; it < max_iterations; ++it) {
    fit.iterations = it + 1;
    if (g.lpNorm<Eigen::Infinity>() < 1e-9) {
      fit.converged = true;
      break;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(-H);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
    const Eigen::VectorXd step = ldlt.solve(g);
    double t = 1.0;
    bool moved = false;
    for (int h = 0; h < 40; ++h, t *= 0.5) {
      const Eigen::VectorXd trial = fit.coef + t * step;
      const double ll = evaluate(trial, nullptr, nullptr);
      if (std::isfinite(ll) && ll >= fit.loglik - 1e-12 * std::fabs(fit.loglik)) {
        fit.coef = trial;
        fit.loglik = evaluate(fit.coef, &g, &H);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (!fit.converged) fit.converged = g.lpNorm<Eigen::Infinity>() < 1e-6;
  return fit;
}

struct TwoStepFit : FitResult {
  // Coefficient on the inverse Mills ratio column, an estimate of rho*sigma.
  double mills_coefficient = 0.0;
  // Stage-two least-squares coefficients (intercept, beta[p], mills).
  Eigen::VectorXd stage_two;
};

/// Heckman two-step: probit for (alpha0, alpha), then least squares of the
/// observed y on (1, x, lambda(alpha0 + w'alpha)). sigma^2 uses the usual
/// truncation correction; rho = mills / sigma clamped to [-0.99, 0.99].
inline TwoStepFit two_step_fit(const Dataset& data) {
  data.require_fittable();
  const ProbitFit probit = probit_fit(data.W(), data.s());
  TwoStepFit fit;
  fit.iterations = probit.iterations;
  fit.converged = probit.converged;
  if (!probit.coef.allFinite()) throw NumericalError("two-step: probit stage diverged");

  const auto obs = data.observed();
  const Eigen::Index n1 = data.n_observed(), p = data.p();
  Eigen::MatrixXd Z(n1, p + 2);
  Eigen::VectorXd y1 = data.observed_y();
  Eigen::VectorXd mu1(n1), lam(n1);
  for (Eigen::Index k = 0; k < n1; ++k) {
    const Eigen::Index i = obs[static_cast<std::size_t>(k)];
    mu1[k] = probit.coef[0] + data.W().row(i).dot(probit.coef.tail(data.q()));
    lam[k] = inverse_mills(mu1[k]);
    Z(k, 0) = 1.0;
    Z.row(k).segment(1, p) = data.X().row(i);
    Z(k, p + 1) = lam[k];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
  qr.setThreshold(1e-9);
  if (qr.rank() < Z.cols()) throw NumericalError("two-step: outcome design with Mills column is singular");
  fit.stage_two = qr.solve(y1);
  fit.mills_coefficient = fit.stage_two[p + 1];

  const double rss = (y1 - Z * fit.stage_two).squaredNorm();
  const double delta_bar = (lam.array() * (lam.array() + mu1.array())).mean();
  const double sigma2 = rss / static_cast<double>(n1) + fit.mills_coefficient * fit.mills_coefficient * delta_bar;

  NaturalParams& np = fit.params;
  np.alpha0 = probit.coef[0];
  np.alpha = probit.coef.tail(data.q());
  np.beta0 = fit.stage_two[0];
  np.beta = fit.stage_two.segment(1, p);
  np.sigma = std::sqrt(std::max(sigma2, 1e-12));
  np.rho = std::clamp(fit.mills_coefficient / np.sigma, -0.99, 0.99);
  fit.loglik = log_likelihood(np, data);
  return fit;
}

struct MleOptions {
  // Hold rho at this value instead of estimating it.
  std::optional<double> fixed_rho;
  int max_iterations = 1000;
};

namespace detail {

inline NaturalParams null_start(const Dataset& data) {
  return {0.0, Eigen::VectorXd::Zero(data.q()), 0.0, Eigen::VectorXd::Zero(data.p()), 1.0, 0.0};
}


// Probit for the selection equation, least squares on the observed rows
// for the outcome equation, rho = 0.1 signed by the residual/Mills score.
inline NaturalParams moment_start(const Dataset& data) {
  NaturalParams np = null_start(data);
  const ProbitFit probit = probit_fit(data.W(), data.s());
  if (probit.coef.allFinite()) {
    np.alpha0 = probit.coef[0];
    np.alpha = probit.coef.tail(data.q());
  }
  const auto obs = data.observed();
  const Eigen::Index n1 = data.n_observed(), p = data.p();
  Eigen::MatrixXd Z(n1, p + 1);
  const Eigen::VectorXd y1 = data.observed_y();
  for (Eigen::Index k = 0; k < n1; ++k) {
    Z(k, 0) = 1.0;
    Z.row(k).tail(p) = data.X().row(obs[static_cast<std::size_t>(k)]);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p + 1);
  if (qr.rank() == Z.cols()) {
    b = qr.solve(y1);
  } else {
    b[0] = y1.mean();
  }
  np.beta0 = b[0];
  np.beta = b.tail(p);
  const double rss = (y1 - Z * b).squaredNorm();
  np.sigma = std::sqrt(std::max(rss / static_cast<double>(std::max<Eigen::Index>(n1, 1)), 1e-6));
  const Eigen::VectorXd e = y1 - Z * b;
  double score = 0.0;
  for (Eigen::Index k = 0; k < n1; ++k) {
    const auto i = obs[static_cast<std::size_t>(k)];
    score += inverse_mills(np.alpha0 + data.W().row(i).dot(np.alpha)) * e[k];
  }
  np.rho = score < 0.0 ? -0.1 : 0.1;
  return np;
}
}  // namespace detail

namespace detail {

inline FitResult mle_from(const Dataset& data, NaturalParams start, const MleOptions& options) {
  const Eigen::Index p = data.p(), q = data.q();
  const Eigen::Index full_dim = unconstrained::size(p, q);
  if (options.fixed_rho) start.rho = *options.fixed_rho;
  if (std::fabs(start.rho) > 0.95 && !options.fixed_rho) start.rho = std::copysign(0.95, start.rho);

  const Eigen::VectorXd full0 = unconstrained::pack(start);
  const Eigen::Index dim = options.fixed_rho ? full_dim - 1 : full_dim;
  auto expand = [&](const Eigen::VectorXd& x) {
    if (!options.fixed_rho) return x;
    Eigen::VectorXd full(full_dim);
    full.head(dim) = x;
    full[full_dim - 1] = std::atanh(*options.fixed_rho);
    return full;
  };
  // Negative log-likelihood for minimization.
  Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    Eigen::VectorXd full_grad;
    const double ll = loglik_unconstrained(expand(x), data, &full_grad);
    if (!std::isfinite(ll)) {
      g = Eigen::VectorXd::Zero(dim);
      return std::numeric_limits<double>::infinity();
    }
    g = -full_grad.head(dim);
    return -ll;
  };

  BfgsOptions bopt;
  bopt.max_iterations = options.max_iterations;
  bopt.gradient_tolerance = 1e-7;
  BfgsResult br = minimize_bfgs(objective, full0.head(dim), bopt);

  FitResult fit;
  fit.iterations = br.iterations;
  Eigen::VectorXd x = br.x;
  double value = br.value;
  Eigen::VectorXd g = br.gradient;
  Eigen::MatrixXd H;
  // Newton polishing; H is the Hessian of the negative log-likelihood.
  for (int it = 0; it < 25 && std::isfinite(value); ++it) {
    if (g.lpNorm<Eigen::Infinity>() < 1e-9) break;
    H = hessian_from_gradient(objective, x);
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) break;
    const Eigen::VectorXd step = -llt.solve(g);
    Eigen::VectorXd trial_g(dim);
    bool moved = false;
    double t = 1.0;
    for (int h = 0; h < 30; ++h, t *= 0.5) {
      const Eigen::VectorXd trial = x + t * step;
      const double tv = objective(trial, trial_g);
      if (std::isfinite(tv) && (tv < value || trial_g.lpNorm<Eigen::Infinity>() < g.lpNorm<Eigen::Infinity>()) &&
          tv <= value + 1e-10 * (1.0 + std::fabs(value))) {
        x = trial;
        value = tv;
        g = trial_g;
        moved = true;
        break;
      }
    }
    ++fit.iterations;
    if (!moved) break;
  }

  const Eigen::VectorXd full = expand(x);
  fit.params = unconstrained::unpack(full, p, q);
  fit.loglik = std::isfinite(value) ? -value : -std::numeric_limits<double>::infinity();
  fit.gradient_norm = std::isfinite(value) ? g.lpNorm<Eigen::Infinity>() : std::numeric_limits<double>::infinity();

  bool info_pd = false;
  if (std::isfinite(value)) {
    H = hessian_from_gradient(objective, x);
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    bool well_conditioned = false;
    if (H.allFinite()) {
      const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H, Eigen::EigenvaluesOnly).eigenvalues();
      well_conditioned = eig.minCoeff() > 1e-10 * eig.cwiseAbs().maxCoeff();
    }
    if (llt.info() == Eigen::Success && well_conditioned) {
      info_pd = true;
      const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
      Eigen::VectorXd se = Eigen::VectorXd::Zero(full_dim);
      se.head(dim) = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
      for (Eigen::Index j = 0; j < dim; ++j) {
        if (!(cov(j, j) > 0.0)) se[j] = std::numeric_limits<double>::quiet_NaN();
      }
      // Delta method back to sigma and rho.
      se[p + q + 2] *= fit.params.sigma;
      se[p + q + 3] *= (1.0 - fit.params.rho * fit.params.rho);
      fit.std_errors = se;
    }
  }
  fit.converged = info_pd && fit.gradient_norm < 1e-6 && fit.std_errors && fit.std_errors->allFinite() &&
                  std::fabs(fit.params.rho) < 1.0 && std::isfinite(fit.loglik);
  return fit;
}

}  // namespace detail

/// Full maximum likelihood. BFGS on the unconstrained coordinates
/// (coefficients, log sigma, atanh rho) with analytic gradients, then Newton
/// polishing with a Hessian differenced from the gradient.
///
/// A valid `init` is tried first and returned if it converges. Otherwise
/// every start (two-step, moment starts at three values of rho, null) is
/// run and the converged fit with the highest log-likelihood is returned,
/// else the fit with the highest log-likelihood.
///
/// converged = gradient max-norm < 1e-6, observed information positive
/// definite with eigenvalue ratio above 1e-10, and every standard error finite.
inline FitResult mle_fit(const Dataset& data, std::optional<NaturalParams> init = std::nullopt,
                         const MleOptions& options = {}) {
  data.require_fittable();
  const Eigen::Index p = data.p(), q = data.q();
  auto start_loglik = [&](const NaturalParams& np) {
    try {
      np.validate();
      const double ll = log_likelihood(np, data);
      return std::isfinite(ll) ? ll : -std::numeric_limits<double>::infinity();
    } catch (const ParameterError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  if (init && init->alpha.size() == q && init->beta.size() == p &&
      std::isfinite(start_loglik(*init))) {
    FitResult fit = detail::mle_from(data, *init, options);
    if (fit.converged) return fit;
  }
  std::vector<NaturalParams> starts;
  try {
    auto ts = two_step_fit(data);
    if (std::isfinite(start_loglik(ts.params))) starts.push_back(ts.params);
  } catch (const std::exception&) {
  }
  try {
    NaturalParams ms = detail::moment_start(data);
    for (double rho : {ms.rho, -0.7, 0.7}) {
      ms.rho = rho;
      if (std::isfinite(start_loglik(ms))) starts.push_back(ms);
    }
  } catch (const std::exception&) {
  }
  starts.push_back(detail::null_start(data));

  FitResult best, best_converged;
  for (const auto& start : starts) {
    FitResult fit = detail::mle_from(data, start, options);
    if (fit.converged && !(best_converged.converged && best_converged.loglik >= fit.loglik)) best_converged = fit;
    if (!(best.loglik >= fit.loglik)) best = std::move(fit);
  }
  return best_converged.converged ? best_converged : best;
}

/// Two-sided Wald p-values for the slope coefficients of a converged fit.
/// Returns (selection p-values[q], outcome p-values[p]).
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> wald_pvalues(const FitResult& fit) {
  if (!fit.std_errors) throw ParameterError("wald_pvalues: fit has no standard errors");
  const Eigen::Index q = fit.params.alpha.size(), p = fit.params.beta.size();
  const Eigen::VectorXd& se = *fit.std_errors;
  Eigen::VectorXd ps(q), po(p);
  for (Eigen::Index k = 0; k < q; ++k) ps[k] = 2.0 * normal_cdf(-std::fabs(fit.params.alpha[k] / se[1 + k]));
  for (Eigen::Index j = 0; j < p; ++j) po[j] = 2.0 * normal_cdf(-std::fabs(fit.params.beta[j] / se[q + 2 + j]));
  return {ps, po};
}

}  // namespace heckss
