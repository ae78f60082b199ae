#pragma once

// Exact observed-data log-likelihood of the bivariate-normal selection model:
//
//   sum_{s_i=0} log Phi(-mu_i)
// + sum_{s_i=1} [ log Phi((mu_i + rho e_i) / sqrt(1 - rho^2)) - e_i^2/2 - log sigma - log sqrt(2 pi) ]
//
// with mu_i = alpha0 + w_i'alpha and e_i = (y_i - beta0 - x_i'beta) / sigma.

#include <Eigen/Dense>
#include <cmath>

#include "heckss/dataset.hpp"
#include "heckss/normal.hpp"
#include "heckss/params.hpp"

namespace heckss {

inline double missing_row_loglik(double selection_index) noexcept {
  return normal_logcdf(-selection_index);
}

inline double observed_row_loglik(double selection_index, double residual, double sigma,
                                  double rho) noexcept {
  const double e = residual / sigma;
  const double t = (selection_index + rho * e) / std::sqrt(1.0 - rho * rho);
  return normal_logcdf(t) - 0.5 * e * e - std::log(sigma) - kLogSqrt2Pi;
}

/// Per-row log-likelihood contributions.
inline Eigen::VectorXd pointwise_loglik(const NaturalParams& np, const Dataset& data) {
  const Eigen::VectorXd mu = (data.W() * np.alpha).array() + np.alpha0;
  const Eigen::VectorXd xb = (data.X() * np.beta).array() + np.beta0;
  Eigen::VectorXd out(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out[i] = data.selected(i) ? observed_row_loglik(mu[i], *data.y(i) - xb[i], np.sigma, np.rho)
                              : missing_row_loglik(mu[i]);
  }
  return out;
}

inline double log_likelihood(const NaturalParams& np, const Dataset& data) {
  np.validate();
  if (np.alpha.size() != data.q() || np.beta.size() != data.p()) {
    throw ParameterError("log_likelihood: coefficient dimensions do not match the data");
  }
  return pointwise_loglik(np, data).sum();
}

// Unconstrained coordinates used by the optimizer:
//   theta = (alpha0, alpha[q], beta0, beta[p], log sigma, atanh rho).
namespace unconstrained {

inline Eigen::Index size(Eigen::Index p, Eigen::Index q) { return p + q + 4; }

inline Eigen::VectorXd pack(const NaturalParams& np) {
  const Eigen::Index q = np.alpha.size(), p = np.beta.size();
  Eigen::VectorXd theta(size(p, q));
  theta[0] = np.alpha0;
  theta.segment(1, q) = np.alpha;
  theta[q + 1] = np.beta0;
  theta.segment(q + 2, p) = np.beta;
  theta[p + q + 2] = std::log(np.sigma);
  theta[p + q + 3] = std::atanh(np.rho);
  return theta;
}

inline NaturalParams unpack(const Eigen::VectorXd& theta, Eigen::Index p, Eigen::Index q) {
  NaturalParams np;
  np.alpha0 = theta[0];
  np.alpha = theta.segment(1, q);
  np.beta0 = theta[q + 1];
  np.beta = theta.segment(q + 2, p);
  np.sigma = std::exp(theta[p + q + 2]);
  np.rho = std::tanh(theta[p + q + 3]);
  return np;
}

}  // namespace unconstrained

/// Log-likelihood at unconstrained theta, with the analytic gradient
/// written to *grad when requested. Returns -inf if theta maps outside the
/// valid region numerically (sigma overflow, |rho| rounding to 1).
inline double loglik_unconstrained(const Eigen::VectorXd& theta, const Dataset& data,
                                   Eigen::VectorXd* grad = nullptr) {
  const Eigen::Index p = data.p(), q = data.q();
  const double log_sigma = theta[p + q + 2];
  const double sigma = std::exp(log_sigma);
  const double rho = std::tanh(theta[p + q + 3]);
  const double one_m_r2 = 1.0 - rho * rho;
  if (!(sigma > 0.0) || !std::isfinite(sigma) || !(one_m_r2 > 0.0) || !theta.allFinite()) {
    return -std::numeric_limits<double>::infinity();
  }
  const double root = std::sqrt(one_m_r2);
  const Eigen::VectorXd mu = (data.W() * theta.segment(1, q)).array() + theta[0];
  const Eigen::VectorXd xb = (data.X() * theta.segment(q + 2, p)).array() + theta[q + 1];

  // d loglik / d mu_i and d loglik / d xb_i per row, plus scalar pieces.
  Eigen::VectorXd d_mu(data.n()), d_xb(data.n());
  double total = 0.0, d_log_sigma = 0.0, d_atanh_rho = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (!data.selected(i)) {
      total += normal_logcdf(-mu[i]);
      d_mu[i] = -inverse_mills(-mu[i]);
      d_xb[i] = 0.0;
      continue;
    }
    const double e = (*data.y(i) - xb[i]) / sigma;
    const double t = (mu[i] + rho * e) / root;
    total += normal_logcdf(t) - 0.5 * e * e - log_sigma - kLogSqrt2Pi;
    const double lam = inverse_mills(t);
    d_mu[i] = lam / root;
    // de/dxb = -1/sigma
    d_xb[i] = -(lam * rho / root) / sigma + e / sigma;
    d_log_sigma += -lam * rho * e / root + e * e - 1.0;
    d_atanh_rho += lam * (e + rho * mu[i]) / root;
  }
  if (grad) {
    grad->resize(theta.size());
    (*grad)[0] = d_mu.sum();
    grad->segment(1, q) = data.W().transpose() * d_mu;
    (*grad)[q + 1] = d_xb.sum();
    grad->segment(q + 2, p) = data.X().transpose() * d_xb;
    (*grad)[p + q + 2] = d_log_sigma;
    (*grad)[p + q + 3] = d_atanh_rho;
  }
  return total;
}

}  // namespace heckss
