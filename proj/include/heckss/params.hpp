#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "heckss/errors.hpp"

namespace heckss {

/// Parameters on the natural scale: outcome error sd sigma and error
/// correlation rho.
struct NaturalParams {
  double alpha0 = 0.0;
  Eigen::VectorXd alpha;
  double beta0 = 0.0;
  Eigen::VectorXd beta;
  double sigma = 1.0;
  double rho = 0.0;

  void validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("params: sigma must be > 0");
    if (!(std::fabs(rho) < 1.0)) throw ParameterError("params: |rho| must be < 1");
  }
};

/// Working parametrization of the Gibbs sampler:
/// sigma_tilde_sq = sigma^2 (1 - rho^2), rho_tilde = rho * sigma.
struct WorkingParams {
  double alpha0 = 0.0;
  Eigen::VectorXd alpha;
  double beta0 = 0.0;
  Eigen::VectorXd beta;
  double rho_tilde = 0.0;
  double sigma_tilde_sq = 1.0;
};

inline WorkingParams to_working(const NaturalParams& np) {
  np.validate();
  return {np.alpha0, np.alpha, np.beta0, np.beta, np.rho * np.sigma,
          np.sigma * np.sigma * (1.0 - np.rho * np.rho)};
}

// sigma^2 = sigma_tilde_sq + rho_tilde^2, rho = rho_tilde / sigma.
inline double natural_sigma(double rho_tilde, double sigma_tilde_sq) {
  return std::sqrt(sigma_tilde_sq + rho_tilde * rho_tilde);
}
inline double natural_rho(double rho_tilde, double sigma_tilde_sq) {
  return rho_tilde / natural_sigma(rho_tilde, sigma_tilde_sq);
}

inline NaturalParams to_natural(const WorkingParams& wp) {
  if (!(wp.sigma_tilde_sq > 0.0)) throw ParameterError("params: sigma_tilde_sq must be > 0");
  return {wp.alpha0, wp.alpha, wp.beta0, wp.beta, natural_sigma(wp.rho_tilde, wp.sigma_tilde_sq),
          natural_rho(wp.rho_tilde, wp.sigma_tilde_sq)};
}

}  // namespace heckss
