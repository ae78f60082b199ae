#pragma once

// Shared oracles for unit and acceptance tests. Everything here is computed
// independently of the library: Boost distributions and quadrature.

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "heckss/dataset.hpp"
#include "heckss/params.hpp"

namespace heckss::oracle {

/// Two-sided one-sample Kolmogorov-Smirnov test; returns the asymptotic
/// p-value with Stephens' small-sample correction.
inline double ks_pvalue(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  const double t = d * (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n));
  if (t < 0.2) return 1.0;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * t * t);
  }
  return std::clamp(p, 0.0, 1.0);
}

/// Two-sample KS p-value (asymptotic).
inline double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double t = d * (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne));
  if (t < 0.2) return 1.0;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * t * t);
  return std::clamp(p, 0.0, 1.0);
}

inline double mean_of(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double var_of(const std::vector<double>& x) {
  const double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

/// log p(row) by integrating the bivariate normal density of (y*, s*) over
/// the selected / unselected half-line of s*.
inline double quadrature_row_loglik(double mu, double xb, double sigma, double rho, bool selected,
                                    double y) {
  const double root = std::sqrt(1.0 - rho * rho);
  if (!selected) {
    // P(s* < 0) = int_{-inf}^{0} phi(s - mu) ds = int_{0}^{inf} phi(u + mu) du
    boost::math::quadrature::exp_sinh<double> integrator;
    const double val = integrator.integrate([&](double u) {
      const double z = u + mu;
      return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    });
    return std::log(val);
  }
  const double e = (y - xb) / sigma;
  auto joint = [&](double s) {
    const double z = s - mu;
    const double q = (e * e - 2.0 * rho * e * z + z * z) / (root * root);
    return std::exp(-0.5 * q) / (2.0 * M_PI * sigma * root);
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  return std::log(integrator.integrate(joint));
}

inline double quadrature_loglik(const NaturalParams& np, const Dataset& d) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const double mu = np.alpha0 + d.W().row(i).dot(np.alpha);
    const double xb = np.beta0 + d.X().row(i).dot(np.beta);
    total += quadrature_row_loglik(mu, xb, np.sigma, np.rho, d.selected(i), d.selected(i) ? *d.y(i) : 0.0);
  }
  return total;
}

/// Batch-means standard error of the mean of a correlated series.
inline double batch_means_se(const std::vector<double>& x, std::size_t batches = 50) {
  const std::size_t len = x.size() / batches;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) s += x[i];
    means.push_back(s / static_cast<double>(len));
  }
  return std::sqrt(var_of(means) / static_cast<double>(batches));
}

}  // namespace heckss::oracle
