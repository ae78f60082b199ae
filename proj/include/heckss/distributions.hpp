#pragma once

// Sampling kernels used by the Gibbs sampler and the data generator.
//
// Parametrization conventions (every call site relies on these):
//   gamma(shape, rate)            density ~ x^(shape-1) exp(-rate x)
//   inverse_gamma(shape, rate)    density ~ x^(-shape-1) exp(-rate / x)
//   inverse_gaussian(mean, shape) density ~ x^(-3/2) exp(-shape (x-mean)^2 / (2 mean^2 x))

#include <cmath>
#include <limits>
#include <string>

#include "heckss/errors.hpp"
#include "heckss/normal.hpp"
#include "heckss/rng.hpp"

namespace heckss {

/// Open interval (lower, upper); either end may be infinite.
struct TruncInterval {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  static TruncInterval positive() noexcept { return {0.0, std::numeric_limits<double>::infinity()}; }
  static TruncInterval negative() noexcept { return {-std::numeric_limits<double>::infinity(), 0.0}; }

  bool valid() const noexcept {
    return !std::isnan(lower) && !std::isnan(upper) && lower < upper &&
           lower != std::numeric_limits<double>::infinity() &&
           upper != -std::numeric_limits<double>::infinity();
  }
  bool contains(double x) const noexcept { return lower < x && x < upper; }
};

namespace detail {

inline constexpr double kTailSwitch = 4.0;

// Standard normal restricted to (a, inf) for a >= kTailSwitch: exponential
// proposal with the optimal rate (Robert 1995).
inline double std_tail_lower(double a, RngStream& rng) {
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a + rng.exponential() / rate;
    const double diff = z - rate;
    if (z > a && rng.uniform() <= std::exp(-0.5 * diff * diff)) return z;
  }
}

// Standard normal on (a, b) with kTailSwitch <= a < b < inf.
inline double std_tail_two_sided(double a, double b, RngStream& rng) {
  if (b - a < 2.0 / a) {
    // Narrow window: uniform proposal, acceptance exp((a^2 - z^2)/2).
    for (;;) {
      const double z = a + (b - a) * rng.uniform();
      if (z > a && z < b && std::log(rng.uniform()) <= 0.5 * (a - z) * (a + z)) return z;
    }
  }
  for (;;) {
    const double z = std_tail_lower(a, rng);
    if (z < b) return z;
  }
}

// Standard normal on (a, b) by inversion. Works on whichever side of zero
// keeps the probabilities away from 1 so tail mass is not lost to rounding.
inline double std_inverse_cdf(double a, double b, RngStream& rng) {
  const bool upper_side = std::isinf(b) || a >= 0.0;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    double z;
    if (upper_side) {
      // Survival scale: S(z) = Phi(-z).
      const double sa = normal_cdf(-a);
      const double sb = std::isinf(b) ? 0.0 : normal_cdf(-b);
      z = -normal_quantile(sb + rng.uniform() * (sa - sb));
    } else {
      const double fa = std::isinf(a) ? 0.0 : normal_cdf(a);
      const double fb = std::isinf(b) ? 1.0 : normal_cdf(b);
      z = normal_quantile(fa + rng.uniform() * (fb - fa));
    }
    if (z > a && z < b) return z;
  }
  // Interval too narrow for the CDF to resolve: uniform proposal.
  const double peak = (a > 0.0) ? a : (b < 0.0 ? b : 0.0);
  for (;;) {
    const double z = a + (b - a) * rng.uniform();
    if (z > a && z < b && std::log(rng.uniform()) <= 0.5 * (peak * peak - z * z)) return z;
  }
}

inline double std_truncated_normal(double a, double b, RngStream& rng) {
  if (std::isinf(a) && std::isinf(b)) return rng.normal();
  if (a >= kTailSwitch) {
    return std::isinf(b) ? std_tail_lower(a, rng) : std_tail_two_sided(a, b, rng);
  }
  if (b <= -kTailSwitch) {
    return std::isinf(a) ? -std_tail_lower(-b, rng) : -std_tail_two_sided(-b, -a, rng);
  }
  return std_inverse_cdf(a, b, rng);
}

}  // namespace detail

/// Draw from N(mu, var) restricted to the open interval. Inversion for
/// well-conditioned intervals, exponential-proposal rejection once the
/// truncation point lies 4 or more standard deviations into a tail.
inline double sample_truncated_normal(double mu, double var, const TruncInterval& interval,
                                      RngStream& rng) {
  if (!(var > 0.0) || !std::isfinite(var) || !std::isfinite(mu)) {
    throw ParameterError("truncated normal: need finite mu and var > 0");
  }
  if (!interval.valid()) throw ParameterError("truncated normal: invalid interval");
  const double sd = std::sqrt(var);
  const double a = (interval.lower - mu) / sd;
  const double b = (interval.upper - mu) / sd;
  for (;;) {
    const double x = mu + sd * detail::std_truncated_normal(a, b, rng);
    // Rescaling can round onto a bound; redraw in that case.
    if (interval.contains(x)) return x;
  }
}

/// Gamma(shape, rate), Marsaglia-Tsang squeeze. Returned on the log scale
/// so shapes below one do not underflow.
inline double sample_log_gamma(double shape, double rate, RngStream& rng) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
    throw ParameterError("gamma: shape and rate must be positive and finite");
  }
  double boost = 0.0;
  if (shape < 1.0) {
    boost = std::log(rng.uniform()) / shape;
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return std::log(d * v) + boost - std::log(rate);
    }
  }
}

inline double sample_gamma(double shape, double rate, RngStream& rng) {
  return std::exp(sample_log_gamma(shape, rate, rng));
}

/// Inverse-gamma with density proportional to x^(-shape-1) exp(-rate/x).
inline double sample_inverse_gamma(double shape, double rate, RngStream& rng) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw ParameterError("inverse gamma: shape and rate must be positive");
  }
  // 1/X ~ Gamma(shape, rate).
  return std::exp(-sample_log_gamma(shape, rate, rng));
}

/// Inverse Gaussian (Wald), Michael-Schucany-Haas transformation. The root
/// is evaluated in the cancellation-free form mean / (1 + h + sqrt(h(h+2))).
inline double sample_inverse_gaussian(double mean, double shape, RngStream& rng) {
  if (!(mean > 0.0) || !(shape > 0.0) || !std::isfinite(mean) || !std::isfinite(shape)) {
    throw ParameterError("inverse gaussian: mean and shape must be positive and finite");
  }
  const double z = rng.normal();
  const double h = mean * z * z / (2.0 * shape);
  const double x = mean / (1.0 + h + std::sqrt(h * (h + 2.0)));
  if (rng.uniform() * (mean + x) <= mean) return x;
  return mean * (mean / x);
}

/// Beta(a, b) on the open unit interval, via two gamma draws.
inline double sample_beta(double a, double b, RngStream& rng) {
  if (!(a > 0.0) || !(b > 0.0)) throw ParameterError("beta: shape parameters must be positive");
  for (;;) {
    const double lx = sample_log_gamma(a, 1.0, rng);
    const double ly = sample_log_gamma(b, 1.0, rng);
    // x / (x + y) = 1 / (1 + exp(ly - lx)), stable for any magnitudes.
    const double d = ly - lx;
    const double value = d > 0.0 ? std::exp(-d) / (1.0 + std::exp(-d)) : 1.0 / (1.0 + std::exp(d));
    if (value > 0.0 && value < 1.0) return value;
  }
}

inline bool sample_bernoulli(double prob, RngStream& rng) { return rng.uniform() < prob; }

}  // namespace heckss
