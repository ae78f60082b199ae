#pragma once

// Standard normal density, distribution function and quantile, with
// log-scale variants that stay finite far into the lower tail.

#include <cmath>
#include <limits>
#include <numbers>

namespace heckss {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kInvSqrt2 = 0.70710678118654752440;

struct NormalEval {
  double density;
  double cumulative;
};

inline double normal_pdf(double t) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

inline double normal_logpdf(double t) noexcept { return -0.5 * t * t - kLogSqrt2Pi; }

inline double normal_cdf(double t) noexcept {
  return 0.5 * std::erfc(-t * kInvSqrt2);
}

inline NormalEval normal_pdf_cdf(double t) noexcept { return {normal_pdf(t), normal_cdf(t)}; }

namespace detail {

// Mills ratio R(x) = (1 - Phi(x)) / phi(x) for large positive x, by
// backward evaluation of Laplace's continued fraction.
inline double mills_ratio_cf(double x) noexcept {
  double f = x;
  for (int k = 120; k >= 1; --k) f = x + k / f;
  return 1.0 / f;
}

}  // namespace detail

/// log Phi(t). erfc is accurate to full relative precision down to
/// t = -20; below that the continued fraction takes over, so the result is
/// finite for every finite t.
inline double normal_logcdf(double t) noexcept {
  if (t > 0.0) return std::log1p(-0.5 * std::erfc(t * kInvSqrt2));
  if (t > -20.0) return std::log(0.5 * std::erfc(-t * kInvSqrt2));
  return normal_logpdf(t) + std::log(detail::mills_ratio_cf(-t));
}

/// Inverse standard normal CDF (Wichura, AS 241, PPND16). Accurate to about
/// 1e-16 relative over (0, 1); returns -inf/+inf at 0/1.
inline double normal_quantile(double p) noexcept {
  if (!(p > 0.0)) return p == 0.0 ? -std::numeric_limits<double>::infinity()
                                  : std::numeric_limits<double>::quiet_NaN();
  if (!(p < 1.0)) return p == 1.0 ? std::numeric_limits<double>::infinity()
                                  : std::numeric_limits<double>::quiet_NaN();
  const double q = p - 0.5;
  double r, val;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    val = q *
          (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                67265.770927008700853) * r + 45921.953931549871457) * r +
              13731.693765509461125) * r + 1971.5909503065514427) * r +
            133.14166789178437745) * r + 3.387132872796366608) /
          (((((((r * 5226.495278852545925 + 28729.085735721942674) * r +
                39307.89580009271061) * r + 21213.794301586595867) * r +
              5394.1960214247511077) * r + 687.1870074920579083) * r +
            42.313330701600911252) * r + 1.0);
    return val;
  }
  r = q < 0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

/// Inverse Mills ratio lambda(t) = phi(t) / Phi(t). Evaluated in log space
/// below t = -6 so the ratio of two vanishing quantities stays accurate.
inline double inverse_mills(double t) noexcept {
  if (t < -6.0) return std::exp(normal_logpdf(t) - normal_logcdf(t));
  return normal_pdf(t) / normal_cdf(t);
}

}  // namespace heckss
