#pragma once

// Spike-and-slab prior specifications, scale-mixture families and the
// default hyperparameter calibration.

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "heckss/distributions.hpp"
#include "heckss/errors.hpp"
#include "heckss/normal.hpp"
#include "heckss/params.hpp"
#include "heckss/rng.hpp"

namespace heckss {

/// Law of the mixing variable v in coef | v ~ N(0, tau^2 v).
///
///   PointMass       v = 1            -> normal marginal
///   Exponential     v ~ Exp(rate 1/2) -> Laplace marginal with scale tau
///   InverseGamma    v ~ IG(a, b)      -> Student-t, 2a dof, scale tau*sqrt(b/a)
struct MixingFamily {
  enum class Kind { PointMass, Exponential, InverseGamma };
  Kind kind = Kind::PointMass;
  double a = 0.0;
  double b = 0.0;

  static MixingFamily point_mass() { return {}; }
  static MixingFamily exponential() { return {Kind::Exponential, 0.0, 0.0}; }
  static MixingFamily inverse_gamma(double a, double b) { return {Kind::InverseGamma, a, b}; }

  void validate() const {
    if (kind == Kind::InverseGamma && !(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b))) {
      throw ParameterError("mixing family: inverse-gamma needs a, b > 0");
    }
  }

  bool operator==(const MixingFamily& o) const {
    return kind == o.kind && (kind != Kind::InverseGamma || (a == o.a && b == o.b));
  }

  /// Log density of v; 0 for the point mass.
  double log_density(double v) const {
    switch (kind) {
      case Kind::PointMass:
        return 0.0;
      case Kind::Exponential:
        return -std::log(2.0) - 0.5 * v;
      case Kind::InverseGamma:
        return a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(v) - b / v;
    }
    return 0.0;
  }

  double sample(RngStream& rng) const {
    switch (kind) {
      case Kind::PointMass:
        return 1.0;
      case Kind::Exponential:
        return 2.0 * rng.exponential();
      case Kind::InverseGamma:
        return sample_inverse_gamma(a, b, rng);
    }
    return 1.0;
  }

  /// log of the marginal density of coef after integrating v out of
  /// N(0, scale^2 v).
  double marginal_logdensity(double x, double scale) const {
    switch (kind) {
      case Kind::PointMass:
        return normal_logpdf(x / scale) - std::log(scale);
      case Kind::Exponential:
        return -std::log(2.0 * scale) - std::fabs(x) / scale;
      case Kind::InverseGamma: {
        const double nu = 2.0 * a;
        const double s = scale * std::sqrt(b / a);
        const double z = x / s;
        return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * M_PI) -
               std::log(s) - 0.5 * (nu + 1.0) * std::log1p(z * z / nu);
      }
    }
    return 0.0;
  }

  /// E[v] (infinite for inverse-gamma with a <= 1).
  double mean() const {
    switch (kind) {
      case Kind::PointMass:
        return 1.0;
      case Kind::Exponential:
        return 2.0;
      case Kind::InverseGamma:
        return a > 1.0 ? b / (a - 1.0) : std::numeric_limits<double>::infinity();
    }
    return 1.0;
  }

  std::string name() const {
    switch (kind) {
      case Kind::PointMass:
        return "point-mass";
      case Kind::Exponential:
        return "exponential";
      case Kind::InverseGamma:
        return "inverse-gamma(" + std::to_string(a) + "," + std::to_string(b) + ")";
    }
    return "";
  }
};

enum class PriorClass { I, II };
enum class Family { Normal, Laplace, StudentT };
enum class CalibrationContext { Simulation, Application };

/// Hyperparameters of the full hierarchical prior.
///
///   coef_j | gamma_j, v_j ~ N(0, tau_{gamma_j}^2 v_j [x sigma_tilde_sq in class II, outcome])
///   v_j | gamma_j ~ spike/slab mixing family
///   gamma_j | r ~ Bernoulli(r),  r ~ Beta(a0, b0)
///   intercepts ~ N(0, eta v0 [x sigma_tilde_sq in class II, outcome])
///   sigma_tilde_sq ~ IG(c, d),  rho_tilde | sigma_tilde_sq ~ N(0, tau sigma_tilde_sq)
struct PriorSpec {
  PriorClass prior_class = PriorClass::I;
  double tau0_beta = 0.01, tau1_beta = 0.5;
  double tau0_alpha = 0.01, tau1_alpha = 0.5;
  MixingFamily spike_mix_beta, slab_mix_beta;
  MixingFamily spike_mix_alpha, slab_mix_alpha;
  MixingFamily intercept_mix_beta, intercept_mix_alpha;
  double a0 = 1.0, b0 = 1.0;
  double c = 1.0, d = 1.0;
  double tau = 5.0;
  double eta_O = 100.0, eta_S = 100.0;

  void validate() const {
    auto positive = [](double x, const char* key) {
      if (!(x > 0.0) || !std::isfinite(x)) throw ParameterError(std::string("prior: ") + key + " must be > 0");
    };
    positive(tau0_beta, "tau0_beta");
    positive(tau1_beta, "tau1_beta");
    positive(tau0_alpha, "tau0_alpha");
    positive(tau1_alpha, "tau1_alpha");
    positive(a0, "a0");
    positive(b0, "b0");
    positive(c, "c");
    positive(d, "d");
    positive(tau, "tau");
    positive(eta_O, "eta_O");
    positive(eta_S, "eta_S");
    if (!(tau1_beta > tau0_beta)) throw ParameterError("prior: tau1_beta must exceed tau0_beta");
    if (!(tau1_alpha > tau0_alpha)) throw ParameterError("prior: tau1_alpha must exceed tau0_alpha");
    for (const auto* m : {&spike_mix_beta, &slab_mix_beta, &spike_mix_alpha, &slab_mix_alpha,
                          &intercept_mix_beta, &intercept_mix_alpha}) {
      m->validate();
    }
  }
};

inline constexpr double kStudentTDof = 3.0;

/// Default hyperparameters for a problem of size (n, p, q).
///
/// Spike sds are 1/sqrt(n p) (outcome) and 1/sqrt(n q) (selection). Slab
/// sds are sqrt(3)/pi (selection, probit scale) and
/// sqrt(log n / (4 log 500)) (outcome) in the application context, and 0.5
/// for both in the simulation context. The Laplace family divides every sd
/// by sqrt(2) and the Student-t family (nu = 3) by sqrt(3), so marginal
/// variances match the normal family.
inline PriorSpec default_calibration(long n, long p, long q, Family family,
                                     CalibrationContext context) {
  if (n < 1 || p < 1 || q < 1) throw ParameterError("default_calibration: n, p, q must be >= 1");
  const double nd = static_cast<double>(n);
  PriorSpec spec;
  spec.tau0_beta = 1.0 / std::sqrt(nd * static_cast<double>(p));
  spec.tau0_alpha = 1.0 / std::sqrt(nd * static_cast<double>(q));
  if (context == CalibrationContext::Application) {
    spec.tau1_alpha = std::sqrt(3.0) / M_PI;
    spec.tau1_beta = std::sqrt(std::log(nd) / (4.0 * std::log(500.0)));
  } else {
    spec.tau1_alpha = 0.5;
    spec.tau1_beta = 0.5;
  }
  // Tiny samples can push the outcome slab under the spike.
  spec.tau1_beta = std::max(spec.tau1_beta, 2.0 * spec.tau0_beta);
  spec.tau1_alpha = std::max(spec.tau1_alpha, 2.0 * spec.tau0_alpha);

  MixingFamily mix = MixingFamily::point_mass();
  double shrink = 1.0;
  if (family == Family::Laplace) {
    mix = MixingFamily::exponential();
    shrink = std::sqrt(2.0);
  } else if (family == Family::StudentT) {
    mix = MixingFamily::inverse_gamma(0.5 * kStudentTDof, 0.5 * kStudentTDof);
    shrink = std::sqrt(kStudentTDof / (kStudentTDof - 2.0));
  }
  spec.tau0_beta /= shrink;
  spec.tau1_beta /= shrink;
  spec.tau0_alpha /= shrink;
  spec.tau1_alpha /= shrink;
  spec.spike_mix_beta = spec.slab_mix_beta = mix;
  spec.spike_mix_alpha = spec.slab_mix_alpha = mix;

  spec.c = spec.d = 1.0;
  spec.tau = 5.0;
  if (context == CalibrationContext::Simulation) {
    spec.a0 = spec.b0 = 1.0;
    spec.eta_O = spec.tau1_beta * spec.tau1_beta;
    spec.eta_S = spec.tau1_alpha * spec.tau1_alpha;
    spec.intercept_mix_beta = spec.intercept_mix_alpha = mix;
  } else {
    spec.a0 = 1.0;
    spec.b0 = static_cast<double>(p + q);
    spec.eta_O = spec.eta_S = 100.0;
    spec.intercept_mix_beta = spec.intercept_mix_alpha = MixingFamily::point_mass();
  }
  return spec;
}

/// log N(value; 0, tau^2 v). Point-mass families fix v at 1.
inline double spike_slab_logdensity(double value, double tau, const MixingFamily& mix, double v) {
  if (!(tau > 0.0) || !(v > 0.0)) throw ParameterError("spike_slab_logdensity: tau and v must be > 0");
  if (mix.kind == MixingFamily::Kind::PointMass) v = 1.0;
  const double sd = tau * std::sqrt(v);
  return normal_logpdf(value / sd) - std::log(sd);
}

/// Draws of rho implied by sigma_tilde_sq ~ IG(c, d) and
/// rho_tilde ~ N(0, tau sigma_tilde_sq).
inline Eigen::VectorXd sample_induced_rho_prior(const PriorSpec& spec, long count, RngStream& rng) {
  if (count < 1) throw ParameterError("sample_induced_rho_prior: count must be >= 1");
  Eigen::VectorXd out(count);
  for (long i = 0; i < count; ++i) {
    const double s2 = sample_inverse_gamma(spec.c, spec.d, rng);
    const double rt = std::sqrt(spec.tau * s2) * rng.normal();
    out[i] = natural_rho(rt, s2);
  }
  return out;
}

/// Closed-form density of the induced rho prior. rho = Z sqrt(tau) /
/// sqrt(1 + tau Z^2) with Z standard normal, so it does not involve (c, d).
inline double induced_rho_density(double rho, double tau) {
  if (!(std::fabs(rho) < 1.0)) return 0.0;
  const double om = 1.0 - rho * rho;
  const double z = rho / std::sqrt(tau * om);
  return normal_pdf(z) / (std::sqrt(tau) * om * std::sqrt(om));
}

}  // namespace heckss
