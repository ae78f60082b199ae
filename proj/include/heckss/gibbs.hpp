#pragma once

// Data-augmentation Gibbs sampler for the selection model under Class I and
// Class II spike-and-slab priors.
//
// One iteration runs, in order:
//   1  latent utilities s*
//   2  (alpha0, alpha)
//   3  (beta0, beta, rho_tilde)
//   4  sigma_tilde_sq
//   5  gamma_O      6  gamma_S      7  r
//   8  v_O          9  v_S          10 intercept scales v_O0, v_S0

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "heckss/dataset.hpp"
#include "heckss/distributions.hpp"
#include "heckss/errors.hpp"
#include "heckss/fit.hpp"
#include "heckss/mvn.hpp"
#include "heckss/params.hpp"
#include "heckss/priors.hpp"
#include "heckss/rng.hpp"

namespace heckss {

struct ParameterState {
  double alpha0 = 0.0;
  Eigen::VectorXd alpha;
  double beta0 = 0.0;
  Eigen::VectorXd beta;
  double rho_tilde = 0.0;
  double sigma_tilde_sq = 1.0;
  std::vector<std::uint8_t> gamma_O;
  std::vector<std::uint8_t> gamma_S;
  Eigen::VectorXd v_O;
  Eigen::VectorXd v_S;
  double v_O0 = 1.0;
  double v_S0 = 1.0;
  double r = 0.5;
  Eigen::VectorXd s_star;  // empty when dropped from stored draws

  static ParameterState zeros(Eigen::Index p, Eigen::Index q, Eigen::Index n) {
    ParameterState st;
    st.alpha = Eigen::VectorXd::Zero(q);
    st.beta = Eigen::VectorXd::Zero(p);
    st.gamma_O.assign(static_cast<std::size_t>(p), 0);
    st.gamma_S.assign(static_cast<std::size_t>(q), 0);
    st.v_O = Eigen::VectorXd::Ones(p);
    st.v_S = Eigen::VectorXd::Ones(q);
    st.s_star = Eigen::VectorXd::Zero(n);
    return st;
  }

  NaturalParams natural() const { return to_natural(working()); }
  WorkingParams working() const { return {alpha0, alpha, beta0, beta, rho_tilde, sigma_tilde_sq}; }

  /// Positivity, r in (0,1) and, when s* is present, sign consistency with s.
  void check(const Dataset* data = nullptr) const {
    if (!(sigma_tilde_sq > 0.0) || !std::isfinite(sigma_tilde_sq)) {
      throw NumericalError("state: sigma_tilde_sq must be positive and finite");
    }
    if (!(r > 0.0 && r < 1.0)) throw NumericalError("state: r must lie in (0,1)");
    if (!(v_O.array() > 0.0).all() || !(v_S.array() > 0.0).all() || !(v_O0 > 0.0) || !(v_S0 > 0.0)) {
      throw NumericalError("state: mixing variables must be positive");
    }
    if (data && s_star.size() == data->n()) {
      for (Eigen::Index i = 0; i < data->n(); ++i) {
        if ((s_star[i] > 0.0) != data->selected(i)) {
          throw NumericalError("state: latent utility sign disagrees with s at row " + std::to_string(i + 1));
        }
      }
    }
  }
};

enum class InitStrategy { MleBased, Null };

struct GibbsConfig {
  long iterations = 10000;
  long burn_in = 1250;
  long thin = 1;
  std::uint64_t seed = 0;
  InitStrategy init = InitStrategy::MleBased;
  bool keep_latent = false;

  void validate() const {
    if (iterations < 1) throw ParameterError("gibbs: iterations must be >= 1");
    if (burn_in < 0 || burn_in >= iterations) throw ParameterError("gibbs: burn_in must be in [0, iterations)");
    if (thin < 1) throw ParameterError("gibbs: thin must be >= 1");
  }
  long draw_count() const { return (iterations - burn_in) / thin; }
};

struct ChainOutput {
  std::vector<ParameterState> draws;
  GibbsConfig config;
  PriorSpec prior;
  double wall_time = 0.0;  // seconds
  Eigen::Index p = 0, q = 0;
  // Whether the MLE-based start was used (false: null start).
  bool mle_initialized = false;
};

/// Conditional kernels bound to one dataset and prior. Cross-products that
/// do not change between iterations are computed once.
class GibbsSampler {
 public:
  GibbsSampler(const Dataset& data, const PriorSpec& prior) : data_(data), prior_(prior) {
    prior_.validate();
    const Eigen::Index n = data.n(), p = data.p(), q = data.q();
    const auto obs = data.observed();
    const auto mis = data.missing();
    n1_ = data.n_observed();
    Wd_.resize(n, q + 1);
    Wd_.col(0).setOnes();
    Wd_.rightCols(q) = data.W();
    Xd1_.resize(n1_, p + 1);
    W1d_.resize(n1_, q + 1);
    for (Eigen::Index k = 0; k < n1_; ++k) {
      const Eigen::Index i = obs[static_cast<std::size_t>(k)];
      Xd1_(k, 0) = 1.0;
      Xd1_.row(k).tail(p) = data.X().row(i);
      W1d_.row(k) = Wd_.row(i);
    }
    Eigen::MatrixXd W0d(static_cast<Eigen::Index>(mis.size()), q + 1);
    for (std::size_t k = 0; k < mis.size(); ++k) W0d.row(static_cast<Eigen::Index>(k)) = Wd_.row(mis[k]);
    gram_W0_ = W0d.transpose() * W0d;
    gram_W1_ = W1d_.transpose() * W1d_;
    y1_ = data.observed_y();
    gram_X1_ = Xd1_.transpose() * Xd1_;
    cross_Xy1_ = Xd1_.transpose() * y1_;
  }

  const Dataset& data() const noexcept { return data_; }
  const PriorSpec& prior() const noexcept { return prior_; }

  // ---- latent utilities -------------------------------------------------
  void latent_update(ParameterState& st, RngStream& rng) const {
    const Eigen::Index n = data_.n();
    const Eigen::VectorXd mu = selection_index(st);
    const Eigen::VectorXd xb = (data_.X() * st.beta).array() + st.beta0;
    const double denom = st.sigma_tilde_sq + st.rho_tilde * st.rho_tilde;
    const double k = st.rho_tilde / denom;
    const double delta = st.sigma_tilde_sq / denom;
    if (st.s_star.size() != n) st.s_star.resize(n);
    const TruncInterval pos{0.0, std::numeric_limits<double>::infinity()};
    const TruncInterval neg{-std::numeric_limits<double>::infinity(), 0.0};
    for (Eigen::Index i = 0; i < n; ++i) {
      if (data_.selected(i)) {
        st.s_star[i] = sample_truncated_normal(mu[i] + k * (*data_.y(i) - xb[i]), delta, pos, rng);
      } else {
        st.s_star[i] = sample_truncated_normal(mu[i], 1.0, neg, rng);
      }
    }
  }

  // ---- selection coefficients -------------------------------------------
  /// Precision and linear term of the Gaussian conditional of (alpha0, alpha).
  void selection_conditional(const ParameterState& st, Eigen::MatrixXd& Q, Eigen::VectorXd& h) const {
    const Eigen::Index q = data_.q();
    const double denom = st.sigma_tilde_sq + st.rho_tilde * st.rho_tilde;
    const double k = st.rho_tilde / denom;
    const double delta = st.sigma_tilde_sq / denom;
    Eigen::VectorXd u = st.s_star;
    const auto obs = data_.observed();
    Eigen::VectorXd xb1 = Xd1_.rightCols(data_.p()) * st.beta;
    xb1.array() += st.beta0;
    for (Eigen::Index j = 0; j < n1_; ++j) {
      const Eigen::Index i = obs[static_cast<std::size_t>(j)];
      u[i] = (st.s_star[i] - k * (y1_[j] - xb1[j])) / delta;
    }
    Q = gram_W0_ + gram_W1_ / delta;
    Q(0, 0) += 1.0 / (prior_.eta_S * active_v(prior_.intercept_mix_alpha, st.v_S0));
    for (Eigen::Index j = 0; j < q; ++j) Q(j + 1, j + 1) += 1.0 / selection_prior_variance(st, j);
    h = Wd_.transpose() * u;
  }

  void selection_coefficient_update(ParameterState& st, RngStream& rng) const {
    Eigen::MatrixXd Q;
    Eigen::VectorXd h;
    selection_conditional(st, Q, h);
    const Eigen::VectorXd draw = sample_mvn_canonical(Q, h, rng);
    st.alpha0 = draw[0];
    st.alpha = draw.tail(data_.q());
  }

  // ---- outcome coefficients ---------------------------------------------
  /// Precision and linear term of the Gaussian conditional of
  /// (beta0, beta, rho_tilde), design Z = [1, X1, s1* - alpha0 - W1 alpha].
  void outcome_conditional(const ParameterState& st, Eigen::MatrixXd& Q, Eigen::VectorXd& h) const {
    const Eigen::Index p = data_.p();
    const Eigen::VectorXd resid = latent_residual(st);
    const double s2 = st.sigma_tilde_sq;
    Q.resize(p + 2, p + 2);
    h.resize(p + 2);
    Q.topLeftCorner(p + 1, p + 1) = gram_X1_ / s2;
    const Eigen::VectorXd xr = Xd1_.transpose() * resid;
    Q.col(p + 1).head(p + 1) = xr / s2;
    Q.row(p + 1).head(p + 1) = xr.transpose() / s2;
    Q(p + 1, p + 1) = resid.squaredNorm() / s2 + 1.0 / (prior_.tau * s2);
    const double scale = prior_.prior_class == PriorClass::II ? s2 : 1.0;
    Q(0, 0) += 1.0 / (prior_.eta_O * active_v(prior_.intercept_mix_beta, st.v_O0) * scale);
    for (Eigen::Index j = 0; j < p; ++j) Q(j + 1, j + 1) += 1.0 / (outcome_prior_variance(st, j) * scale);
    h.head(p + 1) = cross_Xy1_ / s2;
    h[p + 1] = resid.dot(y1_) / s2;
  }

  void outcome_coefficient_update(ParameterState& st, RngStream& rng) const {
    Eigen::MatrixXd Q;
    Eigen::VectorXd h;
    outcome_conditional(st, Q, h);
    const Eigen::VectorXd draw = sample_mvn_canonical(Q, h, rng);
    st.beta0 = draw[0];
    st.beta = draw.segment(1, data_.p());
    st.rho_tilde = draw[data_.p() + 1];
  }

  void coefficient_update(ParameterState& st, RngStream& rng) const {
    selection_coefficient_update(st, rng);
    outcome_coefficient_update(st, rng);
  }

  // ---- outcome variance -------------------------------------------------
  struct InverseGammaParams {
    double shape;
    double rate;
  };

  InverseGammaParams variance_conditional(const ParameterState& st) const {
    const Eigen::Index p = data_.p();
    const Eigen::VectorXd resid = latent_residual(st);
    Eigen::VectorXd e = y1_ - Xd1_.rightCols(p) * st.beta;
    e.array() -= st.beta0;
    e -= st.rho_tilde * resid;
    double shape = prior_.c + 0.5 * (1.0 + static_cast<double>(n1_));
    double rate = prior_.d + st.rho_tilde * st.rho_tilde / (2.0 * prior_.tau) + 0.5 * e.squaredNorm();
    if (prior_.prior_class == PriorClass::II) {
      shape += 0.5 * static_cast<double>(p + 1);
      rate += st.beta0 * st.beta0 / (2.0 * prior_.eta_O * active_v(prior_.intercept_mix_beta, st.v_O0));
      for (Eigen::Index j = 0; j < p; ++j) rate += st.beta[j] * st.beta[j] / (2.0 * outcome_prior_variance(st, j));
    }
    return {shape, rate};
  }

  void variance_update(ParameterState& st, RngStream& rng) const {
    const auto ig = variance_conditional(st);
    st.sigma_tilde_sq = sample_inverse_gamma(ig.shape, ig.rate, rng);
  }

  // ---- inclusion indicators ---------------------------------------------
  /// P(gamma = 1 | rest) for one coefficient. `scale` multiplies both
  /// spike and slab sds (sigma_tilde in class II outcome, else 1). When
  /// the spike and slab mixing families coincide the mixing density
  /// cancels; otherwise v is integrated out of both components.
  static double inclusion_probability(double coef, double v, double r, double tau0, double tau1,
                                      const MixingFamily& spike, const MixingFamily& slab,
                                      double scale = 1.0) {
    double log_slab, log_spike;
    if (spike == slab) {
      const double vv = spike.kind == MixingFamily::Kind::PointMass ? 1.0 : v;
      log_slab = spike_slab_logdensity(coef, tau1 * scale, slab, vv);
      log_spike = spike_slab_logdensity(coef, tau0 * scale, spike, vv);
    } else {
      log_slab = slab.marginal_logdensity(coef, tau1 * scale);
      log_spike = spike.marginal_logdensity(coef, tau0 * scale);
    }
    const double log_odds = std::log(r) - std::log1p(-r) + log_slab - log_spike;
    return 1.0 / (1.0 + std::exp(-log_odds));
  }

  void inclusion_update(ParameterState& st, RngStream& rng) const {
    const Eigen::Index p = data_.p(), q = data_.q();
    const double scale = prior_.prior_class == PriorClass::II ? std::sqrt(st.sigma_tilde_sq) : 1.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double prob = inclusion_probability(st.beta[j], st.v_O[j], st.r, prior_.tau0_beta, prior_.tau1_beta,
                                                prior_.spike_mix_beta, prior_.slab_mix_beta, scale);
      st.gamma_O[static_cast<std::size_t>(j)] = sample_bernoulli(prob, rng) ? 1 : 0;
    }
    for (Eigen::Index k = 0; k < q; ++k) {
      const double prob = inclusion_probability(st.alpha[k], st.v_S[k], st.r, prior_.tau0_alpha, prior_.tau1_alpha,
                                                prior_.spike_mix_alpha, prior_.slab_mix_alpha);
      st.gamma_S[static_cast<std::size_t>(k)] = sample_bernoulli(prob, rng) ? 1 : 0;
    }
    long included = 0;
    for (auto g : st.gamma_O) included += g;
    for (auto g : st.gamma_S) included += g;
    const double total = static_cast<double>(p + q);
    st.r = sample_beta(prior_.a0 + static_cast<double>(included), prior_.b0 + total - static_cast<double>(included),
                       rng);
    st.r = std::clamp(st.r, 1e-300, 1.0 - 1e-16);
  }

  // ---- mixing variables -------------------------------------------------
  /// Draw v from p(v | coef) ∝ N(coef; 0, tau_g^2 v) pi(v).
  static double sample_mixing(double coef, double tau_g, const MixingFamily& mix, RngStream& rng) {
    switch (mix.kind) {
      case MixingFamily::Kind::PointMass:
        return 1.0;
      case MixingFamily::Kind::Exponential: {
        const double c = std::max(std::fabs(coef), 1e-8);
        return 1.0 / sample_inverse_gaussian(tau_g / c, 1.0, rng);
      }
      case MixingFamily::Kind::InverseGamma:
        return sample_inverse_gamma(mix.a + 0.5, mix.b + coef * coef / (2.0 * tau_g * tau_g), rng);
    }
    return 1.0;
  }

  void mixing_update(ParameterState& st, RngStream& rng) const {
    const Eigen::Index p = data_.p(), q = data_.q();
    const double scale = prior_.prior_class == PriorClass::II ? std::sqrt(st.sigma_tilde_sq) : 1.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const bool in = st.gamma_O[static_cast<std::size_t>(j)] != 0;
      st.v_O[j] = sample_mixing(st.beta[j], (in ? prior_.tau1_beta : prior_.tau0_beta) * scale,
                                in ? prior_.slab_mix_beta : prior_.spike_mix_beta, rng);
    }
    for (Eigen::Index k = 0; k < q; ++k) {
      const bool in = st.gamma_S[static_cast<std::size_t>(k)] != 0;
      st.v_S[k] = sample_mixing(st.alpha[k], in ? prior_.tau1_alpha : prior_.tau0_alpha,
                                in ? prior_.slab_mix_alpha : prior_.spike_mix_alpha, rng);
    }
    st.v_O0 = sample_mixing(st.beta0, std::sqrt(prior_.eta_O) * scale, prior_.intercept_mix_beta, rng);
    st.v_S0 = sample_mixing(st.alpha0, std::sqrt(prior_.eta_S), prior_.intercept_mix_alpha, rng);
  }

  /// One full sweep of Steps 1-10.
  void iterate(ParameterState& st, RngStream& rng) const {
    latent_update(st, rng);
    selection_coefficient_update(st, rng);
    outcome_coefficient_update(st, rng);
    variance_update(st, rng);
    inclusion_update(st, rng);
    mixing_update(st, rng);
  }

  /// tau_gamma^2 v for outcome slope j, without the class II sigma_tilde_sq factor.
  double outcome_prior_variance(const ParameterState& st, Eigen::Index j) const {
    const bool in = st.gamma_O[static_cast<std::size_t>(j)] != 0;
    const double t = in ? prior_.tau1_beta : prior_.tau0_beta;
    return t * t * active_v(in ? prior_.slab_mix_beta : prior_.spike_mix_beta, st.v_O[j]);
  }
  double selection_prior_variance(const ParameterState& st, Eigen::Index k) const {
    const bool in = st.gamma_S[static_cast<std::size_t>(k)] != 0;
    const double t = in ? prior_.tau1_alpha : prior_.tau0_alpha;
    return t * t * active_v(in ? prior_.slab_mix_alpha : prior_.spike_mix_alpha, st.v_S[k]);
  }

 private:
  // Point-mass families hold v at 1 whatever the stored value.
  static double active_v(const MixingFamily& mix, double v) {
    return mix.kind == MixingFamily::Kind::PointMass ? 1.0 : v;
  }

  Eigen::VectorXd selection_index(const ParameterState& st) const {
    Eigen::VectorXd mu = data_.W() * st.alpha;
    mu.array() += st.alpha0;
    return mu;
  }

  // s1* - alpha0 - W1 alpha over observed rows.
  Eigen::VectorXd latent_residual(const ParameterState& st) const {
    const auto obs = data_.observed();
    Eigen::VectorXd mu1 = W1d_.rightCols(data_.q()) * st.alpha;
    for (Eigen::Index k = 0; k < n1_; ++k) {
      mu1[k] = st.s_star[obs[static_cast<std::size_t>(k)]] - st.alpha0 - mu1[k];
    }
    return mu1;
  }

  const Dataset& data_;
  PriorSpec prior_;
  Eigen::Index n1_ = 0;
  Eigen::MatrixXd Wd_, W1d_, Xd1_;
  Eigen::MatrixXd gram_W0_, gram_W1_, gram_X1_;
  Eigen::VectorXd y1_, cross_Xy1_;
};

/// Starting state. MleBased: coefficients and (rho_tilde, sigma_tilde_sq)
/// from mle_fit, gamma_j = 1 iff the Wald p-value is below 0.05. Null, or a
/// failed fit: every coefficient 0, sigma_tilde = 1, rho_tilde = 0, all
/// gamma 0. Both use r = 0.5, every v = 1 and one latent draw.
inline ParameterState initialize(const GibbsSampler& sampler, InitStrategy strategy, RngStream& rng,
                                 bool* used_mle = nullptr) {
  const Dataset& data = sampler.data();
  ParameterState st = ParameterState::zeros(data.p(), data.q(), data.n());
  bool mle_ok = false;
  if (strategy == InitStrategy::MleBased) {
    try {
      const FitResult fit = mle_fit(data);
      if (fit.converged) {
        const WorkingParams wp = to_working(fit.params);
        const auto [ps, po] = wald_pvalues(fit);
        st.alpha0 = wp.alpha0;
        st.alpha = wp.alpha;
        st.beta0 = wp.beta0;
        st.beta = wp.beta;
        st.rho_tilde = wp.rho_tilde;
        st.sigma_tilde_sq = wp.sigma_tilde_sq;
        for (Eigen::Index k = 0; k < data.q(); ++k) st.gamma_S[static_cast<std::size_t>(k)] = ps[k] < 0.05;
        for (Eigen::Index j = 0; j < data.p(); ++j) st.gamma_O[static_cast<std::size_t>(j)] = po[j] < 0.05;
        mle_ok = true;
      }
    } catch (const std::exception&) {
    }
  }
  if (used_mle) *used_mle = mle_ok;
  sampler.latent_update(st, rng);
  return st;
}

inline ParameterState initialize(const Dataset& data, const PriorSpec& prior, InitStrategy strategy,
                                 RngStream& rng) {
  return initialize(GibbsSampler(data, prior), strategy, rng);
}

/// Run one chain: initialize, then `iterations` sweeps, storing every
/// thin-th state after burn-in. Deterministic given config.seed.
inline ChainOutput run_chain(const Dataset& data, const PriorSpec& prior, const GibbsConfig& config) {
  config.validate();
  data.require_fittable();
  const auto start = std::chrono::steady_clock::now();
  const GibbsSampler sampler(data, prior);
  RngStream rng(config.seed, 0);
  ChainOutput out;
  out.config = config;
  out.prior = prior;
  out.p = data.p();
  out.q = data.q();
  ParameterState st = initialize(sampler, config.init, rng, &out.mle_initialized);
  out.draws.reserve(static_cast<std::size_t>(config.draw_count()));
  for (long t = 1; t <= config.iterations; ++t) {
    try {
      sampler.iterate(st, rng);
      if (!std::isfinite(st.sigma_tilde_sq) || !std::isfinite(st.rho_tilde)) {
        throw NumericalError("non-finite variance parameters");
      }
    } catch (const NumericalError& e) {
      throw NumericalError("gibbs iteration " + std::to_string(t) + ": " + e.what());
    } catch (const ParameterError& e) {
      throw NumericalError("gibbs iteration " + std::to_string(t) + ": " + e.what());
    }
    if (t > config.burn_in && (t - config.burn_in) % config.thin == 0) {
      if (config.keep_latent) {
        out.draws.push_back(st);
      } else {
        Eigen::VectorXd latent;
        latent.swap(st.s_star);
        out.draws.push_back(st);
        st.s_star.swap(latent);
      }
    }
  }
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace heckss
