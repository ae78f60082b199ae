#pragma once

// Simulation harness: AR(1) covariates, missingness calibration, data
// generation and replicated method comparisons.

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "heckss/baselines.hpp"
#include "heckss/dataset.hpp"
#include "heckss/gibbs.hpp"
#include "heckss/normal.hpp"
#include "heckss/posterior.hpp"
#include "heckss/priors.hpp"
#include "heckss/rng.hpp"

namespace heckss {

enum class Method { SsNormal, SsLaplace, SsNormalII, SsLaplaceII, Stepwise };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::SsNormal:
      return "ss-normal";
    case Method::SsLaplace:
      return "ss-laplace";
    case Method::SsNormalII:
      return "ss-normal-II";
    case Method::SsLaplaceII:
      return "ss-laplace-II";
    case Method::Stepwise:
      return "stepwise";
  }
  return "";
}

inline Method parse_method(const std::string& s) {
  for (Method m : {Method::SsNormal, Method::SsLaplace, Method::SsNormalII, Method::SsLaplaceII, Method::Stepwise}) {
    if (s == method_name(m)) return m;
  }
  throw ParameterError("unknown method '" + s + "'");
}

struct ScenarioConfig {
  long n = 500;
  long p = 10;  // q = p
  double rho = 0.5;
  double sigma = 1.0;
  Eigen::VectorXd alpha_effects;
  Eigen::VectorXd beta_effects;
  double target_missing = 0.3;
  double beta0 = 0.5;
  long replicates = 100;
  std::set<Method> methods{Method::SsNormal};

  // Chain settings for the spike-and-slab methods.
  long iterations = 10000;
  long burn_in = 1250;
  // Replaces the calibrated rho_tilde prior scale when set.
  std::optional<double> tau;
  // Worker threads; 0 = hardware concurrency.
  unsigned threads = 0;

  /// alpha = (0.5, 1, 1.5, 0, ...)/sqrt(2), beta = (0.25, 0.5, 1, 0, ...).
  static ScenarioConfig standard(long n, long p, double rho) {
    ScenarioConfig c;
    c.n = n;
    c.p = p;
    c.rho = rho;
    c.alpha_effects = Eigen::VectorXd::Zero(p);
    c.beta_effects = Eigen::VectorXd::Zero(p);
    const double a[3] = {0.5, 1.0, 1.5}, b[3] = {0.25, 0.5, 1.0};
    for (long j = 0; j < std::min(p, 3L); ++j) {
      c.alpha_effects[j] = a[j] / std::sqrt(2.0);
      c.beta_effects[j] = b[j];
    }
    return c;
  }

  void validate() const {
    if (n < 2) throw ParameterError("scenario.n must be >= 2");
    if (p < 1) throw ParameterError("scenario.p must be >= 1");
    if (!(std::fabs(rho) < 1.0)) throw ParameterError("scenario.rho must lie in (-1, 1)");
    if (!(sigma > 0.0)) throw ParameterError("scenario.sigma must be > 0");
    if (!(target_missing > 0.0 && target_missing < 1.0)) {
      throw ParameterError("scenario.target_missing must lie in (0, 1)");
    }
    if (alpha_effects.size() != p) throw ParameterError("scenario.alpha must have p entries");
    if (beta_effects.size() != p) throw ParameterError("scenario.beta must have p entries");
    if (replicates < 0) throw ParameterError("scenario.replicates must be >= 0");
    if (iterations < 1 || burn_in < 0 || burn_in >= iterations) {
      throw ParameterError("scenario.iterations/burn_in: need 0 <= burn_in < iterations");
    }
    if (tau && !(*tau > 0.0)) throw ParameterError("scenario.tau must be > 0");
  }

  ModelId truth() const {
    ModelId m;
    for (long k = 0; k < p; ++k) m.included_S.push_back(alpha_effects[k] != 0.0);
    for (long j = 0; j < p; ++j) m.included_O.push_back(beta_effects[j] != 0.0);
    return m;
  }
};

/// Rows i.i.d. normal with unit variances and corr(w_j, w_k) = 0.5^|j-k|.
inline Eigen::MatrixXd gen_covariates(long n, long p, RngStream& rng) {
  if (n < 1 || p < 1) throw ParameterError("gen_covariates: n, p must be >= 1");
  Eigen::MatrixXd W(n, p);
  const double innov = std::sqrt(0.75);
  for (long i = 0; i < n; ++i) {
    W(i, 0) = rng.normal();
    for (long j = 1; j < p; ++j) W(i, j) = 0.5 * W(i, j - 1) + innov * rng.normal();
  }
  return W;
}

/// alpha0 with mean_i Phi(-alpha0 - w_i'alpha) = target, by bisection.
inline double calibrate_intercept(const Eigen::MatrixXd& W, const Eigen::VectorXd& alpha, double target) {
  if (!(target > 0.0 && target < 1.0)) throw ParameterError("calibrate_intercept: target must lie in (0,1)");
  const Eigen::VectorXd eta = W * alpha;
  auto missing_rate = [&](double a0) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) s += normal_cdf(-a0 - eta[i]);
    return s / static_cast<double>(eta.size());
  };
  double lo = -1.0, hi = 1.0;
  while (missing_rate(lo) < target) lo *= 2.0;
  while (missing_rate(hi) > target) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (missing_rate(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct GeneratedErrors {
  Eigen::VectorXd outcome;    // eps_1, variance sigma^2
  Eigen::VectorXd selection;  // eps_2, variance 1
};

/// One dataset with X = W: s* = alpha0 + w'alpha + eps2,
/// y* = beta0 + x'beta + eps1, corr(eps1, eps2) = rho, y observed iff s* > 0.
inline Dataset gen_dataset(const ScenarioConfig& cfg, const Eigen::MatrixXd& W, double alpha0, RngStream& rng,
                           GeneratedErrors* errors = nullptr) {
  const Eigen::Index n = W.rows();
  const Eigen::VectorXd mu = (W * cfg.alpha_effects).array() + alpha0;
  const Eigen::VectorXd xb = (W * cfg.beta_effects).array() + cfg.beta0;
  const double root = std::sqrt(1.0 - cfg.rho * cfg.rho);
  std::vector<std::uint8_t> s(static_cast<std::size_t>(n));
  std::vector<std::optional<double>> y(static_cast<std::size_t>(n));
  if (errors) {
    errors->outcome.resize(n);
    errors->selection.resize(n);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e2 = rng.normal();
    const double e1 = cfg.sigma * (cfg.rho * e2 + root * rng.normal());
    if (errors) {
      errors->outcome[i] = e1;
      errors->selection[i] = e2;
    }
    const bool sel = mu[i] + e2 > 0.0;
    s[static_cast<std::size_t>(i)] = sel;
    if (sel) y[static_cast<std::size_t>(i)] = xb[i] + e1;
  }
  return Dataset(W, W, std::move(s), std::move(y));
}

inline Dataset gen_dataset(const ScenarioConfig& cfg, const Eigen::MatrixXd& W, RngStream& rng) {
  return gen_dataset(cfg, W, calibrate_intercept(W, cfg.alpha_effects, cfg.target_missing), rng);
}

struct MethodResult {
  SelectionMetrics selection, outcome;
  // Posterior mean of rho per successful replicate (spike-and-slab only).
  std::vector<double> rho_means;
  std::vector<std::string> errors;
};

struct ExperimentResult {
  std::map<Method, MethodResult> methods;
  double alpha0 = 0.0;
  double mean_missing = 0.0;  // average missing fraction over replicates
};

inline PriorSpec method_prior(const ScenarioConfig& cfg, Method m) {
  const bool laplace = m == Method::SsLaplace || m == Method::SsLaplaceII;
  PriorSpec prior = default_calibration(cfg.n, cfg.p, cfg.p, laplace ? Family::Laplace : Family::Normal,
                                        CalibrationContext::Simulation);
  if (m == Method::SsNormalII || m == Method::SsLaplaceII) prior.prior_class = PriorClass::II;
  if (cfg.tau) prior.tau = *cfg.tau;
  return prior;
}

/// Covariates are drawn once from stream (master_seed, 0) and shared by all
/// replicates. Replicate r simulates its data from stream (master_seed, r+1)
/// and seeds each chain from (master_seed, r, method). Replicates run on a
/// thread pool; per-replicate results are reduced in replicate order.
inline ExperimentResult run_experiment(const ScenarioConfig& cfg, std::uint64_t master_seed) {
  cfg.validate();
  ExperimentResult result;
  if (cfg.methods.empty() || cfg.replicates == 0) return result;
  RngStream cov_rng(master_seed, 0);
  const Eigen::MatrixXd W = gen_covariates(cfg.n, cfg.p, cov_rng);
  result.alpha0 = calibrate_intercept(W, cfg.alpha_effects, cfg.target_missing);
  const ModelId truth = cfg.truth();

  struct Outcome {
    bool ok = false;
    SelectionScore score;
    double rho_mean = 0.0;
    std::string error;
  };
  const std::vector<Method> methods(cfg.methods.begin(), cfg.methods.end());
  const auto R = static_cast<std::size_t>(cfg.replicates);
  std::vector<std::vector<Outcome>> outcomes(R, std::vector<Outcome>(methods.size()));
  std::vector<double> missing(R, 0.0);

  auto run_replicate = [&](std::size_t r) {
    RngStream rng(master_seed, r + 1);
    std::optional<Dataset> data;
    try {
      data.emplace(gen_dataset(cfg, W, result.alpha0, rng));
      missing[r] = 1.0 - static_cast<double>(data->n_observed()) / static_cast<double>(data->n());
      data->require_fittable();
    } catch (const std::exception& e) {
      for (auto& o : outcomes[r]) o.error = std::string("data: ") + e.what();
      return;
    }
    for (std::size_t m = 0; m < methods.size(); ++m) {
      Outcome& o = outcomes[r][m];
      try {
        if (methods[m] == Method::Stepwise) {
          const StepwiseTrace t = forward_stepwise(*data);
          o.score = score_selection(t.final_model, truth);
        } else {
          GibbsConfig gc;
          gc.iterations = cfg.iterations;
          gc.burn_in = cfg.burn_in;
          gc.seed = mix64(master_seed ^ mix64((static_cast<std::uint64_t>(r) << 8) | (m + 1)));
          const ChainOutput chain = run_chain(*data, method_prior(cfg, methods[m]), gc);
          const PosteriorSummary s = summarize(chain);
          o.score = score_selection(median_model(s), truth);
          o.rho_mean = s.rho.mean;
        }
        o.ok = true;
      } catch (const std::exception& e) {
        o.error = "replicate " + std::to_string(r) + ": " + e.what();
      }
    }
  };

  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, R));
  if (threads <= 1) {
    for (std::size_t r = 0; r < R; ++r) run_replicate(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t r; (r = next.fetch_add(1)) < R;) run_replicate(r);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (std::size_t m = 0; m < methods.size(); ++m) {
    MetricsAccumulator sel, out;
    MethodResult mr;
    for (std::size_t r = 0; r < R; ++r) {
      const Outcome& o = outcomes[r][m];
      if (o.ok) {
        sel.add(o.score.selection);
        out.add(o.score.outcome);
        if (methods[m] != Method::Stepwise) mr.rho_means.push_back(o.rho_mean);
      } else {
        sel.add_failure();
        out.add_failure();
        mr.errors.push_back(o.error);
      }
    }
    mr.selection = sel.result();
    mr.outcome = out.result();
    result.methods[methods[m]] = std::move(mr);
  }
  double total = 0.0;
  for (double x : missing) total += x;
  result.mean_missing = total / static_cast<double>(R);
  return result;
}

/// One row per method and equation: TMR, Size, Sens., Spec., failure rate.
inline void write_metrics_table(std::ostream& os, const ExperimentResult& res) {
  os << "method\tequation\tTMR\tSize\tSens.\tSpec.\tfailure_rate\tscored\n";
  os << std::fixed << std::setprecision(3);
  for (const auto& [m, r] : res.methods) {
    for (int e = 0; e < 2; ++e) {
      const SelectionMetrics& s = e == 0 ? r.selection : r.outcome;
      os << method_name(m) << '\t' << (e == 0 ? "selection" : "outcome") << '\t' << s.tmr << '\t' << s.mean_size
         << '\t' << s.tpr << '\t' << s.tnr << '\t' << s.failure_rate << '\t' << s.scored << '\n';
    }
  }
  os.unsetf(std::ios::floatfield);
}

}  // namespace heckss
