#pragma once

// Posterior summaries: inclusion probabilities, the median model,
// model-conditional summaries, model frequencies and IS-LOO.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "heckss/dataset.hpp"
#include "heckss/errors.hpp"
#include "heckss/gibbs.hpp"
#include "heckss/likelihood.hpp"

namespace heckss {

struct ModelId {
  std::vector<std::uint8_t> included_S;
  std::vector<std::uint8_t> included_O;

  static ModelId of(const ParameterState& st) { return {st.gamma_S, st.gamma_O}; }

  auto operator<=>(const ModelId&) const = default;
  bool operator==(const ModelId&) const = default;

  long size_S() const { return std::count(included_S.begin(), included_S.end(), 1); }
  long size_O() const { return std::count(included_O.begin(), included_O.end(), 1); }

  /// "S:0110|O:101" style label.
  std::string label() const {
    std::string out = "S:";
    for (auto b : included_S) out += b ? '1' : '0';
    out += "|O:";
    for (auto b : included_O) out += b ? '1' : '0';
    return out;
  }
};

struct Stat {
  double mean = 0.0;
  double sd = 0.0;
};

struct PosteriorSummary {
  long draws = 0;
  Eigen::VectorXd pip_S, pip_O;
  Stat alpha0, beta0, sigma, rho;
  std::vector<Stat> alpha, beta;
  // Distinct sampled models, most frequent first (ties: ModelId order).
  std::vector<std::pair<ModelId, long>> model_table;
  // Set by conditional_summary: the model the draws were restricted to.
  std::optional<ModelId> conditioned_on;
};

namespace detail {

class RunningStat {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  Stat get() const {
    return {mean_, n_ > 1 ? std::sqrt(std::max(m2_, 0.0) / static_cast<double>(n_ - 1)) : 0.0};
  }

 private:
  long n_ = 0;
  double mean_ = 0.0, m2_ = 0.0;
};

template <class Pred>
PosteriorSummary summarize_if(const ChainOutput& chain, Pred keep) {
  const Eigen::Index p = chain.p, q = chain.q;
  PosteriorSummary out;
  out.pip_S = Eigen::VectorXd::Zero(q);
  out.pip_O = Eigen::VectorXd::Zero(p);
  RunningStat a0, b0, sig, rh;
  std::vector<RunningStat> a(static_cast<std::size_t>(q)), b(static_cast<std::size_t>(p));
  std::map<ModelId, long> freq;
  for (const auto& d : chain.draws) {
    if (!keep(d)) continue;
    ++out.draws;
    for (Eigen::Index k = 0; k < q; ++k) {
      out.pip_S[k] += d.gamma_S[static_cast<std::size_t>(k)];
      a[static_cast<std::size_t>(k)].add(d.alpha[k]);
    }
    for (Eigen::Index j = 0; j < p; ++j) {
      out.pip_O[j] += d.gamma_O[static_cast<std::size_t>(j)];
      b[static_cast<std::size_t>(j)].add(d.beta[j]);
    }
    a0.add(d.alpha0);
    b0.add(d.beta0);
    sig.add(natural_sigma(d.rho_tilde, d.sigma_tilde_sq));
    rh.add(natural_rho(d.rho_tilde, d.sigma_tilde_sq));
    ++freq[ModelId::of(d)];
  }
  if (out.draws == 0) throw ParameterError("summarize: no draws");
  out.pip_S /= static_cast<double>(out.draws);
  out.pip_O /= static_cast<double>(out.draws);
  out.alpha0 = a0.get();
  out.beta0 = b0.get();
  out.sigma = sig.get();
  out.rho = rh.get();
  for (const auto& s : a) out.alpha.push_back(s.get());
  for (const auto& s : b) out.beta.push_back(s.get());
  out.model_table.assign(freq.begin(), freq.end());
  std::stable_sort(out.model_table.begin(), out.model_table.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  return out;
}

}  // namespace detail

/// PIPs, posterior means and sds (sigma and rho transformed per draw) and
/// the model-frequency table.
inline PosteriorSummary summarize(const ChainOutput& chain) {
  return detail::summarize_if(chain, [](const ParameterState&) { return true; });
}

/// Variables with PIP strictly greater than 0.5.
inline ModelId median_model(const PosteriorSummary& summary) {
  ModelId m;
  for (Eigen::Index k = 0; k < summary.pip_S.size(); ++k) m.included_S.push_back(summary.pip_S[k] > 0.5);
  for (Eigen::Index j = 0; j < summary.pip_O.size(); ++j) m.included_O.push_back(summary.pip_O[j] > 0.5);
  return m;
}

/// Summary over the draws whose inclusion pattern equals `model`.
inline PosteriorSummary conditional_summary(const ChainOutput& chain, const ModelId& model) {
  if (model.included_S.size() != static_cast<std::size_t>(chain.q) ||
      model.included_O.size() != static_cast<std::size_t>(chain.p)) {
    throw ParameterError("conditional_summary: model width does not match the chain");
  }
  PosteriorSummary out;
  try {
    out = detail::summarize_if(chain, [&](const ParameterState& d) {
      return d.gamma_S == model.included_S && d.gamma_O == model.included_O;
    });
  } catch (const ParameterError&) {
    throw ParameterError("conditional_summary: model " + model.label() + " was never sampled");
  }
  out.conditioned_on = model;
  return out;
}

/// n x T matrix of log p(row i | draw t).
inline Eigen::MatrixXd pointwise_log_predictive(const ChainOutput& chain, const Dataset& data) {
  Eigen::MatrixXd out(data.n(), static_cast<Eigen::Index>(chain.draws.size()));
  for (std::size_t t = 0; t < chain.draws.size(); ++t) {
    out.col(static_cast<Eigen::Index>(t)) = pointwise_loglik(chain.draws[t].natural(), data);
  }
  return out;
}

struct LooResult {
  double elpd_loo = 0.0;
  Eigen::VectorXd per_point;
};

/// Plain importance-sampling leave-one-out:
///   per_point_i = -log mean_t exp(-lpd(i,t)),  elpd_loo = sum_i per_point_i.
/// No Pareto smoothing; heavy-tailed weights make the estimate noisy.
inline LooResult loo_estimate(const Eigen::MatrixXd& lpd, long min_draws = 100) {
  if (lpd.cols() < min_draws || lpd.cols() == 0) {
    throw ParameterError("loo_estimate: need at least " + std::to_string(std::max(min_draws, 1L)) + " draws");
  }
  if (!lpd.allFinite()) throw NumericalError("loo_estimate: non-finite log density");
  LooResult res;
  res.per_point.resize(lpd.rows());
  const double log_t = std::log(static_cast<double>(lpd.cols()));
  for (Eigen::Index i = 0; i < lpd.rows(); ++i) {
    const Eigen::ArrayXd neg = -lpd.row(i).transpose().array();
    const double m = neg.maxCoeff();
    const double lse = m + std::log((neg - m).exp().sum());
    res.per_point[i] = -(lse - log_t);
  }
  res.elpd_loo = res.per_point.sum();
  return res;
}

/// log mean_t exp(lpd(i,t)) per row: the in-sample log pointwise predictive density.
inline Eigen::VectorXd in_sample_lpd(const Eigen::MatrixXd& lpd) {
  Eigen::VectorXd out(lpd.rows());
  const double log_t = std::log(static_cast<double>(lpd.cols()));
  for (Eigen::Index i = 0; i < lpd.rows(); ++i) {
    const double m = lpd.row(i).maxCoeff();
    out[i] = m + std::log((lpd.row(i).array() - m).exp().sum()) - log_t;
  }
  return out;
}

/// PIP / Est. / S.D. table, one block per equation.
inline void write_summary_table(std::ostream& os, const PosteriorSummary& s,
                                const std::vector<std::string>& selection_names,
                                const std::vector<std::string>& outcome_names) {
  const auto cond = s.conditioned_on;
  auto row = [&](const std::string& name, const std::string& pip, const Stat& st) {
    os << std::left << std::setw(16) << name << std::right << std::setw(8) << pip << std::setw(12)
       << std::fixed << std::setprecision(4) << st.mean << std::setw(12) << st.sd << '\n';
  };
  auto fmt = [](double x) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(3) << x;
    return o.str();
  };
  os << "draws " << s.draws;
  if (cond) os << "  model " << cond->label();
  os << '\n';
  os << std::left << std::setw(16) << "" << std::right << std::setw(8) << "PIP" << std::setw(12) << "Est."
     << std::setw(12) << "S.D." << '\n';
  os << "Selection\n";
  row("(Intercept)", "-", s.alpha0);
  for (std::size_t k = 0; k < s.alpha.size(); ++k) {
    if (cond && !cond->included_S[k]) continue;
    row(selection_names[k], fmt(s.pip_S[static_cast<Eigen::Index>(k)]), s.alpha[k]);
  }
  os << "Outcome\n";
  row("(Intercept)", "-", s.beta0);
  for (std::size_t j = 0; j < s.beta.size(); ++j) {
    if (cond && !cond->included_O[j]) continue;
    row(outcome_names[j], fmt(s.pip_O[static_cast<Eigen::Index>(j)]), s.beta[j]);
  }
  row("sigma", "-", s.sigma);
  row("rho", "-", s.rho);
  os.unsetf(std::ios::floatfield);
}

/// Machine-readable `key = value` lines.
inline void write_summary_kv(std::ostream& os, const PosteriorSummary& s,
                             const std::vector<std::string>& selection_names,
                             const std::vector<std::string>& outcome_names) {
  os << std::setprecision(17);
  os << "draws = " << s.draws << '\n';
  os << "alpha0.mean = " << s.alpha0.mean << "\nalpha0.sd = " << s.alpha0.sd << '\n';
  for (std::size_t k = 0; k < s.alpha.size(); ++k) {
    const auto& nm = selection_names[k];
    os << "selection." << nm << ".pip = " << s.pip_S[static_cast<Eigen::Index>(k)] << '\n'
       << "selection." << nm << ".mean = " << s.alpha[k].mean << '\n'
       << "selection." << nm << ".sd = " << s.alpha[k].sd << '\n';
  }
  os << "beta0.mean = " << s.beta0.mean << "\nbeta0.sd = " << s.beta0.sd << '\n';
  for (std::size_t j = 0; j < s.beta.size(); ++j) {
    const auto& nm = outcome_names[j];
    os << "outcome." << nm << ".pip = " << s.pip_O[static_cast<Eigen::Index>(j)] << '\n'
       << "outcome." << nm << ".mean = " << s.beta[j].mean << '\n'
       << "outcome." << nm << ".sd = " << s.beta[j].sd << '\n';
  }
  os << "sigma.mean = " << s.sigma.mean << "\nsigma.sd = " << s.sigma.sd << '\n';
  os << "rho.mean = " << s.rho.mean << "\nrho.sd = " << s.rho.sd << '\n';
  const ModelId med = median_model(s);
  os << "median_model = " << med.label() << '\n';
}

inline void write_model_table(std::ostream& os, const PosteriorSummary& s, std::size_t max_rows = 50) {
  os << "rank\tcount\tfreq\tsize_S\tsize_O\tmodel\n";
  for (std::size_t r = 0; r < std::min(max_rows, s.model_table.size()); ++r) {
    const auto& [m, c] = s.model_table[r];
    os << r + 1 << '\t' << c << '\t' << std::setprecision(4)
       << static_cast<double>(c) / static_cast<double>(s.draws) << '\t' << m.size_S() << '\t' << m.size_O() << '\t'
       << m.label() << '\n';
  }
}

}  // namespace heckss
