#pragma once

// Forward stepwise AIC selection over both equations, and selection scores.

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <ostream>
#include <vector>

#include "heckss/dataset.hpp"
#include "heckss/errors.hpp"
#include "heckss/fit.hpp"
#include "heckss/posterior.hpp"

namespace heckss {

enum class Equation { Selection, Outcome };

inline const char* equation_name(Equation e) { return e == Equation::Selection ? "selection" : "outcome"; }

struct StepwiseStep {
  Equation equation;
  Eigen::Index index;  // 0-based column in the full design
  double aic;
};

struct StepwiseTrace {
  double null_aic = 0.0;
  std::vector<StepwiseStep> steps;
  ModelId final_model;
  FitResult final_fit;
  int candidate_failures = 0;  // non-converged candidate fits that were skipped
};

/// AIC = 2k - 2 loglik, k = slopes + two intercepts + sigma + rho.
inline double aic(double loglik, long n_slopes) { return 2.0 * static_cast<double>(n_slopes + 4) - 2.0 * loglik; }

namespace detail {

// Incumbent parameters with a zero coefficient inserted for the candidate.
inline NaturalParams warm_start(const NaturalParams& cur, const std::vector<Eigen::Index>& cols, Eigen::Index added,
                                bool selection) {
  NaturalParams np = cur;
  const Eigen::VectorXd& old = selection ? cur.alpha : cur.beta;
  Eigen::VectorXd grown(old.size() + 1);
  Eigen::Index pos = 0;
  while (pos < old.size() && cols[static_cast<std::size_t>(pos)] < added) ++pos;
  grown.head(pos) = old.head(pos);
  grown[pos] = 0.0;
  grown.tail(old.size() - pos) = old.tail(old.size() - pos);
  (selection ? np.alpha : np.beta) = grown;
  return np;
}

inline std::vector<Eigen::Index> with_added(std::vector<Eigen::Index> cols, Eigen::Index j) {
  cols.insert(std::upper_bound(cols.begin(), cols.end(), j), j);
  return cols;
}

}  // namespace detail

/// Start from the intercepts-only model; each round fits the MLE for every
/// single-variable addition to either equation and keeps the lowest-AIC
/// candidate if it improves on the incumbent. Ties go to the selection
/// equation, then to the lower index. Candidates are warm-started from the
/// incumbent fit; non-converged candidates are skipped.
///
/// Throws ConvergenceError if the null model fit does not converge.
inline StepwiseTrace forward_stepwise(const Dataset& data) {
  data.require_fittable();
  std::vector<Eigen::Index> S, O;
  StepwiseTrace trace;
  FitResult cur = mle_fit(data.with_columns(O, S));
  if (!cur.converged) throw ConvergenceError("stepwise: null model fit did not converge");
  double cur_aic = aic(cur.loglik, 0);
  trace.null_aic = cur_aic;

  for (;;) {
    double best_aic = cur_aic;
    std::optional<StepwiseStep> best;
    FitResult best_fit;
    auto consider = [&](Equation eq, Eigen::Index j) {
      const bool sel = eq == Equation::Selection;
      const auto S2 = sel ? detail::with_added(S, j) : S;
      const auto O2 = sel ? O : detail::with_added(O, j);
      const NaturalParams init = detail::warm_start(cur.params, sel ? S : O, j, sel);
      FitResult f = mle_fit(data.with_columns(O2, S2), init);
      if (!f.converged) {
        ++trace.candidate_failures;
        return;
      }
      const double a = aic(f.loglik, static_cast<long>(S2.size() + O2.size()));
      if (a < best_aic) {
        best_aic = a;
        best = StepwiseStep{eq, j, a};
        best_fit = std::move(f);
      }
    };
    for (Eigen::Index k = 0; k < data.q(); ++k) {
      if (!std::binary_search(S.begin(), S.end(), k)) consider(Equation::Selection, k);
    }
    for (Eigen::Index j = 0; j < data.p(); ++j) {
      if (!std::binary_search(O.begin(), O.end(), j)) consider(Equation::Outcome, j);
    }
    if (!best) break;
    if (best->equation == Equation::Selection) {
      S = detail::with_added(S, best->index);
    } else {
      O = detail::with_added(O, best->index);
    }
    trace.steps.push_back(*best);
    cur = std::move(best_fit);
    cur_aic = best_aic;
  }
  trace.final_fit = cur;
  trace.final_model.included_S.assign(static_cast<std::size_t>(data.q()), 0);
  trace.final_model.included_O.assign(static_cast<std::size_t>(data.p()), 0);
  for (auto k : S) trace.final_model.included_S[static_cast<std::size_t>(k)] = 1;
  for (auto j : O) trace.final_model.included_O[static_cast<std::size_t>(j)] = 1;
  return trace;
}

inline void write_trace(std::ostream& os, const StepwiseTrace& t, const Dataset& data) {
  os << std::setprecision(10);
  os << "step 0 null aic " << t.null_aic << '\n';
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const auto& s = t.steps[k];
    const auto& names = s.equation == Equation::Selection ? data.selection_names() : data.outcome_names();
    os << "step " << k + 1 << ' ' << equation_name(s.equation) << ' ' << names[static_cast<std::size_t>(s.index)]
       << " aic " << s.aic << '\n';
  }
}

/// Per-replicate contribution for one equation.
struct EquationScore {
  double tpr = 1.0;  // 1 when there are no active variables
  double tnr = 1.0;  // 1 when there are no inactive variables
  bool exact = false;
  long size = 0;
};

struct SelectionScore {
  EquationScore selection, outcome;
};

inline EquationScore score_equation(const std::vector<std::uint8_t>& selected, const std::vector<std::uint8_t>& truth) {
  if (selected.size() != truth.size()) throw ParameterError("score_selection: mask widths differ");
  long active = 0, inactive = 0, tp = 0, tn = 0;
  EquationScore s;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    if (truth[j]) {
      ++active;
      tp += selected[j] != 0;
    } else {
      ++inactive;
      tn += selected[j] == 0;
    }
    s.size += selected[j] != 0;
  }
  if (active) s.tpr = static_cast<double>(tp) / static_cast<double>(active);
  if (inactive) s.tnr = static_cast<double>(tn) / static_cast<double>(inactive);
  s.exact = tp == active && tn == inactive;
  return s;
}

inline SelectionScore score_selection(const ModelId& selected, const ModelId& truth) {
  return {score_equation(selected.included_S, truth.included_S), score_equation(selected.included_O, truth.included_O)};
}

/// Aggregates over replicates for one equation. Failed replicates count
/// toward failure_rate only.
struct SelectionMetrics {
  double tpr = 0.0, tnr = 0.0, tmr = 0.0, mean_size = 0.0, failure_rate = 0.0;
  long scored = 0, failures = 0;
};

class MetricsAccumulator {
 public:
  void add(const EquationScore& s) {
    ++n_;
    tpr_ += s.tpr;
    tnr_ += s.tnr;
    tmr_ += s.exact ? 1.0 : 0.0;
    size_ += static_cast<double>(s.size);
  }
  void add_failure() { ++failures_; }

  SelectionMetrics result() const {
    SelectionMetrics m;
    m.scored = n_;
    m.failures = failures_;
    if (n_) {
      const double n = static_cast<double>(n_);
      m.tpr = tpr_ / n;
      m.tnr = tnr_ / n;
      m.tmr = tmr_ / n;
      m.mean_size = size_ / n;
    }
    if (n_ + failures_) m.failure_rate = static_cast<double>(failures_) / static_cast<double>(n_ + failures_);
    return m;
  }

 private:
  long n_ = 0, failures_ = 0;
  double tpr_ = 0.0, tnr_ = 0.0, tmr_ = 0.0, size_ = 0.0;
};

}  // namespace heckss
