#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heckss/errors.hpp"

namespace heckss {

/// Observed data of a sample selection model.
///
/// Row i carries outcome covariates x_i (row of X), selection covariates w_i
/// (row of W), the selection indicator s_i and the outcome y_i, which is
/// present exactly when s_i = 1. Missing outcomes are std::nullopt, never a
/// sentinel. Immutable after construction.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd X, Eigen::MatrixXd W, std::vector<std::uint8_t> s,
          std::vector<std::optional<double>> y, std::vector<std::string> outcome_names = {},
          std::vector<std::string> selection_names = {})
      : X_(std::move(X)),
        W_(std::move(W)),
        s_(std::move(s)),
        y_(std::move(y)),
        outcome_names_(std::move(outcome_names)),
        selection_names_(std::move(selection_names)) {
    const auto n = static_cast<std::size_t>(X_.rows());
    if (n == 0) throw ParameterError("dataset: need at least one row");
    if (static_cast<std::size_t>(W_.rows()) != n || s_.size() != n || y_.size() != n) {
      throw ParameterError("dataset: X, W, s and y must have the same number of rows");
    }
    if (!X_.allFinite() || !W_.allFinite()) throw ParameterError("dataset: non-finite covariate");
    for (std::size_t i = 0; i < n; ++i) {
      if (s_[i] > 1) throw ParameterError("dataset: s must be 0/1 (row " + std::to_string(i + 1) + ")");
      if (y_[i].has_value() != (s_[i] == 1)) {
        throw ParameterError("dataset: outcome must be present iff s = 1 (row " +
                             std::to_string(i + 1) + ")");
      }
      if (y_[i] && !std::isfinite(*y_[i])) {
        throw ParameterError("dataset: non-finite outcome (row " + std::to_string(i + 1) + ")");
      }
      (s_[i] ? observed_ : missing_).push_back(static_cast<Eigen::Index>(i));
    }
    if (outcome_names_.empty()) outcome_names_ = default_names("x", X_.cols());
    if (selection_names_.empty()) selection_names_ = default_names("w", W_.cols());
    if (outcome_names_.size() != static_cast<std::size_t>(X_.cols()) ||
        selection_names_.size() != static_cast<std::size_t>(W_.cols())) {
      throw ParameterError("dataset: column name count does not match covariates");
    }
  }

  Eigen::Index n() const noexcept { return X_.rows(); }
  Eigen::Index p() const noexcept { return X_.cols(); }
  Eigen::Index q() const noexcept { return W_.cols(); }

  const Eigen::MatrixXd& X() const noexcept { return X_; }
  const Eigen::MatrixXd& W() const noexcept { return W_; }
  bool selected(Eigen::Index i) const { return s_[static_cast<std::size_t>(i)] == 1; }
  const std::optional<double>& y(Eigen::Index i) const { return y_[static_cast<std::size_t>(i)]; }
  std::span<const std::uint8_t> s() const noexcept { return s_; }

  // Row indices with s = 1 / s = 0, ascending.
  std::span<const Eigen::Index> observed() const noexcept { return observed_; }
  std::span<const Eigen::Index> missing() const noexcept { return missing_; }
  Eigen::Index n_observed() const noexcept { return static_cast<Eigen::Index>(observed_.size()); }

  const std::vector<std::string>& outcome_names() const noexcept { return outcome_names_; }
  const std::vector<std::string>& selection_names() const noexcept { return selection_names_; }

  // Observed outcomes in the order of observed().
  Eigen::VectorXd observed_y() const {
    Eigen::VectorXd out(n_observed());
    for (Eigen::Index k = 0; k < out.size(); ++k) out[k] = *y_[static_cast<std::size_t>(observed_[k])];
    return out;
  }

  // Likelihood-based fitting needs both selected and unselected rows.
  void require_fittable() const {
    if (observed_.empty() || missing_.empty()) {
      throw ParameterError("dataset: model fitting needs at least one s = 1 and one s = 0 row");
    }
  }

  /// Same rows, covariates restricted to the given column indices.
  Dataset with_columns(std::span<const Eigen::Index> outcome_cols,
                       std::span<const Eigen::Index> selection_cols) const {
    Eigen::MatrixXd X(n(), static_cast<Eigen::Index>(outcome_cols.size()));
    Eigen::MatrixXd W(n(), static_cast<Eigen::Index>(selection_cols.size()));
    std::vector<std::string> xn, wn;
    for (std::size_t j = 0; j < outcome_cols.size(); ++j) {
      X.col(static_cast<Eigen::Index>(j)) = X_.col(outcome_cols[j]);
      xn.push_back(outcome_names_[static_cast<std::size_t>(outcome_cols[j])]);
    }
    for (std::size_t k = 0; k < selection_cols.size(); ++k) {
      W.col(static_cast<Eigen::Index>(k)) = W_.col(selection_cols[k]);
      wn.push_back(selection_names_[static_cast<std::size_t>(selection_cols[k])]);
    }
    return Dataset(std::move(X), std::move(W), s_, y_, std::move(xn), std::move(wn));
  }

  /// Same outcomes, replacement covariates (used by standardization).
  Dataset with_covariates(Eigen::MatrixXd X, Eigen::MatrixXd W) const {
    return Dataset(std::move(X), std::move(W), s_, y_, outcome_names_, selection_names_);
  }

 private:
  static std::vector<std::string> default_names(const std::string& prefix, Eigen::Index count) {
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < count; ++j) names.push_back(prefix + std::to_string(j + 1));
    return names;
  }

  Eigen::MatrixXd X_;
  Eigen::MatrixXd W_;
  std::vector<std::uint8_t> s_;
  std::vector<std::optional<double>> y_;
  std::vector<std::string> outcome_names_;
  std::vector<std::string> selection_names_;
  std::vector<Eigen::Index> observed_;
  std::vector<Eigen::Index> missing_;
};

/// Center and scale every covariate column by its full-sample mean and
/// sample standard deviation. Constant columns are centered only.
inline Dataset standardize(const Dataset& data) {
  auto scale = [](Eigen::MatrixXd m) {
    const double n = static_cast<double>(m.rows());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double mean = m.col(j).mean();
      m.col(j).array() -= mean;
      const double sd = n > 1 ? std::sqrt(m.col(j).squaredNorm() / (n - 1.0)) : 0.0;
      if (sd > 0.0) m.col(j) /= sd;
    }
    return m;
  };
  return data.with_covariates(scale(data.X()), scale(data.W()));
}

}  // namespace heckss
