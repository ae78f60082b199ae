#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <sstream>

#include "heckss/errors.hpp"
#include "heckss/rng.hpp"

namespace heckss {

/// Cholesky factor of a symmetric positive-definite matrix. On failure the
/// diagonal is inflated by 1e-10 * mean(diag), then 10x more, up to three
/// retries; after that a NumericalError reports the spectrum.
inline Eigen::LLT<Eigen::MatrixXd> cholesky_with_jitter(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw ParameterError("cholesky: matrix is not square");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  auto usable = [](const Eigen::LLT<Eigen::MatrixXd>& f) {
    return f.info() == Eigen::Success && f.matrixLLT().diagonal().allFinite() &&
           (f.matrixLLT().diagonal().array() > 0.0).all();
  };
  if (usable(llt)) return llt;
  const double mean_diag = m.diagonal().mean();
  double jitter = 1e-10 * (mean_diag > 0.0 && std::isfinite(mean_diag) ? mean_diag : 1.0);
  for (int retry = 0; retry < 3; ++retry, jitter *= 10.0) {
    Eigen::MatrixXd bumped = m;
    bumped.diagonal().array() += jitter;
    llt.compute(bumped);
    if (usable(llt)) return llt;
  }
  std::ostringstream msg;
  msg << "cholesky failed after jitter (dim " << m.rows() << ")";
  if (m.allFinite()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    msg << "; eigenvalues in [" << ev.minCoeff() << ", " << ev.maxCoeff() << "]";
    const double smallest = ev.cwiseAbs().minCoeff();
    msg << ", condition number "
        << (smallest > 0.0 ? ev.cwiseAbs().maxCoeff() / smallest : std::numeric_limits<double>::infinity());
  } else {
    msg << "; matrix has non-finite entries";
  }
  throw NumericalError(msg.str());
}

inline Eigen::VectorXd standard_normal_vector(Eigen::Index dim, RngStream& rng) {
  Eigen::VectorXd z(dim);
  for (Eigen::Index i = 0; i < dim; ++i) z[i] = rng.normal();
  return z;
}

/// Draw from N(mean, cov).
inline Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                  RngStream& rng) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw ParameterError("mvn: covariance dimension does not match mean");
  }
  const auto llt = cholesky_with_jitter(cov);
  return mean + llt.matrixL() * standard_normal_vector(mean.size(), rng);
}

/// Draw from N(Q^{-1} h, Q^{-1}) given the precision Q and linear term h.
/// This is the form every Gibbs coefficient block arrives in; one Cholesky
/// of Q gives both the mean and the draw.
inline Eigen::VectorXd sample_mvn_canonical(const Eigen::MatrixXd& precision,
                                            const Eigen::VectorXd& linear, RngStream& rng,
                                            Eigen::VectorXd* mean_out = nullptr) {
  const auto llt = cholesky_with_jitter(precision);
  Eigen::VectorXd mean = llt.solve(linear);
  Eigen::VectorXd z = standard_normal_vector(linear.size(), rng);
  // Q = L L'  =>  L'^{-1} z has covariance Q^{-1}.
  Eigen::VectorXd draw = mean + llt.matrixU().solve(z);
  if (mean_out) *mean_out = std::move(mean);
  return draw;
}

}  // namespace heckss
