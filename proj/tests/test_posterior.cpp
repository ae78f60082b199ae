#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "heckss/posterior.hpp"
#include "support.hpp"

using namespace heckss;

namespace {

ChainOutput empty_chain(Eigen::Index p, Eigen::Index q) {
  ChainOutput c;
  c.p = p;
  c.q = q;
  return c;
}

ParameterState draw(Eigen::Index p, Eigen::Index q) { return ParameterState::zeros(p, q, 0); }

Dataset small_data(RngStream& rng, Eigen::Index n, Eigen::Index p, Eigen::Index q) {
  Eigen::MatrixXd X(n, p), W(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) X(i, j) = rng.normal();
    for (Eigen::Index k = 0; k < q; ++k) W(i, k) = rng.normal();
  }
  std::vector<std::uint8_t> s(static_cast<std::size_t>(n));
  std::vector<std::optional<double>> y(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    s[static_cast<std::size_t>(i)] = rng.uniform() < 0.6;
    if (s[static_cast<std::size_t>(i)]) y[static_cast<std::size_t>(i)] = rng.normal();
  }
  return Dataset(X, W, s, y);
}

}  // namespace

TEST(Summarize, PipCountsAndMedianModel) {
  ChainOutput c = empty_chain(1, 1);
  for (int t = 0; t < 1000; ++t) {
    ParameterState d = draw(1, 1);
    d.gamma_S[0] = t < 571;
    d.gamma_O[0] = t < 500;
    c.draws.push_back(d);
  }
  const PosteriorSummary s = summarize(c);
  EXPECT_DOUBLE_EQ(s.pip_S[0], 0.571);
  EXPECT_DOUBLE_EQ(s.pip_O[0], 0.5);
  const ModelId m = median_model(s);
  EXPECT_EQ(m.included_S[0], 1);
  EXPECT_EQ(m.included_O[0], 0);  // exactly one half is excluded
  long total = 0;
  for (const auto& [id, count] : s.model_table) total += count;
  EXPECT_EQ(total, 1000);
  EXPECT_EQ(s.model_table.front().second, 500);
  for (std::size_t r = 1; r < s.model_table.size(); ++r) {
    EXPECT_GE(s.model_table[r - 1].second, s.model_table[r].second);
  }
}

TEST(Summarize, FullModelAndIdenticalDraws) {
  ChainOutput c = empty_chain(3, 2);
  ParameterState d = draw(3, 2);
  std::fill(d.gamma_S.begin(), d.gamma_S.end(), 1);
  std::fill(d.gamma_O.begin(), d.gamma_O.end(), 1);
  d.beta << 0.1, 0.2, 0.3;
  d.rho_tilde = 0.4;
  for (int t = 0; t < 10; ++t) c.draws.push_back(d);
  const PosteriorSummary s = summarize(c);
  const ModelId m = median_model(s);
  EXPECT_EQ(m.size_S(), 2);
  EXPECT_EQ(m.size_O(), 3);
  EXPECT_EQ(s.beta[2].sd, 0.0);
  EXPECT_EQ(s.rho.sd, 0.0);
  EXPECT_EQ(s.model_table.size(), 1u);
  EXPECT_THROW(summarize(empty_chain(3, 2)), ParameterError);
}

TEST(Summarize, NaturalScaleTransformPerDraw) {
  RngStream rng(51, 0);
  ChainOutput c = empty_chain(1, 1);
  std::vector<double> sig, rho;
  for (int t = 0; t < 500; ++t) {
    ParameterState d = draw(1, 1);
    d.rho_tilde = rng.normal();
    d.sigma_tilde_sq = 0.2 + rng.uniform();
    const double s = std::sqrt(d.sigma_tilde_sq + d.rho_tilde * d.rho_tilde);
    sig.push_back(s);
    rho.push_back(d.rho_tilde / s);
    c.draws.push_back(d);
  }
  const PosteriorSummary s = summarize(c);
  EXPECT_NEAR(s.sigma.mean, oracle::mean_of(sig), 1e-12);
  EXPECT_NEAR(s.rho.mean, oracle::mean_of(rho), 1e-12);
  EXPECT_NEAR(s.rho.sd, std::sqrt(oracle::var_of(rho)), 1e-12);
}

TEST(Summarize, MedianModelInvariantUnderPermutation) {
  RngStream rng(52, 0);
  ChainOutput c = empty_chain(4, 4);
  for (int t = 0; t < 301; ++t) {
    ParameterState d = draw(4, 4);
    for (auto& g : d.gamma_S) g = rng.uniform() < 0.5;
    for (auto& g : d.gamma_O) g = rng.uniform() < 0.5;
    c.draws.push_back(d);
  }
  const ModelId base = median_model(summarize(c));
  std::mt19937_64 shuffler(3);
  for (int k = 0; k < 20; ++k) {
    std::shuffle(c.draws.begin(), c.draws.end(), shuffler);
    EXPECT_EQ(median_model(summarize(c)), base);
  }
}

TEST(ConditionalSummary, TwoModelConstruction) {
  ChainOutput c = empty_chain(2, 1);
  for (int t = 0; t < 300; ++t) {
    ParameterState d = draw(2, 1);
    const bool first = t % 3 != 0;
    d.gamma_O = {1, static_cast<std::uint8_t>(first ? 0 : 1)};
    d.gamma_S = {1};
    d.beta << (first ? 1.0 : -2.0) + 0.01 * (t % 5 - 2), 0.5;
    c.draws.push_back(d);
  }
  const PosteriorSummary all = summarize(c);
  const ModelId top = all.model_table.front().first;
  const PosteriorSummary cs = conditional_summary(c, top);
  EXPECT_EQ(cs.draws, all.model_table.front().second);
  EXPECT_EQ(cs.draws, 200);
  EXPECT_NEAR(cs.beta[0].mean, 1.0, 1e-12);
  const PosteriorSummary other = conditional_summary(c, ModelId{{1}, {1, 1}});
  EXPECT_NEAR(other.beta[0].mean, -2.0, 1e-12);
  try {
    conditional_summary(c, ModelId{{0}, {0, 0}});
    FAIL();
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("S:0|O:00"), std::string::npos);
  }
}

TEST(ConditionalSummary, SingleModelEqualsUnconditional) {
  RngStream rng(53, 0);
  ChainOutput c = empty_chain(2, 2);
  for (int t = 0; t < 100; ++t) {
    ParameterState d = draw(2, 2);
    d.gamma_O = {1, 0};
    d.gamma_S = {0, 1};
    d.beta << rng.normal(), rng.normal();
    d.alpha << rng.normal(), rng.normal();
    c.draws.push_back(d);
  }
  const auto a = summarize(c), b = conditional_summary(c, ModelId{{0, 1}, {1, 0}});
  EXPECT_EQ(a.beta[0].mean, b.beta[0].mean);
  EXPECT_EQ(a.alpha[1].sd, b.alpha[1].sd);
  std::ostringstream os;
  write_summary_table(os, b, {"w1", "w2"}, {"x1", "x2"});
  EXPECT_EQ(os.str().find("w1"), std::string::npos);
  EXPECT_NE(os.str().find("w2"), std::string::npos);
}

TEST(LogPredictive, ColumnsSumToLikelihood) {
  RngStream rng(54, 0);
  const Dataset d = small_data(rng, 30, 2, 3);
  ChainOutput c = empty_chain(2, 3);
  for (int t = 0; t < 20; ++t) {
    ParameterState s = draw(2, 3);
    s.alpha0 = rng.normal();
    s.alpha << rng.normal(), rng.normal(), rng.normal();
    s.beta0 = rng.normal();
    s.beta << rng.normal(), rng.normal();
    s.rho_tilde = rng.normal() * 0.5;
    s.sigma_tilde_sq = 0.5 + rng.uniform();
    c.draws.push_back(s);
  }
  const Eigen::MatrixXd lpd = pointwise_log_predictive(c, d);
  for (Eigen::Index t = 0; t < lpd.cols(); ++t) {
    const NaturalParams np = c.draws[static_cast<std::size_t>(t)].natural();
    EXPECT_NEAR(lpd.col(t).sum(), log_likelihood(np, d), 1e-9);
    for (Eigen::Index i = 0; i < 5; ++i) {
      const double mu = np.alpha0 + d.W().row(i).dot(np.alpha);
      const double xb = np.beta0 + d.X().row(i).dot(np.beta);
      EXPECT_NEAR(lpd(i, t),
                  oracle::quadrature_row_loglik(mu, xb, np.sigma, np.rho, d.selected(i), d.selected(i) ? *d.y(i) : 0),
                  1e-6);
    }
  }
}

TEST(LogPredictive, MissingRowAtZeroIndex) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(2, 1), W = Eigen::MatrixXd::Zero(2, 1);
  const Dataset d(X, W, {0, 1}, {std::nullopt, 0.3});
  ChainOutput c = empty_chain(1, 1);
  for (int t = 0; t < 3; ++t) {
    ParameterState s = draw(1, 1);
    s.beta[0] = t;
    s.rho_tilde = 0.1 * t;
    c.draws.push_back(s);
  }
  const Eigen::MatrixXd lpd = pointwise_log_predictive(c, d);
  for (Eigen::Index t = 0; t < 3; ++t) EXPECT_NEAR(lpd(0, t), -std::log(2.0), 1e-15);
}

TEST(Loo, Arithmetic) {
  Eigen::MatrixXd two(1, 2);
  two << 0, -1;
  EXPECT_NEAR(loo_estimate(two, 2).per_point[0], -std::log((1 + std::exp(1.0)) / 2), 1e-14);
  EXPECT_THROW(loo_estimate(two), ParameterError);
  Eigen::MatrixXd constant(3, 150);
  constant.row(0).setConstant(-1.25);
  constant.row(1).setConstant(0.5);
  constant.row(2).setConstant(-7);
  const LooResult r = loo_estimate(constant);
  EXPECT_NEAR(r.per_point[0], -1.25, 1e-13);
  EXPECT_NEAR(r.per_point[2], -7, 1e-13);
  EXPECT_NEAR(r.elpd_loo, -7.75, 1e-12);
  constant(1, 3) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(loo_estimate(constant), NumericalError);
}

// y_i ~ N(mu, 1), mu ~ N(0, s0^2): exact leave-one-out predictive is normal.
TEST(Loo, MatchesExactLeaveOneOutInNormalModel) {
  RngStream rng(55, 0);
  const int n = 20, T = 40000;
  const double s0sq = 4.0;
  std::vector<double> y(n);
  for (auto& v : y) v = 0.7 + rng.normal();
  const double sum = std::accumulate(y.begin(), y.end(), 0.0);
  const double post_var = 1 / (1 / s0sq + n), post_mean = post_var * sum;
  Eigen::MatrixXd lpd(n, T);
  for (int t = 0; t < T; ++t) {
    const double mu = post_mean + std::sqrt(post_var) * rng.normal();
    for (int i = 0; i < n; ++i) lpd(i, t) = -0.5 * std::log(2 * M_PI) - 0.5 * (y[i] - mu) * (y[i] - mu);
  }
  const LooResult r = loo_estimate(lpd);
  const Eigen::VectorXd ins = in_sample_lpd(lpd);
  for (int i = 0; i < n; ++i) {
    const double v = 1 / (1 / s0sq + n - 1), m = v * (sum - y[i]);
    const double exact = -0.5 * std::log(2 * M_PI * (v + 1)) - 0.5 * (y[i] - m) * (y[i] - m) / (v + 1);
    EXPECT_NEAR(r.per_point[i], exact, 0.01) << i;
    EXPECT_LE(r.per_point[i], ins[i]);
  }
}

TEST(Loo, NeverExceedsInSample) {
  RngStream rng(56, 0);
  for (int rep = 0; rep < 200; ++rep) {
    Eigen::MatrixXd lpd(5, 100);
    for (Eigen::Index i = 0; i < lpd.size(); ++i) lpd.data()[i] = -std::fabs(rng.normal() * 3);
    const LooResult r = loo_estimate(lpd);
    const Eigen::VectorXd ins = in_sample_lpd(lpd);
    for (Eigen::Index i = 0; i < 5; ++i) ASSERT_LE(r.per_point[i], ins[i] + 1e-12);
  }
}

TEST(Writers, KeyValueAndModelTable) {
  ChainOutput c = empty_chain(1, 1);
  for (int t = 0; t < 4; ++t) {
    ParameterState d = draw(1, 1);
    d.gamma_O[0] = t % 2;
    c.draws.push_back(d);
  }
  const auto s = summarize(c);
  std::ostringstream kv, mt;
  write_summary_kv(kv, s, {"w"}, {"x"});
  write_model_table(mt, s);
  EXPECT_NE(kv.str().find("outcome.x.pip = 0.5"), std::string::npos);
  EXPECT_NE(mt.str().find("S:0|O:1"), std::string::npos);
  EXPECT_NE(mt.str().find("S:0|O:0"), std::string::npos);
}
