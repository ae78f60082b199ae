#include <gtest/gtest.h>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/inverse_gamma.hpp>
#include <boost/math/distributions/inverse_gaussian.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "heckss/distributions.hpp"
#include "heckss/mvn.hpp"
#include "heckss/normal.hpp"
#include "support.hpp"

using namespace heckss;
using heckss::oracle::ks_pvalue;
using heckss::oracle::mean_of;
using heckss::oracle::var_of;

namespace bm = boost::math;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kKsLevel = 1e-3;

template <class F>
std::vector<double> draw(std::size_t n, F&& f) {
  std::vector<double> x(n);
  for (auto& v : x) v = f();
  return x;
}

// CDF of N(mu, sd^2) restricted to (a, b), accurate in the tails.
double truncated_cdf(double x, double mu, double sd, double a, double b) {
  const bm::normal_distribution<> nd;
  const double za = (a - mu) / sd, zb = (b - mu) / sd, z = (x - mu) / sd;
  if (za > 0) {
    const double qa = bm::cdf(bm::complement(nd, za));
    const double qb = std::isinf(zb) ? 0.0 : bm::cdf(bm::complement(nd, zb));
    return (qa - bm::cdf(bm::complement(nd, z))) / (qa - qb);
  }
  const double pa = std::isinf(za) ? 0.0 : bm::cdf(nd, za);
  const double pb = std::isinf(zb) ? 1.0 : bm::cdf(nd, zb);
  return (bm::cdf(nd, z) - pa) / (pb - pa);
}

}  // namespace

TEST(TruncatedNormal, HalfNormalMean) {
  RngStream rng(1, 0);
  const auto x = draw(1000000, [&] { return sample_truncated_normal(0, 1, {0, kInf}, rng); });
  EXPECT_NEAR(mean_of(x), std::sqrt(2.0 / M_PI), 0.003);
  EXPECT_TRUE(std::all_of(x.begin(), x.end(), [](double v) { return v > 0; }));
}

TEST(TruncatedNormal, NegativeHalfLine) {
  RngStream rng(2, 0);
  const auto x = draw(1000000, [&] { return sample_truncated_normal(0, 1, {-kInf, 0}, rng); });
  EXPECT_TRUE(std::all_of(x.begin(), x.end(), [](double v) { return v < 0; }));
  EXPECT_NEAR(mean_of(x), -std::sqrt(2.0 / M_PI), 0.003);
}

TEST(TruncatedNormal, ShiftedMeanMatchesQuadrature) {
  // E[X | X > 0] for X ~ N(-5, 1), by direct integration of the truncated density.
  auto dens = [](double x) { return std::exp(-0.5 * (x + 5) * (x + 5)); };
  const double mass = bm::quadrature::gauss_kronrod<double, 61>::integrate(dens, 0.0, 20.0, 15, 1e-14);
  const double first = bm::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double x) { return x * dens(x); }, 0.0, 20.0, 15, 1e-14);
  const double oracle = first / mass;
  RngStream rng(3, 0);
  const auto x = draw(1000000, [&] { return sample_truncated_normal(-5, 1, {0, kInf}, rng); });
  EXPECT_NEAR(mean_of(x), oracle, 5e-4);  // three significant digits
}

TEST(TruncatedNormal, KsAcrossSettings) {
  struct Case {
    double mu, var, a, b;
  };
  const std::vector<Case> cases{{0, 1, 0, kInf},      {0, 1, -kInf, 0},    {-5, 1, 0, kInf},
                                {2, 4, -1, 1},        {0, 1, 8, kInf},     {0, 1, -kInf, -8},
                                {1, 0.25, 0.5, 0.6},  {0, 1, 4.5, 5.0},    {3, 2, -kInf, 10},
                                {0, 1, -0.1, 0.1},    {0, 1, 6, 30},       {-1, 1, -3, -2.5}};
  RngStream rng(4, 0);
  for (const auto& c : cases) {
    const double sd = std::sqrt(c.var);
    const auto x = draw(100000, [&] { return sample_truncated_normal(c.mu, c.var, {c.a, c.b}, rng); });
    for (double v : x) ASSERT_TRUE(v > c.a && v < c.b);
    const double pv = ks_pvalue(x, [&](double v) { return truncated_cdf(v, c.mu, sd, c.a, c.b); });
    EXPECT_GT(pv, kKsLevel) << "mu=" << c.mu << " var=" << c.var << " (" << c.a << "," << c.b << ")";
  }
}

TEST(TruncatedNormal, DeepTailsNeverViolateInterval) {
  RngStream rng(5, 0);
  const std::vector<TruncInterval> ivs{{8, kInf}, {-kInf, -8}, {8, 8.001}, {-8.5, -8}, {12, 40}, {37, kInf}};
  for (const auto& iv : ivs) {
    for (int i = 0; i < 100000; ++i) {
      const double v = sample_truncated_normal(0, 1, iv, rng);
      ASSERT_TRUE(v > iv.lower && v < iv.upper) << v;
    }
  }
}

TEST(TruncatedNormal, RejectsBadArguments) {
  RngStream rng(6, 0);
  EXPECT_THROW(sample_truncated_normal(0, 0, {0, kInf}, rng), ParameterError);
  EXPECT_THROW(sample_truncated_normal(0, -1, {0, kInf}, rng), ParameterError);
  EXPECT_THROW(sample_truncated_normal(0, 1, {1, 1}, rng), ParameterError);
  EXPECT_THROW(sample_truncated_normal(0, 1, {2, 1}, rng), ParameterError);
}

TEST(InverseGamma, Moments) {
  RngStream rng(7, 0);
  EXPECT_NEAR(mean_of(draw(1000000, [&] { return sample_inverse_gamma(3, 2, rng); })), 1.0, 0.01);
  const auto pos = draw(100000, [&] { return sample_inverse_gamma(1, 1, rng); });
  EXPECT_TRUE(std::all_of(pos.begin(), pos.end(), [](double v) { return v > 0; }));
  const double oracle_var = 3.0 * 3.0 / ((4.0 - 1) * (4.0 - 1) * (4.0 - 2));
  EXPECT_NEAR(var_of(draw(1000000, [&] { return sample_inverse_gamma(4, 3, rng); })), oracle_var, 0.02);
  EXPECT_THROW(sample_inverse_gamma(0, 1, rng), ParameterError);
  EXPECT_THROW(sample_inverse_gamma(1, -1, rng), ParameterError);
}

TEST(InverseGamma, Ks) {
  RngStream rng(8, 0);
  for (auto [a, b] : std::vector<std::pair<double, double>>{{0.3, 1}, {1, 1}, {2.5, 0.1}, {10, 7}, {100.5, 3}, {1.5, 1.5}}) {
    const bm::inverse_gamma_distribution<> d(a, b);
    const auto x = draw(100000, [&] { return sample_inverse_gamma(a, b, rng); });
    EXPECT_GT(ks_pvalue(x, [&](double v) { return bm::cdf(d, v); }), kKsLevel) << a << "," << b;
  }
}

TEST(Gamma, Ks) {
  RngStream rng(9, 0);
  for (auto [a, r] : std::vector<std::pair<double, double>>{{0.05, 1}, {0.5, 2}, {1, 1}, {3.3, 0.5}, {50, 10}}) {
    const bm::gamma_distribution<> d(a, 1.0 / r);
    const auto x = draw(100000, [&] { return sample_gamma(a, r, rng); });
    EXPECT_GT(ks_pvalue(x, [&](double v) { return bm::cdf(d, v); }), kKsLevel) << a << "," << r;
  }
}

TEST(InverseGaussian, Moments) {
  RngStream rng(10, 0);
  EXPECT_NEAR(mean_of(draw(1000000, [&] { return sample_inverse_gaussian(2, 1, rng); })), 2.0, 0.01);
  EXPECT_NEAR(var_of(draw(1000000, [&] { return sample_inverse_gaussian(1, 4, rng); })), 0.25, 0.01);
  const auto tight = draw(10000, [&] { return sample_inverse_gaussian(3, 1e12, rng); });
  EXPECT_LT(std::sqrt(var_of(tight)), 1e-4);
  EXPECT_NEAR(mean_of(tight), 3.0, 1e-4);
  EXPECT_THROW(sample_inverse_gaussian(0, 1, rng), ParameterError);
  EXPECT_THROW(sample_inverse_gaussian(1, 0, rng), ParameterError);
}

TEST(InverseGaussian, Ks) {
  RngStream rng(11, 0);
  for (auto [m, l] : std::vector<std::pair<double, double>>{{1, 1}, {2, 1}, {1, 4}, {1e3, 1}, {0.01, 5}, {5, 0.2}}) {
    const bm::inverse_gaussian_distribution<> d(m, l);
    const auto x = draw(100000, [&] { return sample_inverse_gaussian(m, l, rng); });
    EXPECT_GT(ks_pvalue(x, [&](double v) { return bm::cdf(d, v); }), kKsLevel) << m << "," << l;
  }
}

TEST(Beta, MomentsAndKs) {
  RngStream rng(12, 0);
  EXPECT_NEAR(mean_of(draw(1000000, [&] { return sample_beta(1, 1, rng); })), 0.5, 0.005);
  EXPECT_NEAR(mean_of(draw(1000000, [&] { return sample_beta(1, 21, rng); })), 1.0 / 22.0, 0.002);
  EXPECT_NEAR(var_of(draw(1000000, [&] { return sample_beta(2, 3, rng); })), 0.04, 0.002);
  for (auto [a, b] : std::vector<std::pair<double, double>>{{1, 1}, {1, 21}, {2, 3}, {0.3, 0.7}, {40, 60}, {11, 1}}) {
    const bm::beta_distribution<> d(a, b);
    const auto x = draw(100000, [&] { return sample_beta(a, b, rng); });
    for (double v : x) ASSERT_TRUE(v > 0 && v < 1);
    EXPECT_GT(ks_pvalue(x, [&](double v) { return bm::cdf(d, v); }), kKsLevel) << a << "," << b;
  }
}

TEST(Mvn, IdentityCovariance) {
  RngStream rng(13, 0);
  const int T = 100000;
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd x = sample_mvn(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3), rng);
    acc += x * x.transpose();
  }
  acc /= T;
  EXPECT_LT((acc - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 0.02);
}

TEST(Mvn, Correlation) {
  RngStream rng(14, 0);
  Eigen::MatrixXd cov(2, 2);
  cov << 1, 0.9, 0.9, 1;
  double sxy = 0, sxx = 0, syy = 0;
  for (int t = 0; t < 100000; ++t) {
    const Eigen::VectorXd x = sample_mvn(Eigen::VectorXd::Zero(2), cov, rng);
    sxy += x[0] * x[1];
    sxx += x[0] * x[0];
    syy += x[1] * x[1];
  }
  EXPECT_NEAR(sxy / std::sqrt(sxx * syy), 0.9, 0.01);
}

TEST(Mvn, DimensionsAndProjectionKs) {
  RngStream rng(15, 0);
  for (int dim : {1, 10, 51}) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Random(dim, dim);
    const Eigen::MatrixXd cov = A * A.transpose() + Eigen::MatrixXd::Identity(dim, dim);
    const Eigen::VectorXd mean = Eigen::VectorXd::LinSpaced(dim, -1, 1);
    const Eigen::VectorXd u = Eigen::VectorXd::Ones(dim) / std::sqrt(static_cast<double>(dim));
    const double sd = std::sqrt(u.dot(cov * u));
    std::vector<double> proj;
    for (int t = 0; t < 20000; ++t) {
      const Eigen::VectorXd x = sample_mvn(mean, cov, rng);
      ASSERT_EQ(x.size(), dim);
      proj.push_back(u.dot(x));
    }
    const bm::normal_distribution<> nd(u.dot(mean), sd);
    EXPECT_GT(ks_pvalue(proj, [&](double v) { return bm::cdf(nd, v); }), kKsLevel) << dim;
  }
}

TEST(Mvn, CanonicalFormMatchesCovarianceForm) {
  Eigen::MatrixXd Q(2, 2);
  Q << 2, 0.5, 0.5, 1;
  Eigen::VectorXd h(2);
  h << 1, -1;
  RngStream rng(16, 0);
  Eigen::VectorXd mean;
  sample_mvn_canonical(Q, h, rng, &mean);
  EXPECT_LT((mean - Q.ldlt().solve(h)).norm(), 1e-12);
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  Eigen::Matrix2d acc2 = Eigen::Matrix2d::Zero();
  const int T = 200000;
  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd x = sample_mvn_canonical(Q, h, rng) - mean;
    acc += x;
    acc2 += x * x.transpose();
  }
  EXPECT_LT((acc2 / T - Eigen::MatrixXd(Q.inverse())).cwiseAbs().maxCoeff(), 0.01);
}

TEST(Mvn, JitterRescuesSemidefiniteAndFailsOnIndefinite) {
  RngStream rng(17, 0);
  Eigen::MatrixXd semi(2, 2);
  semi << 1, 1, 1, 1;
  EXPECT_NO_THROW(sample_mvn(Eigen::VectorXd::Zero(2), semi, rng));
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;
  try {
    sample_mvn(Eigen::VectorXd::Zero(2), bad, rng);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("condition"), std::string::npos) << e.what();
  }
}

TEST(Normal, Values) {
  const auto e = normal_pdf_cdf(0.0);
  EXPECT_NEAR(e.density, 0.3989422804, 1e-10);
  EXPECT_DOUBLE_EQ(e.cumulative, 0.5);
  const double t = -37.0;
  const double asym = -t * t / 2 - std::log(-t * std::sqrt(2 * M_PI));
  EXPECT_TRUE(std::isfinite(normal_logcdf(t)));
  EXPECT_NEAR(normal_logcdf(t) / asym, 1.0, 0.01);
  for (double v : {0.5, 2.0, 6.0}) EXPECT_NEAR(normal_cdf(v) + normal_cdf(-v), 1.0, 1e-15);
}

TEST(Normal, TwelveDigitsAgainstBoost) {
  const bm::normal_distribution<> nd;
  for (double t = -8.0; t <= 8.0; t += 0.01) {
    const auto e = normal_pdf_cdf(t);
    EXPECT_NEAR(e.density / bm::pdf(nd, t), 1.0, 1e-12) << t;
    EXPECT_NEAR(e.cumulative / bm::cdf(nd, t), 1.0, 1e-12) << t;
    EXPECT_NEAR(normal_logcdf(t), std::log(bm::cdf(nd, t)), 1e-12 * std::max(1.0, std::fabs(std::log(bm::cdf(nd, t))))) << t;
  }
  for (double t = -37.0; t < -8.0; t += 0.37) {
    const double oracle = std::log(bm::cdf(nd, t));
    EXPECT_NEAR(normal_logcdf(t) / oracle, 1.0, 1e-12) << t;
  }
}

TEST(Normal, QuantileInvertsCdf) {
  for (double p : {1e-300, 1e-20, 1e-5, 0.01, 0.3, 0.5, 0.7, 0.99, 1 - 1e-12}) {
    EXPECT_NEAR(normal_cdf(normal_quantile(p)) / p, 1.0, 1e-9) << p;
  }
}

TEST(Rng, Reproducible) {
  RngStream a(42, 3), b(42, 3);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(a.next_u64(), b.next_u64());
  }
  RngStream c(42, 3), d(42, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(sample_truncated_normal(0, 1, {1, 2}, c), sample_truncated_normal(0, 1, {1, 2}, d));
}

TEST(Rng, DistinctStreamsUncorrelated) {
  const int T = 200000;
  for (std::uint64_t s : {0ULL, 1ULL, 99ULL}) {
    RngStream a(7, s), b(7, s + 1);
    double sab = 0;
    for (int i = 0; i < T; ++i) sab += a.normal() * b.normal();
    // sd of the sample correlation ~ 1/sqrt(T)
    EXPECT_LT(std::fabs(sab / T), 5.0 / std::sqrt(T));
    for (int lag = 1; lag <= 3; ++lag) {
      RngStream x(7, s), y(7, s + 1);
      for (int i = 0; i < lag; ++i) y.normal();
      double sl = 0;
      for (int i = 0; i < T; ++i) sl += x.normal() * y.normal();
      EXPECT_LT(std::fabs(sl / T), 5.0 / std::sqrt(T));
    }
  }
}

TEST(Rng, UniformAndNormalKs) {
  RngStream rng(21, 0);
  const auto u = draw(100000, [&] { return rng.uniform(); });
  EXPECT_GT(ks_pvalue(u, [](double v) { return v; }), kKsLevel);
  const auto z = draw(100000, [&] { return rng.normal(); });
  const bm::normal_distribution<> nd;
  EXPECT_GT(ks_pvalue(z, [&](double v) { return bm::cdf(nd, v); }), kKsLevel);
  const auto ex = draw(100000, [&] { return rng.exponential(); });
  EXPECT_GT(ks_pvalue(ex, [](double v) { return 1 - std::exp(-v); }), kKsLevel);
}
