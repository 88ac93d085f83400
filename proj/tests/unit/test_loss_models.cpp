#include <cmath>
#include <random>
#include <sstream>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <gtest/gtest.h>

#include "reinsure/loss_models.hpp"
#include "support/instances.hpp"

using namespace reinsure;

namespace {

// trapezoid on a log-spaced grid; independent of the library quadrature
template <class F>
double trapezoid_tail(F&& survival, double t, double upper, int n = 200000) {
  double acc = 0.0;
  double prev_x = t;
  double prev_f = survival(t);
  for (int i = 1; i <= n; ++i) {
    const double x = t + (upper - t) * std::pow(static_cast<double>(i) / n, 2.0);
    const double f = survival(x);
    acc += 0.5 * (f + prev_f) * (x - prev_x);
    prev_x = x;
    prev_f = f;
  }
  return acc;
}

}  // namespace

TEST(LossModels, ExponentialClosedForms) {
  const LossModel m = LossModel::exponential(1.0);
  EXPECT_NEAR(m.var_level(0.05), -std::log(0.05), 1e-12);
  EXPECT_NEAR(m.var_level(0.05), 2.995732, 1e-6);
  EXPECT_NEAR(m.tail_integral(m.var_level(0.05)), 0.05, 1e-14);
  EXPECT_NEAR(m.tail_expectation(2.0), 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(m.mean(), 1.0);
  EXPECT_EQ(m.family(), LossFamily::exponential);
}

TEST(LossModels, ParetoShapeOneHasInfiniteMean) {
  EXPECT_THROW(LossModel::pareto_with_mean(1.0, 1.0), InfiniteMeanError);
  const LossModel p = LossModel::pareto(1.0, 1.0);
  EXPECT_THROW(p.mean(), InfiniteMeanError);
}

TEST(LossModels, ParetoTailIntegralMatchesClosedForm) {
  const LossModel p = LossModel::pareto(3.0, 2.0);
  // integral of (2/x)^3 over [t, inf) = 8 / (2 t^2)
  for (double t : {2.0, 3.5, 10.0}) EXPECT_NEAR(p.tail_integral(t), 4.0 / (t * t), 1e-12);
  EXPECT_NEAR(p.tail_integral(0.0), p.mean(), 1e-12);
  EXPECT_NEAR(p.mean(), 3.0, 1e-12);
}

TEST(LossModels, QuantileOutsideUnitIntervalIsDomainError) {
  const LossModel m = LossModel::gamma(2.0, 1.0);
  EXPECT_THROW(m.quantile(0.0), DomainError);
  EXPECT_THROW(m.quantile(1.0), DomainError);
  EXPECT_THROW(m.quantile(-0.1), DomainError);
  EXPECT_THROW(m.cdf(-1.0), DomainError);
}

TEST(LossModels, InvalidParametersRejected) {
  EXPECT_THROW(LossModel::exponential(0.0), ValidationError);
  EXPECT_THROW(LossModel::lognormal(0.0, -1.0), ValidationError);
  EXPECT_THROW(LossModel::gamma(0.0, 1.0), ValidationError);
  EXPECT_THROW(LossModel::iid_portfolio_normal(0, 1.0, 1.0), DomainError);
}

TEST(LossModels, CdfAgreesWithBoostDistributions) {
  const LossModel ln = LossModel::lognormal(0.2, 0.7);
  const LossModel ga = LossModel::gamma(2.5, 0.4);
  const boost::math::lognormal_distribution<double> bln(0.2, 0.7);
  const boost::math::gamma_distribution<double> bga(2.5, 0.4);
  for (double x : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    EXPECT_NEAR(ln.cdf(x), boost::math::cdf(bln, x), 1e-14);
    EXPECT_NEAR(ga.cdf(x), boost::math::cdf(bga, x), 1e-14);
    EXPECT_NEAR(ln.survival(x), boost::math::cdf(boost::math::complement(bln, x)), 1e-14);
  }
}

TEST(LossModels, QuantileInvertsCdf) {
  const std::vector<LossModel> models = {
      LossModel::exponential(2.0), LossModel::pareto(2.5, 1.0),
      LossModel::lognormal(0.0, 1.0), LossModel::gamma(0.7, 2.0),
      LossModel::iid_portfolio_normal(100, 1.0, 1.0)};
  for (const auto& m : models)
    for (double p : {0.01, 0.3, 0.5, 0.9, 0.999})
      EXPECT_NEAR(m.cdf(m.quantile(p)), p, 1e-10) << m.describe();
}

TEST(LossModels, TailIntegralAgreesWithTrapezoid) {
  const std::vector<LossModel> models = {LossModel::lognormal_with_mean(1.0, 0.8),
                                         LossModel::gamma(1.7, 0.6)};
  for (const auto& m : models) {
    for (double t : {0.0, 0.8, 2.5}) {
      const double upper = m.quantile(1.0 - 1e-13) * 3.0;
      const double ref = trapezoid_tail([&](double x) { return m.survival(x); }, t, upper);
      EXPECT_NEAR(m.tail_integral(t), ref, 1e-7) << m.describe() << " t=" << t;
    }
  }
}

TEST(LossModels, MeanEqualsTailIntegralFromZero) {
  const std::vector<LossModel> models = {
      LossModel::exponential(1.3), LossModel::pareto_with_mean(2.2, 1.0),
      LossModel::lognormal_with_mean(1.0, 1.1), LossModel::gamma(3.0, 0.5)};
  for (const auto& m : models) EXPECT_NEAR(m.tail_integral(0.0), m.mean(), 1e-9) << m.describe();
}

TEST(LossModels, RescaledHasRequestedMeanAndScaledQuantiles) {
  std::mt19937_64 rng(fixtures::kSeed);
  std::uniform_real_distribution<double> u(0.2, 5.0);
  const LossModel base = LossModel::lognormal_with_mean(1.0, 0.9);
  for (int i = 0; i < 20; ++i) {
    const double xi = u(rng);
    const LossModel r = base.rescaled(xi);
    EXPECT_NEAR(r.mean(), xi, 1e-12 * xi);
    EXPECT_NEAR(r.quantile(0.95), xi * base.quantile(0.95), 1e-10 * xi);
    EXPECT_NEAR(r.tail_integral(xi * 2.0), xi * base.tail_integral(2.0), 1e-9 * xi);
  }
}

TEST(LossModels, EmpiricalTableInterpolatesAndHasExponentialTail) {
  const LossModel m = LossModel::empirical({1.0, 2.0, 4.0}, {0.2, 0.6, 0.9});
  EXPECT_NEAR(m.cdf(0.5), 0.1, 1e-15);
  EXPECT_NEAR(m.cdf(3.0), 0.75, 1e-15);
  EXPECT_NEAR(m.quantile(0.75), 3.0, 1e-12);
  // density 0.15 on the last cell, hazard 0.15 / 0.1
  EXPECT_NEAR(m.survival(5.0), 0.1 * std::exp(-1.5), 1e-14);
  EXPECT_NEAR(m.tail_integral(4.0), 0.1 / 1.5, 1e-14);
  EXPECT_EQ(m.breakpoints().size(), 4u);
}

TEST(LossModels, EmpiricalTableWithFullMassHasBoundedSupport) {
  const LossModel m = LossModel::empirical({0.0, 1.0, 3.0}, {0.0, 0.5, 1.0});
  EXPECT_DOUBLE_EQ(m.support_end(), 3.0);
  EXPECT_NEAR(m.mean(), 0.25 + 0.5 * 2.0, 1e-14);
}

TEST(LossModels, EmpiricalValidation) {
  EXPECT_THROW(LossModel::empirical({1.0, 1.0}, {0.2, 0.5}), ValidationError);
  EXPECT_THROW(LossModel::empirical({1.0, 2.0}, {0.5, 0.4}), ValidationError);
  EXPECT_THROW(LossModel::empirical({1.0, 2.0}, {0.5, 1.2}), ValidationError);
  EXPECT_THROW(LossModel::empirical({}, {}), ValidationError);
}

TEST(LossModels, EmpiricalFromCsvSkipsHeader) {
  std::istringstream in("x,F\n0.5,0.25\n1.0,0.5\n2.0,0.9\n");
  const LossModel m = LossModel::empirical_from_csv(in);
  EXPECT_NEAR(m.cdf(0.75), 0.375, 1e-15);
  std::istringstream bad("x,F\n0.5,0.25\noops\n");
  EXPECT_THROW(LossModel::empirical_from_csv(bad), ValidationError);
}

TEST(LossModels, NormalPortfolioMoments) {
  const LossModel m = LossModel::iid_portfolio_normal(10000, 1.0, 1.0);
  EXPECT_NEAR(m.mean(), 10000.0, 1e-6);
  EXPECT_NEAR(m.var_level(0.05), 10000.0 + 100.0 * 1.6448536269514722, 1e-6);
}
