#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "reinsure/valuation.hpp"
#include "support/instances.hpp"

using namespace reinsure;
using fixtures::baseline_kernel;
using fixtures::baseline_market;
using fixtures::baseline_model;

namespace {

IndemnitySchedule random_schedule(std::mt19937_64& rng, double span) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> xs{0.0};
  std::vector<double> ss{0.0};
  for (int i = 0; i < 5; ++i) {
    xs.push_back(xs.back() + u(rng) * span / 4.0);
    ss.push_back(u(rng) < 0.3 ? 1.0 : u(rng));
  }
  return IndemnitySchedule(xs, ss);
}

// midpoint rule over x for the surplus, independent of the library quadrature
double surplus_oracle(const LossModel& m, const PricingKernel& k, const IndemnitySchedule& s,
                      double upper, int n = 400000) {
  double acc = 0.0;
  const double h = upper / n;
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) * h;
    const double slope = (s(x + 0.25 * h) - s(x - 0.25 * h)) / (0.5 * h);
    acc += slope * k.k(m.cdf(x)) * h;
  }
  return acc;
}

// (1/eps) * integral over p in (1-eps, 1) of R(F^-1(p)), midpoint rule in p
double cvar_oracle(const LossModel& m, const IndemnitySchedule& s, double eps, int n = 400000) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p = 1.0 - eps + (i + 0.5) * eps / n;
    acc += s.retained(m.quantile(p));
  }
  return acc / n;
}

}  // namespace

TEST(Valuation, BaselineSurplusClosedForms) {
  const double x_eps = -std::log(0.05);
  const double s0x = reinsurer_surplus(baseline_model(), baseline_kernel(),
                                       IndemnitySchedule::truncated_stop_loss(0.0, x_eps));
  EXPECT_NEAR(s0x, 0.3431875, 1e-9);
  EXPECT_NEAR(reinsurer_surplus(baseline_model(), baseline_kernel(), IndemnitySchedule::identity()),
              0.375, 1e-9);
  EXPECT_EQ(reinsurer_surplus(baseline_model(), baseline_kernel(), IndemnitySchedule::zero()), 0.0);
}

TEST(Valuation, NoCessionRatioIsLoadingOverVaR) {
  const Valuation v =
      criterion(baseline_model(), baseline_kernel(), IndemnitySchedule::zero(), baseline_market());
  EXPECT_NEAR(v.ratio, 0.1 / -std::log(0.05), 1e-12);
  EXPECT_NEAR(v.ratio, 0.0333808, 1e-7);
}

TEST(Valuation, CVaROfNoCessionForExponential) {
  const MarketSpec m = baseline_market().with_risk_measure(RiskMeasure::CVaR);
  const double r = retained_risk(baseline_model(), IndemnitySchedule::zero(), m);
  EXPECT_NEAR(r, -std::log(0.05) + 1.0, 1e-12);
}

TEST(Valuation, FullCessionHasNonpositiveRisk) {
  try {
    retained_risk(baseline_model(), IndemnitySchedule::identity(), baseline_market());
    FAIL() << "expected NonpositiveRiskError";
  } catch (const NonpositiveRiskError& e) {
    EXPECT_EQ(e.risk(), 0.0);
  }
  EXPECT_THROW(criterion(baseline_model(), baseline_kernel(),
                         IndemnitySchedule::truncated_stop_loss(0.0, -std::log(0.05)),
                         baseline_market()),
               NonpositiveRiskError);
}

TEST(Valuation, EpsilonOutOfRangeRejected) {
  MarketSpec m = baseline_market();
  m.epsilon = 0.7;
  EXPECT_THROW(m.validate(), ValidationError);
  EXPECT_THROW(criterion(baseline_model(), baseline_kernel(), IndemnitySchedule::zero(), m),
               ValidationError);
}

TEST(Valuation, SurplusAgreesWithMidpointOracle) {
  std::mt19937_64 rng(fixtures::kSeed);
  const LossModel m = LossModel::lognormal_with_mean(1.0, 0.7);
  const PricingKernel k = PricingKernel::capped_linear(1.6, 0.15);
  for (int t = 0; t < 5; ++t) {
    const IndemnitySchedule s = random_schedule(rng, 3.0);
    const double top = s.breakpoints().back();
    // cap the last segment so the oracle range is finite
    std::vector<double> xs = s.breakpoints();
    std::vector<double> ss = s.slopes();
    xs.push_back(top + 1.0);
    ss.push_back(0.0);
    const IndemnitySchedule capped(xs, ss);
    EXPECT_NEAR(reinsurer_surplus(m, k, capped), surplus_oracle(m, k, capped, top + 1.0), 2e-6);
  }
}

TEST(Valuation, CVaRAgreesWithQuantileOracle) {
  std::mt19937_64 rng(fixtures::kSeed + 1);
  const LossModel m = LossModel::gamma(2.0, 0.5);
  for (int t = 0; t < 5; ++t) {
    const IndemnitySchedule s = random_schedule(rng, 3.0);
    const MarketSpec mk{0.1, 0.0, 0.1, RiskMeasure::CVaR};
    EXPECT_NEAR(retained_risk_unchecked(m, s, mk), cvar_oracle(m, s, 0.1), 1e-5);
  }
}

TEST(Valuation, BetaShiftIdentity) {
  std::mt19937_64 rng(fixtures::kSeed + 2);
  const LossModel m = LossModel::exponential(1.0);
  for (int t = 0; t < 30; ++t) {
    const IndemnitySchedule s = random_schedule(rng, 2.0);
    for (RiskMeasure rm : {RiskMeasure::VaR, RiskMeasure::CVaR}) {
      const MarketSpec m0{0.1, 0.0, 0.05, rm};
      const double c0 = criterion(m, baseline_kernel(), s, m0).ratio;
      const double c1 = criterion(m, baseline_kernel(), s, m0.with_beta(0.37)).ratio;
      EXPECT_NEAR(c0 - c1, 0.37, 1e-12);
    }
  }
}

TEST(Valuation, ScaleInvariance) {
  std::mt19937_64 rng(fixtures::kSeed + 3);
  const LossModel m = LossModel::pareto_with_mean(2.5, 1.0);
  const PricingKernel k = PricingKernel::dual_power(1.7, 0.2);
  for (int t = 0; t < 10; ++t) {
    const IndemnitySchedule s = random_schedule(rng, 2.0);
    for (RiskMeasure rm : {RiskMeasure::VaR, RiskMeasure::CVaR}) {
      const MarketSpec mk{0.12, 0.05, 0.05, rm};
      const double c1 = criterion(m, k, s, mk).ratio;
      for (double xi : {0.5, 3.0, 10.0})
        EXPECT_NEAR(criterion(m.rescaled(xi), k, s.rescaled(xi), mk).ratio, c1, 1e-8);
    }
  }
}

TEST(Valuation, HeavyTailWithSteepKernelDiverges) {
  const LossModel m = LossModel::pareto(1.5, 1.0);
  const PricingKernel k = PricingKernel::proportional_hazard(0.5, 0.1);
  EXPECT_TRUE(kernel_tail_diverges(m, k));
  EXPECT_TRUE(std::isinf(reinsurer_surplus(m, k, IndemnitySchedule::truncated_stop_loss(2.0, kInf))));
  EXPECT_FALSE(kernel_tail_diverges(LossModel::pareto(3.0, 1.0), k));
}

TEST(Valuation, SurplusOfLayerIsAdditive) {
  const auto m = baseline_model();
  const auto k = baseline_kernel();
  const double whole = reinsurer_surplus(m, k, IndemnitySchedule::truncated_stop_loss(0.5, 4.0));
  const double parts = reinsurer_surplus(m, k, IndemnitySchedule::truncated_stop_loss(0.5, 2.0)) +
                       reinsurer_surplus(m, k, IndemnitySchedule::truncated_stop_loss(2.0, 4.0));
  EXPECT_NEAR(whole, parts, 1e-12);
}
