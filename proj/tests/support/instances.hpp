#ifndef REINSURE_TESTS_FIXTURES_HPP
#define REINSURE_TESTS_FIXTURES_HPP

#include <random>
#include <string>
#include <vector>

#include "reinsure/reinsure.hpp"

namespace reinsure::fixtures {

inline constexpr std::uint64_t kSeed = 20261015;

struct Instance {
  LossModel model;
  PricingKernel kernel;
  MarketSpec market;
  ConditionReport report;

  std::string describe() const {
    return model.describe() + " | " + kernel.describe() + " | gamma=" +
           std::to_string(market.gamma) + " eps=" + std::to_string(market.epsilon) +
           " " + to_string(market.risk_measure);
  }
};

inline LossModel baseline_model() { return LossModel::exponential(1.0); }
inline PricingKernel baseline_kernel() { return PricingKernel::quadratic(0.5, 0.1); }
inline MarketSpec baseline_market() { return MarketSpec{0.1, 0.0, 0.05, RiskMeasure::VaR}; }

/// Draws one instance: exponential, lognormal or gamma losses with mean 1,
/// quadratic or proportional-hazard kernel, gamma <= gamma_r.
inline Instance draw_instance(std::mt19937_64& rng, int index) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int family = index % 3;
  LossModel model =
      family == 0   ? LossModel::exponential(1.0)
      : family == 1 ? LossModel::lognormal_with_mean(1.0, 0.3 + 0.9 * u(rng))
                    : LossModel::gamma(0.5 + 3.0 * u(rng), 1.0).rescaled(1.0);
  const double gamma_r = 0.05 + 0.45 * u(rng);
  PricingKernel kernel = u(rng) < 0.5
                             ? PricingKernel::quadratic(0.1 + 0.9 * u(rng), gamma_r)
                             : PricingKernel::proportional_hazard(0.3 + 0.65 * u(rng), gamma_r);
  const double gamma = gamma_r * (0.3 + 0.7 * u(rng));
  const double eps = 0.01 + 0.19 * u(rng);
  const RiskMeasure rm = u(rng) < 0.5 ? RiskMeasure::VaR : RiskMeasure::CVaR;
  MarketSpec market{gamma, 0.0, eps, rm};
  ConditionReport report = check_conditions(model, kernel, market);
  return {std::move(model), std::move(kernel), market, report};
}

/// First `count` draws satisfying all four hypotheses.
inline std::vector<Instance> hypothesis_instances(std::size_t count,
                                                  std::uint64_t seed = kSeed) {
  std::mt19937_64 rng(seed);
  std::vector<Instance> out;
  for (int i = 0; out.size() < count; ++i) {
    Instance inst = draw_instance(rng, i);
    if (inst.report.all_hold()) out.push_back(std::move(inst));
  }
  return out;
}

/// Ceding a thin layer just below x_eps beats no cession.
inline bool cession_pays(const Instance& inst) {
  const double zero_ratio =
      criterion(inst.model, inst.kernel, IndemnitySchedule::zero(),
                inst.market.with_beta(0.0))
          .ratio;
  return inst.kernel.k(1.0 - inst.market.epsilon) < zero_ratio;
}

}  // namespace reinsure::fixtures

#endif  // REINSURE_TESTS_FIXTURES_HPP
