#ifndef REINSURE_VALUATION_HPP
#define REINSURE_VALUATION_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "reinsure/contracts.hpp"
#include "reinsure/errors.hpp"
#include "reinsure/kernels.hpp"
#include "reinsure/loss_models.hpp"
#include "reinsure/numerics.hpp"

namespace reinsure {

enum class RiskMeasure { VaR, CVaR };

inline const char* to_string(RiskMeasure r) {
  return r == RiskMeasure::VaR ? "VaR" : "CVaR";
}

struct MarketSpec {
  double gamma = 0.1;
  double beta = 0.0;
  double epsilon = 0.05;
  RiskMeasure risk_measure = RiskMeasure::VaR;

  void validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
      throw ValidationError("gamma must be positive");
    if (!(beta >= 0.0) || !std::isfinite(beta))
      throw ValidationError("beta must be nonnegative");
    if (!(epsilon > 0.0 && epsilon < 0.5))
      throw ValidationError("epsilon must lie in (0, 0.5)");
  }

  MarketSpec with_beta(double b) const {
    MarketSpec m = *this;
    m.beta = b;
    return m;
  }
  MarketSpec with_risk_measure(RiskMeasure r) const {
    MarketSpec m = *this;
    m.risk_measure = r;
    return m;
  }
};

struct Valuation {
  double surplus;
  double profit;
  double risk;
  double ratio;
};

/// True when the integral of K(F) over [a, inf) is infinite: survival decay
/// x^-alpha raised to the kernel's tail exponent is not integrable.
inline bool kernel_tail_diverges(const LossModel& model,
                                 const PricingKernel& kernel) {
  if (std::isfinite(model.support_end())) return false;
  if (kernel.gamma_r() == 0.0 && kernel.k0_prime_at_zero() == 0.0) return false;
  return model.tail_exponent() * kernel.tail_exponent() <= 1.0;
}

/// Points in x where K(F(x)) is only piecewise smooth.
inline std::vector<double> kernel_nodes(const LossModel& model,
                                        const PricingKernel& kernel) {
  std::vector<double> nodes = model.breakpoints();
  for (double u : kernel.kinks()) nodes.push_back(model.quantile(u));
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

/// Integral of K(F(x)) over [a, b]; b may be inf.
inline double kernel_integral(const LossModel& model,
                              const PricingKernel& kernel, double a, double b,
                              const Tolerances& tol = {}) {
  if (!(a >= 0.0)) throw DomainError("kernel_integral: a must be nonnegative");
  b = std::min(b, model.support_end());
  if (!(b > a)) return 0.0;
  if (std::isinf(b) && kernel_tail_diverges(model, kernel)) return kInf;
  auto f = [&](double x) {
    const double s = model.survival(x);
    return kernel.k(1.0 - s, s);
  };
  const std::vector<double> nodes = kernel_nodes(model, kernel);
  return numerics::integrate_split(f, a, b, nodes, tol.quad);
}

/// Reinsurer surplus pi(I) - E I(X) = integral of K(F(x)) dI(x).
inline double reinsurer_surplus(const LossModel& model,
                                const PricingKernel& kernel,
                                const IndemnitySchedule& schedule,
                                const Tolerances& tol = {}) {
  double total = 0.0;
  for (const Segment& seg : schedule.segments()) {
    if (seg.slope == 0.0) continue;
    total += seg.slope * kernel_integral(model, kernel, seg.lo, seg.hi, tol);
  }
  return total;
}

/// Retained risk without the positivity check.
inline double retained_risk_unchecked(const LossModel& model,
                                      const IndemnitySchedule& schedule,
                                      const MarketSpec& market) {
  const double x_eps = model.var_level(market.epsilon);
  const double var = x_eps - schedule.evaluate(x_eps);
  if (market.risk_measure == RiskMeasure::VaR) return var;
  const double s_eps = model.survival(x_eps);
  if (!(s_eps > 0.0)) throw DegenerateTailError("F(x_eps) = 1");
  double ceded_tail = 0.0;
  for (const Segment& seg : schedule.segments()) {
    if (seg.slope == 0.0 || seg.hi <= x_eps) continue;
    const double lo = std::max(seg.lo, x_eps);
    const double upper = std::isinf(seg.hi) ? 0.0 : model.tail_integral(seg.hi);
    ceded_tail += seg.slope * (model.tail_integral(lo) - upper);
  }
  return model.tail_expectation(x_eps) - schedule.evaluate(x_eps) -
         ceded_tail / s_eps;
}

/// VaR or CVaR of X - I(X) at level epsilon.
inline double retained_risk(const LossModel& model,
                            const IndemnitySchedule& schedule,
                            const MarketSpec& market) {
  market.validate();
  const double r = retained_risk_unchecked(model, schedule, market);
  if (!(r > 0.0))
    throw NonpositiveRiskError("retained risk is not positive", r);
  return r;
}

/// gamma E(X) - surplus - beta rho.
inline double expected_profit(const LossModel& model,
                              const PricingKernel& kernel,
                              const IndemnitySchedule& schedule,
                              const MarketSpec& market,
                              const Tolerances& tol = {}) {
  market.validate();
  double g = market.gamma * model.mean() -
             reinsurer_surplus(model, kernel, schedule, tol);
  if (market.beta != 0.0) g -= market.beta * retained_risk(model, schedule, market);
  return g;
}

/// Profit, risk and their ratio.
inline Valuation criterion(const LossModel& model, const PricingKernel& kernel,
                           const IndemnitySchedule& schedule,
                           const MarketSpec& market,
                           const Tolerances& tol = {}) {
  market.validate();
  const double risk = retained_risk(model, schedule, market);
  const double surplus = reinsurer_surplus(model, kernel, schedule, tol);
  const double profit =
      market.gamma * model.mean() - surplus - market.beta * risk;
  return {surplus, profit, risk, profit / risk};
}

}  // namespace reinsure

#endif  // REINSURE_VALUATION_HPP
