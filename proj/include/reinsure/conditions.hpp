#ifndef REINSURE_CONDITIONS_HPP
#define REINSURE_CONDITIONS_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "reinsure/errors.hpp"
#include "reinsure/kernels.hpp"
#include "reinsure/loss_models.hpp"
#include "reinsure/numerics.hpp"
#include "reinsure/valuation.hpp"

namespace reinsure {

enum class PredictedShape {
  single_layer,
  possibly_multi_layer,
  trivial_infinite_ratio
};

inline const char* to_string(PredictedShape s) {
  switch (s) {
    case PredictedShape::single_layer: return "single-layer";
    case PredictedShape::possibly_multi_layer: return "possibly-multi-layer";
    case PredictedShape::trivial_infinite_ratio: return "trivial-infinite-ratio";
  }
  return "unknown";
}

struct ConditionReport {
  bool loading_ok;
  double loading_margin;   // gamma_r - gamma
  bool quantile_ok;
  double quantile_margin;  // x_eps - E(X)
  bool solvency_ok;
  double solvency_value;   // G(I_{0, x_eps}) with beta = 0
  bool e33_ok;
  double e33_lhs;          // K0'(0) * integral of 1 - F over [x_eps, inf)
  double e33_rhs;          // integral of K0(F) over [0, x_eps]
  double gamma_bar;
  double gamma_lower;
  double x_eps;
  PredictedShape predicted_shape;

  bool all_hold() const {
    return loading_ok && quantile_ok && solvency_ok && e33_ok;
  }
};

inline ConditionReport check_conditions(const LossModel& model,
                                        const PricingKernel& kernel,
                                        const MarketSpec& market,
                                        const Tolerances& tol = {}) {
  market.validate();
  ConditionReport r{};
  r.x_eps = model.var_level(market.epsilon);
  const double xi = model.mean();
  r.loading_margin = kernel.gamma_r() - market.gamma;
  r.loading_ok = r.loading_margin >= 0.0;
  r.quantile_margin = r.x_eps - xi;
  r.quantile_ok = r.quantile_margin >= 0.0;
  r.solvency_value =
      market.gamma * xi - kernel_integral(model, kernel, 0.0, r.x_eps, tol);
  r.solvency_ok = r.solvency_value <= 0.0;
  r.e33_lhs = kernel.k0_prime_at_zero() * model.tail_integral(r.x_eps);
  r.e33_rhs =
      kernel_integral(model, kernel.with_gamma_r(0.0), 0.0, r.x_eps, tol);
  r.e33_ok = r.e33_lhs <= r.e33_rhs;
  r.gamma_bar = gamma_bar(kernel);
  r.gamma_lower = gamma_lower(kernel, market.epsilon);
  if (!r.solvency_ok)
    r.predicted_shape = PredictedShape::trivial_infinite_ratio;
  else if (r.all_hold())
    r.predicted_shape = PredictedShape::single_layer;
  else
    r.predicted_shape = PredictedShape::possibly_multi_layer;
  return r;
}

/// H(a; gamma) = a K(F(a); gamma) + integral of K(F; gamma) over [a, x_eps],
/// with the kernel's loading replaced by gamma.
inline double h_function(double a, double gamma, const LossModel& model,
                         const PricingKernel& kernel, const MarketSpec& market,
                         const Tolerances& tol = {}) {
  const double x_eps = model.var_level(market.epsilon);
  if (!(a >= 0.0 && a <= x_eps))
    throw DomainError("h_function: a must lie in [0, x_eps]");
  if (!(gamma >= 0.0)) throw DomainError("h_function: gamma must be nonnegative");
  const PricingKernel k = kernel.with_gamma_r(gamma);
  const double s = model.survival(a);
  return a * k.k(1.0 - s, s) + kernel_integral(model, k, a, x_eps, tol);
}

/// Solution a of K0(F(a)) = gamma / (1 + gamma) F(a) for gamma in
/// [gamma_lower, gamma_bar].
inline double solve_a_gamma(double gamma, const LossModel& model,
                            const PricingKernel& kernel,
                            const MarketSpec& market) {
  const double lo_g = gamma_lower(kernel, market.epsilon);
  const double hi_g = gamma_bar(kernel);
  const double slack = 1e-12 * std::max(1.0, gamma);
  if (!(gamma >= lo_g - slack && gamma <= hi_g + slack))
    throw DomainError("solve_a_gamma: gamma outside [gamma_lower, gamma_bar]");
  if (gamma >= hi_g) return 0.0;
  const double c = gamma / (1.0 + gamma);
  const double u_eps = 1.0 - market.epsilon;
  if (gamma <= lo_g) return model.var_level(market.epsilon);
  // f(u) = K0(u) - c u is positive on (0, u_gamma) and negative beyond.
  auto positive = [&](double u) { return kernel.k0(u) - c * u > 0.0; };
  double u = numerics::bisect_boundary(positive, 0.0, u_eps, 1e-15);
  if (!(u > 0.0)) return 0.0;
  return model.quantile(u);
}

struct HScanReport {
  std::vector<double> gammas;
  std::vector<double> a_gammas;
  std::vector<double> h_values;
  double gamma_lower;
  double gamma_upper;       // gamma_bar, capped at gamma_max
  bool gamma_bar_capped;
  double min_h_minus_gamma;
  double max_concavity_defect;
  bool a_monotone;
  bool decreasing_after_a_gamma;
  double h_lower;           // H at gamma_lower
  double h_lower_closed;    // x_eps * gamma_lower
  double h_upper;           // H at gamma_upper
  double h_upper_closed;    // (1 + gb) R - gb T + gb E(X); NaN when capped
};

inline HScanReport h_concavity_scan(const LossModel& model,
                                    const PricingKernel& kernel,
                                    const MarketSpec& market,
                                    std::size_t n_points = 101,
                                    double gamma_max = 10.0,
                                    const Tolerances& tol = {}) {
  market.validate();
  if (n_points < 5) throw DomainError("h_concavity_scan: n_points must be >= 5");
  HScanReport r{};
  const double x_eps = model.var_level(market.epsilon);
  r.gamma_lower = gamma_lower(kernel, market.epsilon);
  const double gb = gamma_bar(kernel);
  r.gamma_bar_capped = !(gb <= gamma_max);
  r.gamma_upper = std::min(gb, gamma_max);
  r.gammas = numerics::linspace(r.gamma_lower, r.gamma_upper, n_points);
  r.min_h_minus_gamma = kInf;
  r.a_monotone = true;
  r.decreasing_after_a_gamma = true;
  for (double g : r.gammas) {
    const double a = solve_a_gamma(g, model, kernel, market);
    const double h = h_function(a, g, model, kernel, market, tol);
    r.a_gammas.push_back(a);
    r.h_values.push_back(h);
    r.min_h_minus_gamma = std::min(r.min_h_minus_gamma, h - g);
    if (r.a_gammas.size() > 1 &&
        a > r.a_gammas[r.a_gammas.size() - 2] + 1e-9 * std::max(1.0, x_eps))
      r.a_monotone = false;
    const PricingKernel k = kernel.with_gamma_r(g);
    auto kf = [&](double x) {
      const double s = model.survival(x);
      return k.k(1.0 - s, s);
    };
    double prev = kf(a);
    for (double x : numerics::linspace(a, x_eps, 21)) {
      const double v = kf(x);
      if (v > prev + 1e-12) r.decreasing_after_a_gamma = false;
      prev = v;
    }
  }
  r.max_concavity_defect = -kInf;
  for (std::size_t i = 1; i + 1 < r.h_values.size(); ++i)
    r.max_concavity_defect =
        std::max(r.max_concavity_defect,
                 0.5 * (r.h_values[i - 1] + r.h_values[i + 1]) - r.h_values[i]);
  r.h_lower = r.h_values.front();
  r.h_lower_closed = x_eps * r.gamma_lower;
  r.h_upper = r.h_values.back();
  if (r.gamma_bar_capped) {
    r.h_upper_closed = std::nan("");
  } else {
    const double rr =
        kernel_integral(model, kernel.with_gamma_r(0.0), 0.0, x_eps, tol);
    const double t = model.tail_integral(x_eps);
    r.h_upper_closed = (1.0 + gb) * rr - gb * t + gb * model.mean();
  }
  return r;
}

struct AsymptoticRow {
  long n;
  double xi;
  double x_eps;
  double g_over_xi;
  double limit;       // gamma - gamma_r
  double gap;         // |G/xi - limit|
  double gap_sqrt_n;
  int sign;           // sign of G/xi - limit
};

/// G(I_{0, x_eps}) / xi for normal-approximation portfolios of n iid risks.
inline std::vector<AsymptoticRow> asymptotic_profit_ratio(
    const std::vector<long>& n_values, double unit_mean, double unit_sd,
    const PricingKernel& kernel, const MarketSpec& market,
    const Tolerances& tol = {}) {
  market.validate();
  std::vector<AsymptoticRow> rows;
  for (long n : n_values) {
    if (n < 10) throw DomainError("asymptotic_profit_ratio: n must be >= 10");
    const LossModel model = LossModel::iid_portfolio_normal(n, unit_mean, unit_sd);
    AsymptoticRow row{};
    row.n = n;
    row.xi = model.mean();
    row.x_eps = model.var_level(market.epsilon);
    const double g = market.gamma * row.xi -
                     kernel_integral(model, kernel, 0.0, row.x_eps, tol);
    row.g_over_xi = g / row.xi;
    row.limit = market.gamma - kernel.gamma_r();
    const double d = row.g_over_xi - row.limit;
    row.gap = std::abs(d);
    row.gap_sqrt_n = row.gap * std::sqrt(static_cast<double>(n));
    row.sign = (d > 0.0) - (d < 0.0);
    rows.push_back(row);
  }
  return rows;
}

struct E33SearchSpec {
  std::vector<LossModel> models;
  std::vector<PricingKernel> kernels;  // loadings are ignored
  std::vector<double> epsilons;
  double gamma_bar_band = 0.05;
  std::vector<double> window_positions{0.5};
};

struct E33ScanRow {
  std::string model;
  std::string kernel;
  double epsilon;
  double lhs;
  double rhs;
  bool violated;
  double window_lo;  // (1 - band) gamma_bar
  double window_hi;  // min(solvency limit, gamma_bar)
};

struct E33Instance {
  LossModel model;
  PricingKernel kernel;
  MarketSpec market;
  double lhs;
  double rhs;
  double bound_margin;  // gamma - H(a_gamma; gamma); positive breaks the bound
};

struct E33SearchResult {
  std::optional<E33Instance> instance;
  std::vector<E33ScanRow> rows;
};

/// Scans models (normalized to mean 1) x kernels x epsilons for violations
/// of the tail condition and places gamma = gamma_r inside the band below
/// gamma_bar where the cession I_{0, x_eps} is still unprofitable. Returns the
/// candidate with the largest margin gamma - H(a_gamma; gamma).
inline E33SearchResult find_e33_violation(const E33SearchSpec& spec,
                                          const Tolerances& tol = {}) {
  E33SearchResult out;
  double best_margin = -kInf;
  for (const LossModel& raw : spec.models) {
    const LossModel model = raw.rescaled(1.0);
    for (const PricingKernel& kernel0 : spec.kernels) {
      const PricingKernel k0 = kernel0.with_gamma_r(0.0);
      for (double eps : spec.epsilons) {
        const double x_eps = model.var_level(eps);
        const double t = model.tail_integral(x_eps);
        const double rr = kernel_integral(model, k0, 0.0, x_eps, tol);
        E33ScanRow row{model.describe(), k0.describe(), eps,
                       k0.k0_prime_at_zero() * t, rr, false,
                       std::nan(""), std::nan("")};
        row.violated = row.lhs > row.rhs;
        const double gb = gamma_bar(k0);
        if (row.violated && std::isfinite(gb) && t > rr) {
          row.window_lo = (1.0 - spec.gamma_bar_band) * gb;
          row.window_hi = std::min(rr / (t - rr), gb);
          if (row.window_hi >= row.window_lo) {
            for (double p : spec.window_positions) {
              const double g =
                  row.window_hi - p * (row.window_hi - row.window_lo);
              const MarketSpec market{g, 0.0, eps, RiskMeasure::VaR};
              if (g < gamma_lower(k0, eps)) continue;
              const double a = solve_a_gamma(g, model, k0, market);
              const double margin =
                  g - h_function(a, g, model, k0, market, tol);
              if (margin > best_margin) {
                best_margin = margin;
                out.instance = E33Instance{model, k0.with_gamma_r(g), market,
                                           row.lhs, row.rhs, margin};
              }
            }
          }
        }
        out.rows.push_back(row);
      }
    }
  }
  return out;
}

}  // namespace reinsure

#endif  // REINSURE_CONDITIONS_HPP
