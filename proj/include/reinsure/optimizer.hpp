#ifndef REINSURE_OPTIMIZER_HPP
#define REINSURE_OPTIMIZER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reinsure/contracts.hpp"
#include "reinsure/errors.hpp"
#include "reinsure/kernels.hpp"
#include "reinsure/loss_models.hpp"
#include "reinsure/numerics.hpp"
#include "reinsure/valuation.hpp"

namespace reinsure {

enum class ContractShape { no_cession, single_layer, multi_layer };

inline const char* to_string(ContractShape s) {
  switch (s) {
    case ContractShape::no_cession: return "no-cession";
    case ContractShape::single_layer: return "single-layer";
    case ContractShape::multi_layer: return "multi-layer";
  }
  return "unknown";
}

inline ContractShape shape_from_layer_count(std::size_t n) {
  if (n == 0) return ContractShape::no_cession;
  return n == 1 ? ContractShape::single_layer : ContractShape::multi_layer;
}

struct OptimResult {
  IndemnitySchedule schedule;
  Valuation valuation;
  std::vector<double> mu_trace;
  std::size_t layer_count = 0;
  ContractShape classification = ContractShape::no_cession;
  bool converged = true;
  int restarts = 0;
};

namespace detail {

inline OptimResult make_result(const LossModel& model,
                               const PricingKernel& kernel,
                               const MarketSpec& market,
                               IndemnitySchedule schedule,
                               const Tolerances& tol) {
  OptimResult r;
  r.valuation = criterion(model, kernel, schedule, market, tol);
  r.layer_count = schedule.layers().size();
  r.classification = shape_from_layer_count(r.layer_count);
  r.schedule = std::move(schedule);
  return r;
}

inline double k_of_f(const LossModel& model, const PricingKernel& kernel,
                     double x) {
  const double s = model.survival(x);
  return kernel.k(1.0 - s, s);
}

}  // namespace detail

/// Lagrangian integrand: mu 1{x < x_eps} - K(F(x)), plus
/// (mu / S(x_eps)) (1 - F(x)) 1{x >= x_eps} for CVaR.
inline double psi(double x, double mu, const LossModel& model,
                  const PricingKernel& kernel, const MarketSpec& market) {
  if (!(x >= 0.0)) throw DomainError("psi: x must be nonnegative");
  const double x_eps = model.var_level(market.epsilon);
  const double s = model.survival(x);
  double v = -kernel.k(1.0 - s, s);
  if (x < x_eps) {
    v += mu;
  } else if (market.risk_measure == RiskMeasure::CVaR) {
    v += mu / model.survival(x_eps) * s;
  }
  return v;
}

struct LagrangeResult {
  IndemnitySchedule schedule;
  bool guard_fallback = false;
};

/// Bang-bang maximizer of G - mu rho: slope 1 exactly where psi >= 0.
inline LagrangeResult lagrange_optimum_detailed(double mu,
                                                const LossModel& model,
                                                const PricingKernel& kernel,
                                                const MarketSpec& market,
                                                const Tolerances& tol = {}) {
  market.validate();
  if (!(mu >= 0.0)) throw DomainError("lagrange_optimum: mu must be nonnegative");
  const double x_eps = model.var_level(market.epsilon);
  const double s_eps = model.survival(x_eps);
  const double end = model.support_end();
  const bool cvar = market.risk_measure == RiskMeasure::CVaR;

  auto below = [&](double x) {
    return detail::k_of_f(model, kernel, x) <= mu;
  };
  auto tail_psi = [&](double x) {
    const double s = model.survival(x);
    return mu / s_eps * s - kernel.k(1.0 - s, s);
  };

  std::vector<Layer> layers;

  // Below x_eps the set {K(F(x)) <= mu} is [0, c1] plus [c2, x_eps).
  const double u_star = kernel.argmax();
  double x_star = 0.0;
  if (u_star >= 1.0)
    x_star = x_eps;
  else if (u_star > 0.0)
    x_star = std::min(x_eps, model.quantile(u_star));
  double c1 = -1.0;
  if (below(0.0))
    c1 = below(x_star) ? x_star
                       : numerics::bisect_boundary(below, 0.0, x_star, tol.root);
  double c2 = x_eps;
  if (x_star < x_eps) {
    if (below(x_star)) {
      c2 = x_star;
    } else if (below(x_eps)) {
      auto above = [&](double x) { return !below(x); };
      c2 = numerics::bisect_boundary(above, x_star, x_eps, tol.root, false);
    }
  }
  if (c1 >= c2) {
    layers.push_back({0.0, x_eps});
  } else {
    if (c1 > 0.0) layers.push_back({0.0, c1});
    if (c2 < x_eps) layers.push_back({c2, x_eps});
  }

  // Above x_eps: psi = (mu/S_eps) S - K(F), convex in F and zero at F = 1.
  double upper = x_eps;
  if (cvar && tail_psi(x_eps) >= 0.0) {
    if (mu / s_eps >= -kernel.k_prime_at_one()) {
      upper = kInf;
    } else {
      auto positive = [&](double x) {
        return model.survival(x) > 0.0 && tail_psi(x) >= 0.0;
      };
      double h = std::max(x_eps, model.mean());
      double hi = x_eps + h;
      for (int i = 0; i < 200 && positive(hi); ++i) {
        h *= 2.0;
        hi = x_eps + h;
      }
      upper = positive(hi) ? kInf
                           : numerics::bisect_boundary(positive, x_eps, hi,
                                                       tol.root * std::max(1.0, x_eps));
    }
    if (upper > x_eps) {
      if (!layers.empty() && layers.back().detachment == x_eps)
        layers.back().detachment = upper;
      else
        layers.push_back({x_eps, upper});
    }
  }

  auto clip = [end](std::vector<Layer> in) {
    std::vector<Layer> out;
    for (Layer l : in) {
      if (l.attachment >= end) continue;
      l.detachment = std::min(l.detachment, end);
      out.push_back(l);
    }
    return out;
  };
  layers = clip(layers);

  // Guard: compare the sign pattern on a grid with the constructed layers.
  const int n_grid = 10000;
  double x_scan = x_eps;
  if (cvar) {
    const double deep = s_eps * 1e-3;
    x_scan = std::max(2.0 * x_eps, model.quantile(1.0 - deep));
    if (std::isfinite(end)) x_scan = std::min(x_scan, end);
  }
  auto in_layers = [&](double x) {
    for (const Layer& l : layers)
      if (x >= l.attachment && x < l.detachment) return true;
    return false;
  };
  auto near_boundary = [&](double x) {
    const double eps = 1e-7 * std::max(1.0, x_scan);
    for (const Layer& l : layers)
      if (std::abs(x - l.attachment) < eps || std::abs(x - l.detachment) < eps)
        return true;
    return std::abs(x - x_eps) < eps;
  };
  std::vector<double> grid = numerics::linspace(0.0, x_scan, n_grid);
  if (!cvar) grid.pop_back();  // x_eps itself lies outside [0, x_eps)
  std::vector<double> psis(grid.size());
  bool mismatch = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    psis[i] = psi(grid[i], mu, model, kernel, market);
    const bool want = psis[i] >= 0.0 && model.survival(grid[i]) > 0.0;
    if (want != in_layers(grid[i]) && std::abs(psis[i]) > 1e-12 &&
        !near_boundary(grid[i]))
      mismatch = true;
  }
  if (!mismatch) return {IndemnitySchedule::from_layers(layers), false};

  // Fallback: layers from grid sign runs, boundaries refined by bisection.
  auto pos = [&](double x) {
    return model.survival(x) > 0.0 && psi(x, mu, model, kernel, market) >= 0.0;
  };
  std::vector<Layer> runs;
  std::size_t i = 0;
  while (i < grid.size()) {
    if (!(psis[i] >= 0.0)) {
      ++i;
      continue;
    }
    double start = grid[i];
    if (i > 0) {
      auto neg = [&](double x) { return !pos(x); };
      start = numerics::bisect_boundary(neg, grid[i - 1], grid[i], tol.root, false);
    }
    std::size_t j = i;
    while (j + 1 < grid.size() && psis[j + 1] >= 0.0) ++j;
    double stop;
    if (j + 1 < grid.size())
      stop = numerics::bisect_boundary(pos, grid[j], grid[j + 1], tol.root);
    else
      stop = cvar ? std::max(upper, grid[j]) : x_eps;
    if (stop > start) runs.push_back({start, stop});
    i = j + 1;
  }
  return {IndemnitySchedule::from_layers(clip(runs)), true};
}

inline IndemnitySchedule lagrange_optimum(double mu, const LossModel& model,
                                          const PricingKernel& kernel,
                                          const MarketSpec& market,
                                          const Tolerances& tol = {}) {
  return lagrange_optimum_detailed(mu, model, kernel, market, tol).schedule;
}

struct AHatResult {
  double a_hat;
  double ratio;
  bool root_found;
  bool multiple_roots;
};

/// Attachment a solving K(F(a)) = C(I_{a, x_eps}); falls back to
/// (x_eps, C(no cession)) when no root exists in [0, x_eps]. Ratios are
/// reported with beta = 0.
inline AHatResult solve_a_hat(const LossModel& model,
                              const PricingKernel& kernel,
                              const MarketSpec& market,
                              const Tolerances& tol = {}) {
  market.validate();
  const double x_eps = model.var_level(market.epsilon);
  const double xi = model.mean();
  const double base_risk =
      market.risk_measure == RiskMeasure::VaR
          ? 0.0
          : model.tail_integral(x_eps) / model.survival(x_eps);
  auto risk = [&](double a) { return a + base_risk; };
  auto profit = [&](double integral) { return market.gamma * xi - integral; };
  auto phi_exact = [&](double a) {
    const double integral = kernel_integral(model, kernel, a, x_eps, tol);
    return detail::k_of_f(model, kernel, a) * risk(a) - profit(integral);
  };

  const std::size_t n = 2001;
  const std::vector<double> grid = numerics::linspace(0.0, x_eps, n);
  std::vector<double> tail(n, 0.0);  // integral of K(F) over [grid_i, x_eps]
  for (std::size_t i = n - 1; i-- > 0;)
    tail[i] = tail[i + 1] +
              kernel_integral(model, kernel, grid[i], grid[i + 1], tol);
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i)
    phi[i] = detail::k_of_f(model, kernel, grid[i]) * risk(grid[i]) -
             profit(tail[i]);

  std::optional<std::size_t> first;
  int changes = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const bool change = phi[i] == 0.0 || (phi[i] > 0.0) != (phi[i + 1] > 0.0);
    if (change && !(phi[i] == 0.0 && i > 0 && phi[i - 1] == 0.0)) {
      ++changes;
      if (!first) first = i;
    }
  }
  if (!first) {
    const double r0 = market.gamma * xi /
                      retained_risk(model, IndemnitySchedule::zero(),
                                    market.with_beta(0.0));
    return {x_eps, r0, false, false};
  }
  const std::size_t i = *first;
  const double a = phi[i] == 0.0 ? grid[i]
                                 : numerics::bisect_root(phi_exact, grid[i],
                                                         grid[i + 1], 1e-13);
  double ratio;
  if (risk(a) > 0.0) {
    ratio = profit(kernel_integral(model, kernel, a, x_eps, tol)) / risk(a);
  } else {
    ratio = detail::k_of_f(model, kernel, a);
  }
  return {a, ratio, true, changes > 1};
}

namespace detail {

/// Ratio of I_ab with beta = 0; -inf when the risk is not positive.
struct TslEvaluator {
  const LossModel& model;
  const PricingKernel& kernel;
  const MarketSpec& market;
  Tolerances tol;
  double x_eps;
  double s_eps;
  double t_eps;
  double cond_mean;
  double xi;

  TslEvaluator(const LossModel& m, const PricingKernel& k,
               const MarketSpec& mk, const Tolerances& t)
      : model(m), kernel(k), market(mk), tol(t) {
    x_eps = m.var_level(mk.epsilon);
    s_eps = m.survival(x_eps);
    t_eps = m.tail_integral(x_eps);
    cond_mean = x_eps + t_eps / s_eps;
    xi = m.mean();
  }

  double tail(double x) const {
    if (std::isinf(x)) return 0.0;
    return x == x_eps ? t_eps : model.tail_integral(x);
  }

  /// tail_a, tail_b: tail integrals at a and b, used only under CVaR.
  double risk(double a, double b, double tail_a, double tail_b) const {
    const double ceded_at = std::clamp(x_eps - a, 0.0, b - a);
    if (market.risk_measure == RiskMeasure::VaR) return x_eps - ceded_at;
    const double lo = a >= x_eps ? tail_a : t_eps;
    const double hi = b >= x_eps ? tail_b : t_eps;
    return cond_mean - ceded_at - (lo - hi) / s_eps;
  }

  double risk(double a, double b) const {
    if (market.risk_measure == RiskMeasure::VaR) return risk(a, b, 0.0, 0.0);
    return risk(a, b, a >= x_eps ? tail(a) : 0.0, b >= x_eps ? tail(b) : 0.0);
  }

  double ratio_given(double r, double surplus) const {
    if (!(r > 0.0)) return -kInf;
    return (market.gamma * xi - surplus) / r;
  }

  double ratio(double a, double b, double surplus) const {
    return ratio_given(risk(a, b), surplus);
  }

  double ratio(double a, double b) const {
    if (!(a >= 0.0 && a < b)) return -kInf;
    return ratio(a, b, kernel_integral(model, kernel, a, b, tol));
  }
};

}  // namespace detail

/// Best single layer I_ab over 0 <= a < b <= inf: 200 x 200 grid plus an
/// unbounded column, then compass refinement.
inline OptimResult best_truncated_stop_loss(const LossModel& model,
                                            const PricingKernel& kernel,
                                            const MarketSpec& market,
                                            const Tolerances& tol = {}) {
  market.validate();
  const MarketSpec m0 = market.with_beta(0.0);
  const detail::TslEvaluator ev(model, kernel, m0, tol);
  const double x_max =
      std::min(model.support_end(), model.quantile(1.0 - market.epsilon / 10.0));

  const std::vector<double> a_grid = numerics::linspace(0.0, ev.x_eps, 200);
  std::vector<double> b_grid = numerics::linspace(0.0, x_max, 201);
  b_grid.erase(b_grid.begin());

  std::vector<double> nodes = a_grid;
  nodes.insert(nodes.end(), b_grid.begin(), b_grid.end());
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  std::vector<double> prefix(nodes.size(), 0.0);
  for (std::size_t i = 1; i < nodes.size(); ++i)
    prefix[i] = prefix[i - 1] +
                kernel_integral(model, kernel, nodes[i - 1], nodes[i], tol);
  const double beyond = kernel_integral(model, kernel, nodes.back(), kInf, tol);
  std::vector<double> tails(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    tails[i] = m0.risk_measure == RiskMeasure::CVaR ? ev.tail(nodes[i]) : 0.0;
  auto index_of = [&nodes](double x) {
    return static_cast<std::size_t>(
        std::lower_bound(nodes.begin(), nodes.end(), x) - nodes.begin());
  };

  double best = -kInf;
  double best_a = 0.0;
  double best_b = ev.x_eps;
  for (double a : a_grid) {
    const std::size_t ia = index_of(a);
    for (double b : b_grid) {
      if (!(b > a)) continue;
      const std::size_t ib = index_of(b);
      const double v = ev.ratio_given(ev.risk(a, b, tails[ia], tails[ib]),
                                      prefix[ib] - prefix[ia]);
      if (v > best) {
        best = v;
        best_a = a;
        best_b = b;
      }
    }
    const double v = ev.ratio_given(ev.risk(a, kInf, tails[ia], 0.0),
                                    prefix.back() - prefix[ia] + beyond);
    if (v > best) {
      best = v;
      best_a = a;
      best_b = kInf;
    }
  }
  if (!std::isfinite(best))
    throw NonpositiveRiskError("no truncated stop loss has positive risk");

  const double h = ev.x_eps / 199.0;
  const double zero_ratio = ev.ratio_given(ev.risk(0.0, 0.0, 0.0, 0.0), 0.0);
  if (best <= zero_ratio) {
    // supremum approached by vanishing layers; return a thin one
    best_b = best_a + 1e-9 * std::max(ev.x_eps, 1.0);
  } else if (std::isinf(best_b)) {
    auto f = [&](const std::array<double, 1>& p) { return ev.ratio(p[0], kInf); };
    auto ok = [](const std::array<double, 1>& p) { return p[0] >= 0.0; };
    const auto r = numerics::compass_maximize<1>(f, ok, {best_a}, {h}, 1e-8);
    best_a = r.point[0];
  } else {
    // search over (attachment, width)
    auto f = [&](const std::array<double, 2>& p) { return ev.ratio(p[0], p[0] + p[1]); };
    auto ok = [end = model.support_end()](const std::array<double, 2>& p) {
      return p[0] >= 0.0 && p[1] > 0.0 && p[0] + p[1] <= end;
    };
    const auto r = numerics::compass_maximize<2>(f, ok, {best_a, best_b - best_a},
                                                 {h, x_max / 200.0}, 1e-8);
    auto g = [&](const std::array<double, 2>& p) { return ev.ratio(p[0], p[1]); };
    auto ok_ab = [end = model.support_end()](const std::array<double, 2>& p) {
      return p[0] >= 0.0 && p[0] < p[1] && p[1] <= end;
    };
    const double w = r.point[1];
    const auto q = numerics::compass_maximize<2>(
        g, ok_ab, {r.point[0], r.point[0] + w}, {w / 4.0, w / 4.0}, 1e-9, 2000);
    best_a = q.point[0];
    best_b = q.point[1];
  }
  return detail::make_result(
      model, kernel, market,
      IndemnitySchedule::truncated_stop_loss(best_a, best_b), tol);
}

struct DinkelbachOptions {
  std::optional<double> mu0;
  double tol = 1e-10;
  int max_iter = 100;
};

/// Dinkelbach iteration mu_{k+1} = C(lagrange_optimum(mu_k)) on the beta = 0
/// problem. The returned valuation uses the market's beta.
inline OptimResult dinkelbach_optimize(const LossModel& model,
                                       const PricingKernel& kernel,
                                       const MarketSpec& market,
                                       const DinkelbachOptions& opt = {},
                                       const Tolerances& tol = {}) {
  market.validate();
  const MarketSpec m0 = market.with_beta(0.0);
  const double zero_ratio =
      criterion(model, kernel, IndemnitySchedule::zero(), m0, tol).ratio;
  double mu = opt.mu0.value_or(zero_ratio);
  if (!(mu >= 0.0)) throw DomainError("dinkelbach: mu0 must be nonnegative");

  std::vector<double> trace{mu};
  IndemnitySchedule current = IndemnitySchedule::zero();
  int restarts = 0;
  bool converged = false;
  for (int it = 0; it < opt.max_iter; ++it) {
    IndemnitySchedule next = lagrange_optimum(mu, model, kernel, m0, tol);
    const double risk = retained_risk_unchecked(model, next, m0);
    const double profit =
        m0.gamma * model.mean() - reinsurer_surplus(model, kernel, next, tol);
    if (!(risk > 0.0)) {
      if (profit > 0.0 || restarts > 0)
        throw NonpositiveRiskError(
            "dinkelbach iterate " + std::to_string(it) + " (" +
                next.describe() + ") has nonpositive risk with profit " +
                std::to_string(profit),
            risk);
      ++restarts;
      mu = zero_ratio;
      trace.push_back(mu);
      continue;
    }
    const double mu_next = profit / risk;
    current = std::move(next);
    trace.push_back(mu_next);
    if (std::abs(mu_next - mu) < opt.tol) {
      converged = true;
      break;
    }
    mu = mu_next;
  }
  OptimResult r = detail::make_result(model, kernel, market, current, tol);
  r.mu_trace = std::move(trace);
  r.converged = converged;
  r.restarts = restarts;
  return r;
}

/// Exhaustive search over all 2^n unions of equal cells partitioning
/// [0, x_max]. Independent of the psi machinery.
inline OptimResult discrete_bruteforce_oracle(const LossModel& model,
                                              const PricingKernel& kernel,
                                              const MarketSpec& market,
                                              int n_cells,
                                              std::optional<double> x_max = {},
                                              const Tolerances& tol = {}) {
  market.validate();
  if (n_cells < 1 || n_cells > 20)
    throw DomainError("brute force oracle limited to 1..20 cells");
  const double x_eps = model.var_level(market.epsilon);
  const double top = x_max.value_or(model.quantile(1.0 - market.epsilon / 10.0));
  if (!(top > 0.0)) throw DomainError("brute force oracle: x_max must be positive");
  const bool cvar = market.risk_measure == RiskMeasure::CVaR;
  const double s_eps = model.survival(x_eps);

  const std::vector<double> edges =
      numerics::linspace(0.0, top, static_cast<std::size_t>(n_cells) + 1);
  std::vector<double> surplus(n_cells);
  std::vector<double> relief(n_cells);
  for (int i = 0; i < n_cells; ++i) {
    const double lo = edges[i];
    const double hi = edges[i + 1];
    surplus[i] = kernel_integral(model, kernel, lo, hi, tol);
    relief[i] = std::max(0.0, std::min(hi, x_eps) - lo);
    if (cvar && hi > x_eps) {
      const double a = std::max(lo, x_eps);
      relief[i] += (model.tail_integral(a) - model.tail_integral(hi)) / s_eps;
    }
  }
  const double base_risk =
      cvar ? model.tail_expectation(x_eps) : x_eps;
  const double g0 = market.gamma * model.mean();

  double best = -kInf;
  std::uint32_t best_mask = 0;
  const std::uint32_t count = 1u << n_cells;
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    double s = 0.0;
    double r = base_risk;
    for (int i = 0; i < n_cells; ++i)
      if (mask & (1u << i)) {
        s += surplus[i];
        r -= relief[i];
      }
    if (!(r > 1e-14 * base_risk)) continue;
    const double v = (g0 - s) / r;
    if (v > best) {
      best = v;
      best_mask = mask;
    }
  }
  std::vector<double> xs{0.0};
  std::vector<double> slopes{0.0};
  for (int i = 0; i < n_cells; ++i) {
    xs.push_back(edges[i]);
    slopes.push_back((best_mask & (1u << i)) ? 1.0 : 0.0);
  }
  xs.push_back(top);
  slopes.push_back(0.0);
  return detail::make_result(model, kernel, market,
                             IndemnitySchedule(std::move(xs), std::move(slopes)),
                             tol);
}

}  // namespace reinsure

#endif  // REINSURE_OPTIMIZER_HPP
