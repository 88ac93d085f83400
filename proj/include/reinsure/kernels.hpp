#ifndef REINSURE_KERNELS_HPP
#define REINSURE_KERNELS_HPP

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "reinsure/errors.hpp"
#include "reinsure/numerics.hpp"

namespace reinsure {

namespace distortion {

/// g0(s) = s^r, 0 < r <= 1.
struct ProportionalHazard {
  double r;
};

/// g0(s) = 1 - (1 - s)^k, k >= 1.
struct DualPower {
  double k;
};

/// g0(s) = min(lambda s, 1), lambda >= 1.
struct CappedLinear {
  double lambda;
};

/// g0(s) = (1 - w) s + w min(s / alpha, 1): mixture of the mean and TVaR at
/// level alpha.
struct TvarMixture {
  double w;
  double alpha;
};

using Distortion =
    std::variant<ProportionalHazard, DualPower, CappedLinear, TvarMixture>;

inline double evaluate(const Distortion& g, double s) {
  return std::visit(
      [s](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ProportionalHazard>)
          return std::pow(s, d.r);
        else if constexpr (std::is_same_v<T, DualPower>)
          return -std::expm1(d.k * std::log1p(-s));
        else if constexpr (std::is_same_v<T, CappedLinear>)
          return std::min(d.lambda * s, 1.0);
        else
          return (1.0 - d.w) * s + d.w * std::min(s / d.alpha, 1.0);
      },
      g);
}

}  // namespace distortion

namespace kernel_shape {

/// K0(u) = c (u - u^2), 0 < c <= 1.
struct Quadratic {
  double c;
};

}  // namespace kernel_shape

/// Pricing kernel K(u) = (1 + gamma_r) K0(u) + gamma_r (1 - u) with a
/// normalized concave K0, K0(0) = K0(1) = 0.
class PricingKernel {
 public:
  using Shape = std::variant<kernel_shape::Quadratic, distortion::Distortion>;

  static PricingKernel quadratic(double c, double gamma_r) {
    if (!(c > 0.0 && c <= 1.0))
      throw ValidationError("kernel c must lie in (0, 1] (K0'(0) = c)");
    return PricingKernel(kernel_shape::Quadratic{c}, gamma_r);
  }

  /// K0(u) = g0(1 - u) - (1 - u).
  static PricingKernel from_distortion(const distortion::Distortion& g0,
                                       double gamma_r) {
    validate_parameters(g0);
    PricingKernel k(g0, gamma_r);
    k.validate_shape();
    return k;
  }

  static PricingKernel proportional_hazard(double r, double gamma_r) {
    return from_distortion(distortion::ProportionalHazard{r}, gamma_r);
  }
  static PricingKernel dual_power(double k, double gamma_r) {
    return from_distortion(distortion::DualPower{k}, gamma_r);
  }
  static PricingKernel capped_linear(double lambda, double gamma_r) {
    return from_distortion(distortion::CappedLinear{lambda}, gamma_r);
  }
  static PricingKernel tvar_mixture(double w, double alpha, double gamma_r) {
    return from_distortion(distortion::TvarMixture{w, alpha}, gamma_r);
  }

  const Shape& shape() const { return shape_; }
  double gamma_r() const { return gamma_r_; }

  PricingKernel with_gamma_r(double gamma_r) const {
    return PricingKernel(shape_, gamma_r);
  }

  double k0(double u) const {
    check_u(u);
    return k0_raw(u, 1.0 - u);
  }

  /// K0 at u with s = 1 - u supplied separately (accurate for u near 1).
  double k0(double u, double s) const {
    check_u(u);
    return k0_raw(u, s);
  }

  double k(double u) const { return k(u, 1.0 - u); }

  double k(double u, double s) const {
    check_u(u);
    return (1.0 + gamma_r_) * k0_raw(u, s) + gamma_r_ * s;
  }

  /// K0'(0) = 1 - g0'(1-).
  double k0_prime_at_zero() const {
    return std::visit(
        [](const auto& v) -> double {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, kernel_shape::Quadratic>)
            return v.c;
          else
            return std::visit(
                [](const auto& d) -> double {
                  using D = std::decay_t<decltype(d)>;
                  if constexpr (std::is_same_v<D, distortion::ProportionalHazard>)
                    return 1.0 - d.r;
                  else if constexpr (std::is_same_v<D, distortion::DualPower>)
                    return d.k > 1.0 ? 1.0 : 0.0;
                  else if constexpr (std::is_same_v<D, distortion::CappedLinear>)
                    return d.lambda > 1.0 ? 1.0 : 0.0;
                  else
                    return d.w;
                },
                v);
        },
        shape_);
  }

  /// K0'(1-) = 1 - g0'(0+); -inf for proportional hazard with r < 1.
  double k0_prime_at_one() const {
    return std::visit(
        [](const auto& v) -> double {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, kernel_shape::Quadratic>)
            return -v.c;
          else
            return std::visit(
                [](const auto& d) -> double {
                  using D = std::decay_t<decltype(d)>;
                  if constexpr (std::is_same_v<D, distortion::ProportionalHazard>)
                    return d.r < 1.0 ? -kInf : 0.0;
                  else if constexpr (std::is_same_v<D, distortion::DualPower>)
                    return 1.0 - d.k;
                  else if constexpr (std::is_same_v<D, distortion::CappedLinear>)
                    return 1.0 - d.lambda;
                  else
                    return -d.w * (1.0 - d.alpha) / d.alpha;
                },
                v);
        },
        shape_);
  }

  /// K'(1-) = (1 + gamma_r) K0'(1-) - gamma_r.
  double k_prime_at_one() const {
    return (1.0 + gamma_r_) * k0_prime_at_one() - gamma_r_;
  }

  /// Interior points of (0, 1) where K0 is not differentiable.
  std::vector<double> kinks() const {
    std::vector<double> out;
    if (auto* g = std::get_if<distortion::Distortion>(&shape_)) {
      if (auto* c = std::get_if<distortion::CappedLinear>(g)) {
        if (c->lambda > 1.0) out.push_back(1.0 - 1.0 / c->lambda);
      } else if (auto* t = std::get_if<distortion::TvarMixture>(g)) {
        if (t->w > 0.0) out.push_back(1.0 - t->alpha);
      }
    }
    return out;
  }

  /// Maximizer of the concave K on [0, 1].
  double argmax() const {
    return numerics::golden_section_max([this](double u) { return k(u); },
                                        0.0, 1.0, 1e-13);
  }

  /// Exponent r with K(u) ~ (1 - u)^r as u -> 1.
  double tail_exponent() const {
    if (auto* g = std::get_if<distortion::Distortion>(&shape_))
      if (auto* p = std::get_if<distortion::ProportionalHazard>(g))
        return p->r;
    return 1.0;
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(10);
    std::visit(
        [&os](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, kernel_shape::Quadratic>) {
            os << "quadratic(c=" << v.c << ")";
          } else {
            std::visit(
                [&os](const auto& d) {
                  using D = std::decay_t<decltype(d)>;
                  if constexpr (std::is_same_v<D, distortion::ProportionalHazard>)
                    os << "proportional_hazard(r=" << d.r << ")";
                  else if constexpr (std::is_same_v<D, distortion::DualPower>)
                    os << "dual_power(k=" << d.k << ")";
                  else if constexpr (std::is_same_v<D, distortion::CappedLinear>)
                    os << "capped_linear(lambda=" << d.lambda << ")";
                  else
                    os << "tvar_mixture(w=" << d.w << ", alpha=" << d.alpha
                       << ")";
                },
                v);
          }
        },
        shape_);
    os << " gamma_r=" << gamma_r_;
    return os.str();
  }

 private:
  PricingKernel(Shape shape, double gamma_r)
      : shape_(std::move(shape)), gamma_r_(gamma_r) {
    if (!(gamma_r >= 0.0) || !std::isfinite(gamma_r))
      throw ValidationError("gamma_r must be nonnegative and finite");
  }

  static void check_u(double u) {
    if (!(u >= 0.0 && u <= 1.0))
      throw DomainError("kernel argument must lie in [0, 1]");
  }

  static void validate_parameters(const distortion::Distortion& g) {
    std::visit(
        [](const auto& d) {
          using D = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<D, distortion::ProportionalHazard>) {
            if (!(d.r > 0.0 && d.r <= 1.0))
              throw ValidationError(
                  "proportional hazard exponent r must lie in (0, 1]; "
                  "r > 1 violates g0(s) >= s");
          } else if constexpr (std::is_same_v<D, distortion::DualPower>) {
            if (!(d.k >= 1.0) || !std::isfinite(d.k))
              throw ValidationError("dual power exponent k must be >= 1");
          } else if constexpr (std::is_same_v<D, distortion::CappedLinear>) {
            if (!(d.lambda >= 1.0) || !std::isfinite(d.lambda))
              throw ValidationError("capped linear slope lambda must be >= 1");
          } else {
            if (!(d.w >= 0.0 && d.w <= 1.0))
              throw ValidationError("tvar mixture weight w must lie in [0, 1]");
            if (!(d.alpha > 0.0 && d.alpha < 1.0))
              throw ValidationError("tvar mixture alpha must lie in (0, 1)");
          }
        },
        g);
  }

  void validate_shape() const {
    if (std::abs(k0_raw(0.0, 1.0)) > 1e-12 || std::abs(k0_raw(1.0, 0.0)) > 1e-12)
      throw ValidationError("distortion must satisfy g0(0) = 0 and g0(1) = 1");
    const int n = 200;
    for (int i = 0; i <= n; ++i) {
      const double u = static_cast<double>(i) / n;
      if (k0_raw(u, 1.0 - u) < -1e-12)
        throw ValidationError("distortion must satisfy g0(s) >= s");
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i + 2; j <= n; j += 7) {
        const double u = static_cast<double>(i) / n;
        const double v = static_cast<double>(j) / n;
        const double m = 0.5 * (u + v);
        if (k0_raw(m, 1.0 - m) <
            0.5 * (k0_raw(u, 1.0 - u) + k0_raw(v, 1.0 - v)) - 1e-10)
          throw ValidationError("distortion must be concave");
      }
    }
  }

  double k0_raw(double u, double s) const {
    return std::visit(
        [u, s](const auto& v) -> double {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, kernel_shape::Quadratic>) {
            return v.c * u * s;
          } else {
            return std::visit(
                [u, s](const auto& d) -> double {
                  using D = std::decay_t<decltype(d)>;
                  if constexpr (std::is_same_v<D, distortion::ProportionalHazard>)
                    return d.r == 1.0 ? 0.0 : std::max(0.0, std::pow(s, d.r) - s);
                  else if constexpr (std::is_same_v<D, distortion::DualPower>)
                    return std::max(0.0, u - std::pow(u, d.k));
                  else if constexpr (std::is_same_v<D, distortion::CappedLinear>)
                    return std::min((d.lambda - 1.0) * s, u);
                  else
                    return d.w * std::min(u, s * (1.0 - d.alpha) / d.alpha);
                },
                v);
          }
        },
        shape_);
  }

  Shape shape_;
  double gamma_r_;
};

/// Upper loading threshold K0'(0) / (1 - K0'(0)); +inf when K0'(0) = 1.
inline double gamma_bar(const PricingKernel& kernel) {
  const double d = kernel.k0_prime_at_zero();
  if (d >= 1.0) return kInf;
  return d / (1.0 - d);
}

/// Lower loading threshold: the gamma whose tangent-line solution
/// K0(u) = gamma/(1+gamma) u sits at u = 1 - eps, that is
/// K0(1-eps) / (1 - eps - K0(1-eps)).
inline double gamma_lower(const PricingKernel& kernel, double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw DomainError("gamma_lower: epsilon must lie in (0, 1)");
  const double k0 = kernel.k0(1.0 - eps, eps);
  return k0 / (1.0 - eps - k0);
}

}  // namespace reinsure

#endif  // REINSURE_KERNELS_HPP
