#ifndef REINSURE_LOSS_MODELS_HPP
#define REINSURE_LOSS_MODELS_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>

#include "reinsure/errors.hpp"
#include "reinsure/numerics.hpp"

namespace reinsure {

enum class LossFamily {
  exponential,
  pareto,
  lognormal,
  gamma,
  empirical,
  normal_portfolio
};

inline const char* to_string(LossFamily f) {
  switch (f) {
    case LossFamily::exponential: return "exponential";
    case LossFamily::pareto: return "pareto";
    case LossFamily::lognormal: return "lognormal";
    case LossFamily::gamma: return "gamma";
    case LossFamily::empirical: return "empirical";
    case LossFamily::normal_portfolio: return "normal_portfolio";
  }
  return "unknown";
}

namespace loss {

struct Exponential {
  double mean;
};

/// Classical Pareto with support [scale, inf).
struct Pareto {
  double shape;
  double scale;
};

/// log X ~ N(mu, sigma^2).
struct Lognormal {
  double mu;
  double sigma;
};

struct Gamma {
  double shape;
  double scale;
};

/// Piecewise-linear CDF through the knots, exponential tail beyond the last
/// knot with the hazard of the last segment.
struct EmpiricalTable {
  std::vector<double> x;
  std::vector<double> cdf;
  double tail_hazard;  // 0 when the last knot has cdf == 1
};

/// N(location, spread^2) truncated below at 0 and renormalized.
struct NormalPortfolio {
  double location;
  double spread;
};

}  // namespace loss

/// Nonnegative loss distribution X with the functionals of F used by the
/// pricing and risk formulas. Immutable; all members are const and
/// thread-safe.
class LossModel {
 public:
  using Params = std::variant<loss::Exponential, loss::Pareto, loss::Lognormal,
                              loss::Gamma, loss::EmpiricalTable,
                              loss::NormalPortfolio>;

  static LossModel exponential(double mean) {
    require_positive(mean, "exponential mean");
    return LossModel(loss::Exponential{mean});
  }

  static LossModel pareto(double shape, double scale) {
    require_positive(shape, "pareto shape");
    require_positive(scale, "pareto scale");
    return LossModel(loss::Pareto{shape, scale});
  }

  /// Pareto with the given shape (> 1) and mean.
  static LossModel pareto_with_mean(double shape, double mean) {
    if (!(shape > 1.0))
      throw InfiniteMeanError("pareto shape must exceed 1 for a finite mean");
    require_positive(mean, "pareto mean");
    return pareto(shape, mean * (shape - 1.0) / shape);
  }

  static LossModel lognormal(double mu, double sigma) {
    if (!std::isfinite(mu)) throw ValidationError("lognormal mu must be finite");
    require_positive(sigma, "lognormal sigma");
    return LossModel(loss::Lognormal{mu, sigma});
  }

  static LossModel lognormal_with_mean(double mean, double sigma) {
    require_positive(mean, "lognormal mean");
    return lognormal(std::log(mean) - 0.5 * sigma * sigma, sigma);
  }

  static LossModel gamma(double shape, double scale) {
    require_positive(shape, "gamma shape");
    require_positive(scale, "gamma scale");
    return LossModel(loss::Gamma{shape, scale});
  }

  /// Knots (x_i, F(x_i)) strictly increasing in both coordinates, x >= 0,
  /// F in [0, 1]. A knot (0, 0) is prepended when the table starts above 0.
  static LossModel empirical(std::vector<double> x, std::vector<double> cdf) {
    if (x.size() != cdf.size())
      throw ValidationError("empirical table: column lengths differ");
    if (x.empty()) throw ValidationError("empirical table: no knots");
    if (x.front() < 0.0)
      throw ValidationError("empirical table: losses must be nonnegative");
    if (x.front() > 0.0) {
      if (cdf.front() <= 0.0)
        throw ValidationError(
            "empirical table: cdf must be strictly increasing");
      x.insert(x.begin(), 0.0);
      cdf.insert(cdf.begin(), 0.0);
    }
    if (x.size() < 2)
      throw ValidationError("empirical table: at least two knots required");
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!std::isfinite(x[i]) || !(cdf[i] >= 0.0 && cdf[i] <= 1.0))
        throw ValidationError("empirical table: cdf values must lie in [0, 1]");
      if (i > 0 && !(x[i] > x[i - 1]))
        throw ValidationError("empirical table: x must be strictly increasing");
      if (i > 0 && !(cdf[i] > cdf[i - 1]))
        throw ValidationError(
            "empirical table: cdf must be strictly increasing");
    }
    const std::size_t m = x.size() - 1;
    double hazard = 0.0;
    if (cdf[m] < 1.0) {
      const double density = (cdf[m] - cdf[m - 1]) / (x[m] - x[m - 1]);
      hazard = density / (1.0 - cdf[m]);
    }
    return LossModel(loss::EmpiricalTable{std::move(x), std::move(cdf), hazard});
  }

  /// Two-column CSV (x, F(x)); an optional non-numeric header row is skipped.
  static LossModel empirical_from_csv(std::istream& in) {
    std::vector<double> xs;
    std::vector<double> fs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream fields(line);
      double a = 0.0;
      double b = 0.0;
      if (!(fields >> a >> b)) {
        if (line_no == 1 && xs.empty()) continue;  // header
        throw ValidationError("empirical csv: malformed row " +
                              std::to_string(line_no));
      }
      xs.push_back(a);
      fs.push_back(b);
    }
    return empirical(std::move(xs), std::move(fs));
  }

  static LossModel empirical_from_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("empirical csv: cannot open " + path);
    return empirical_from_csv(in);
  }

  /// Normal approximation to the total of n iid risks with the given unit
  /// mean and standard deviation: location n*unit_mean, spread
  /// sqrt(n)*unit_sd, truncated at 0.
  static LossModel iid_portfolio_normal(long n, double unit_mean,
                                        double unit_sd) {
    if (n < 1) throw DomainError("portfolio size must be at least 1");
    require_positive(unit_mean, "unit mean");
    require_positive(unit_sd, "unit sd");
    const double nn = static_cast<double>(n);
    return LossModel(
        loss::NormalPortfolio{nn * unit_mean, std::sqrt(nn) * unit_sd});
  }

  LossFamily family() const {
    return static_cast<LossFamily>(params_.index());
  }
  const Params& params() const { return params_; }

  double cdf(double x) const {
    check_loss(x);
    return std::visit([x](const auto& p) { return cdf_impl(p, x); }, params_);
  }

  /// 1 - F(x), computed without cancellation.
  double survival(double x) const {
    check_loss(x);
    return std::visit([x](const auto& p) { return survival_impl(p, x); },
                      params_);
  }

  /// Smallest x with F(x) >= p.
  double quantile(double p) const {
    if (!(p > 0.0 && p < 1.0))
      throw DomainError("quantile: probability must lie in (0, 1)");
    return std::visit([p](const auto& q) { return quantile_impl(q, p); },
                      params_);
  }

  /// Loss level exceeded with probability epsilon: quantile(1 - epsilon).
  double var_level(double epsilon) const { return quantile(1.0 - epsilon); }

  /// Integral of 1 - F over [t, inf).
  double tail_integral(double t) const {
    check_loss(t);
    return std::visit([t](const auto& p) { return tail_integral_impl(p, t); },
                      params_);
  }

  /// E(X | X >= t).
  double tail_expectation(double t) const {
    const double s = survival(t);
    if (!(s > 0.0))
      throw DegenerateTailError("tail expectation: F(t) = 1");
    return t + tail_integral(t) / s;
  }

  double mean() const {
    return std::visit([](const auto& p) { return mean_impl(p); }, params_);
  }

  /// Same shape with mean new_mean: F_new(x) = F_old(x * mean_old / new_mean).
  LossModel rescaled(double new_mean) const {
    require_positive(new_mean, "rescaled mean");
    const double k = new_mean / mean();
    return std::visit(
        [k](const auto& p) { return LossModel(scale_params(p, k)); }, params_);
  }

  /// Points where F is not smooth.
  std::vector<double> breakpoints() const {
    return std::visit(
        [](const auto& p) -> std::vector<double> {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, loss::Pareto>) return {p.scale};
          else if constexpr (std::is_same_v<T, loss::EmpiricalTable>) return p.x;
          else return {};
        },
        params_);
  }

  /// Power-law decay exponent of the survival function (inf when lighter).
  double tail_exponent() const {
    if (auto* p = std::get_if<loss::Pareto>(&params_)) return p->shape;
    return kInf;
  }

  /// Right end of the support (inf when unbounded).
  double support_end() const {
    if (auto* p = std::get_if<loss::EmpiricalTable>(&params_))
      return p->tail_hazard > 0.0 ? kInf : p->x.back();
    return kInf;
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(10);
    std::visit(
        [&os](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, loss::Exponential>)
            os << "exponential(mean=" << p.mean << ")";
          else if constexpr (std::is_same_v<T, loss::Pareto>)
            os << "pareto(shape=" << p.shape << ", scale=" << p.scale << ")";
          else if constexpr (std::is_same_v<T, loss::Lognormal>)
            os << "lognormal(mu=" << p.mu << ", sigma=" << p.sigma << ")";
          else if constexpr (std::is_same_v<T, loss::Gamma>)
            os << "gamma(shape=" << p.shape << ", scale=" << p.scale << ")";
          else if constexpr (std::is_same_v<T, loss::EmpiricalTable>)
            os << "empirical(knots=" << p.x.size() << ")";
          else
            os << "normal_portfolio(location=" << p.location
               << ", spread=" << p.spread << ")";
        },
        params_);
    return os.str();
  }

 private:
  explicit LossModel(Params p) : params_(std::move(p)) {}

  static void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ValidationError(std::string(what) + " must be positive and finite");
  }

  static void check_loss(double x) {
    if (!(x >= 0.0)) throw DomainError("loss argument must be nonnegative");
  }

  // exponential
  static double cdf_impl(const loss::Exponential& p, double x) {
    return -std::expm1(-x / p.mean);
  }
  static double survival_impl(const loss::Exponential& p, double x) {
    return std::exp(-x / p.mean);
  }
  static double quantile_impl(const loss::Exponential& p, double q) {
    return -p.mean * std::log1p(-q);
  }
  static double tail_integral_impl(const loss::Exponential& p, double t) {
    return p.mean * std::exp(-t / p.mean);
  }
  static double mean_impl(const loss::Exponential& p) { return p.mean; }
  static loss::Exponential scale_params(const loss::Exponential& p, double k) {
    return {p.mean * k};
  }

  // pareto
  static double cdf_impl(const loss::Pareto& p, double x) {
    return x < p.scale ? 0.0 : -std::expm1(p.shape * std::log(p.scale / x));
  }
  static double survival_impl(const loss::Pareto& p, double x) {
    return x < p.scale ? 1.0 : std::pow(p.scale / x, p.shape);
  }
  static double quantile_impl(const loss::Pareto& p, double q) {
    return p.scale * std::exp(-std::log1p(-q) / p.shape);
  }
  static double tail_integral_impl(const loss::Pareto& p, double t) {
    if (!(p.shape > 1.0))
      throw InfiniteMeanError("pareto tail integral diverges for shape <= 1");
    if (t < p.scale) return (p.scale - t) + p.scale / (p.shape - 1.0);
    return t * std::pow(p.scale / t, p.shape) / (p.shape - 1.0);
  }
  static double mean_impl(const loss::Pareto& p) {
    if (!(p.shape > 1.0))
      throw InfiniteMeanError("pareto mean is infinite for shape <= 1");
    return p.scale * p.shape / (p.shape - 1.0);
  }
  static loss::Pareto scale_params(const loss::Pareto& p, double k) {
    return {p.shape, p.scale * k};
  }

  // lognormal
  static boost::math::lognormal_distribution<> dist(const loss::Lognormal& p) {
    return boost::math::lognormal_distribution<>(p.mu, p.sigma);
  }
  static double cdf_impl(const loss::Lognormal& p, double x) {
    return x <= 0.0 ? 0.0 : boost::math::cdf(dist(p), x);
  }
  static double survival_impl(const loss::Lognormal& p, double x) {
    return x <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(dist(p), x));
  }
  static double quantile_impl(const loss::Lognormal& p, double q) {
    return boost::math::quantile(dist(p), q);
  }
  static double tail_integral_impl(const loss::Lognormal& p, double t) {
    const double median = std::exp(p.mu);
    auto s = [&p](double x) { return survival_impl(p, x); };
    const double nodes[] = {median};
    return numerics::integrate_split(s, t, kInf, nodes, 1e-12);
  }
  static double mean_impl(const loss::Lognormal& p) {
    return std::exp(p.mu + 0.5 * p.sigma * p.sigma);
  }
  static loss::Lognormal scale_params(const loss::Lognormal& p, double k) {
    return {p.mu + std::log(k), p.sigma};
  }

  // gamma
  static boost::math::gamma_distribution<> dist(const loss::Gamma& p) {
    return boost::math::gamma_distribution<>(p.shape, p.scale);
  }
  static double cdf_impl(const loss::Gamma& p, double x) {
    return x <= 0.0 ? 0.0 : boost::math::cdf(dist(p), x);
  }
  static double survival_impl(const loss::Gamma& p, double x) {
    return x <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(dist(p), x));
  }
  static double quantile_impl(const loss::Gamma& p, double q) {
    return boost::math::quantile(dist(p), q);
  }
  static double tail_integral_impl(const loss::Gamma& p, double t) {
    auto s = [&p](double x) { return survival_impl(p, x); };
    const double nodes[] = {p.shape * p.scale};
    return numerics::integrate_split(s, t, kInf, nodes, 1e-12);
  }
  static double mean_impl(const loss::Gamma& p) { return p.shape * p.scale; }
  static loss::Gamma scale_params(const loss::Gamma& p, double k) {
    return {p.shape, p.scale * k};
  }

  // empirical
  static std::size_t segment(const loss::EmpiricalTable& p, double x) {
    // index i with x[i] <= x < x[i+1]
    auto it = std::upper_bound(p.x.begin(), p.x.end(), x);
    return static_cast<std::size_t>(it - p.x.begin()) - 1;
  }
  static double cdf_impl(const loss::EmpiricalTable& p, double x) {
    return 1.0 - survival_impl(p, x);
  }
  static double survival_impl(const loss::EmpiricalTable& p, double x) {
    const std::size_t m = p.x.size() - 1;
    if (x >= p.x[m]) {
      if (p.tail_hazard == 0.0) return 0.0;
      return (1.0 - p.cdf[m]) * std::exp(-p.tail_hazard * (x - p.x[m]));
    }
    const std::size_t i = segment(p, x);
    const double w = (x - p.x[i]) / (p.x[i + 1] - p.x[i]);
    return (1.0 - p.cdf[i]) + w * (p.cdf[i] - p.cdf[i + 1]);
  }
  static double quantile_impl(const loss::EmpiricalTable& p, double q) {
    if (q <= p.cdf.front()) return p.x.front();
    const std::size_t m = p.x.size() - 1;
    if (q > p.cdf[m]) {
      // only reachable with an exponential tail
      return p.x[m] + std::log((1.0 - p.cdf[m]) / (1.0 - q)) / p.tail_hazard;
    }
    auto it = std::lower_bound(p.cdf.begin(), p.cdf.end(), q);
    const std::size_t j = static_cast<std::size_t>(it - p.cdf.begin());
    const std::size_t i = j - 1;
    return p.x[i] +
           (q - p.cdf[i]) / (p.cdf[j] - p.cdf[i]) * (p.x[j] - p.x[i]);
  }
  static double tail_integral_impl(const loss::EmpiricalTable& p, double t) {
    const std::size_t m = p.x.size() - 1;
    double total = 0.0;
    if (p.tail_hazard > 0.0)
      total += survival_impl(p, std::max(t, p.x[m])) / p.tail_hazard;
    for (std::size_t i = 0; i < m; ++i) {
      const double lo = std::max(t, p.x[i]);
      const double hi = p.x[i + 1];
      if (hi <= lo) continue;
      total += 0.5 * (survival_impl(p, lo) + (1.0 - p.cdf[i + 1])) * (hi - lo);
    }
    return total;
  }
  static double mean_impl(const loss::EmpiricalTable& p) {
    return tail_integral_impl(p, 0.0);
  }
  static loss::EmpiricalTable scale_params(const loss::EmpiricalTable& p,
                                           double k) {
    loss::EmpiricalTable out = p;
    for (double& v : out.x) v *= k;
    out.tail_hazard = p.tail_hazard / k;
    return out;
  }

  // truncated normal portfolio
  static double lower_mass(const loss::NormalPortfolio& p) {
    return boost::math::cdf(boost::math::normal_distribution<>(),
                            -p.location / p.spread);
  }
  static double cdf_impl(const loss::NormalPortfolio& p, double x) {
    const boost::math::normal_distribution<> n;
    const double lo = lower_mass(p);
    return (boost::math::cdf(n, (x - p.location) / p.spread) - lo) / (1.0 - lo);
  }
  static double survival_impl(const loss::NormalPortfolio& p, double x) {
    const boost::math::normal_distribution<> n;
    return boost::math::cdf(boost::math::complement(n, (x - p.location) / p.spread)) /
           (1.0 - lower_mass(p));
  }
  static double quantile_impl(const loss::NormalPortfolio& p, double q) {
    const boost::math::normal_distribution<> n;
    const double tail = (1.0 - q) * (1.0 - lower_mass(p));
    const double z = boost::math::quantile(boost::math::complement(n, tail));
    return std::max(0.0, p.location + p.spread * z);
  }
  static double tail_integral_impl(const loss::NormalPortfolio& p, double t) {
    const boost::math::normal_distribution<> n;
    const double z = (t - p.location) / p.spread;
    const double upper = boost::math::cdf(boost::math::complement(n, z));
    return p.spread * (boost::math::pdf(n, z) - z * upper) /
           (1.0 - lower_mass(p));
  }
  static double mean_impl(const loss::NormalPortfolio& p) {
    return tail_integral_impl(p, 0.0);
  }
  static loss::NormalPortfolio scale_params(const loss::NormalPortfolio& p,
                                            double k) {
    return {p.location * k, p.spread * k};
  }

  Params params_;
};

}  // namespace reinsure

#endif  // REINSURE_LOSS_MODELS_HPP
