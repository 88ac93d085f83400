#ifndef REINSURE_CONTRACTS_HPP
#define REINSURE_CONTRACTS_HPP

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "reinsure/errors.hpp"
#include "reinsure/numerics.hpp"

namespace reinsure {

/// Full-slope layer [attachment, detachment); detachment may be +inf.
struct Layer {
  double attachment;
  double detachment;

  bool operator==(const Layer&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, const Layer& l) {
  return os << "(" << l.attachment << ", " << l.detachment << ")";
}

/// Segment [lo, hi) of an indemnity schedule with constant slope.
struct Segment {
  double lo;
  double hi;
  double slope;
};

/// Piecewise-linear indemnity I(x) with I(0) = 0 and slopes in [0, 1].
/// Stored in canonical form: x_0 = 0 < x_1 < ... < x_m, slope_j on
/// [x_j, x_{j+1}) with x_{m+1} = inf, no two adjacent slopes equal.
class IndemnitySchedule {
 public:
  IndemnitySchedule() : IndemnitySchedule({0.0}, {0.0}) {}

  IndemnitySchedule(std::vector<double> breakpoints, std::vector<double> slopes) {
    if (breakpoints.empty() || breakpoints.size() != slopes.size())
      throw ValidationError("schedule needs one slope per breakpoint");
    if (breakpoints.front() != 0.0)
      throw ValidationError("schedule breakpoints must start at 0");
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
      if (!std::isfinite(breakpoints[i]))
        throw ValidationError("schedule breakpoints must be finite");
      if (i > 0 && breakpoints[i] < breakpoints[i - 1])
        throw ValidationError("schedule breakpoints must be increasing");
      if (!(slopes[i] >= 0.0 && slopes[i] <= 1.0))
        throw ValidationError("schedule slopes must lie in [0, 1]");
    }
    // drop zero-length segments, merge equal neighbours
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
      const bool zero_length =
          i + 1 < breakpoints.size() && breakpoints[i + 1] == breakpoints[i];
      if (zero_length) continue;
      if (!slopes_.empty() && slopes_.back() == slopes[i]) continue;
      x_.push_back(breakpoints[i]);
      slopes_.push_back(slopes[i]);
    }
    cumulative_.resize(x_.size());
    cumulative_[0] = 0.0;
    for (std::size_t i = 1; i < x_.size(); ++i)
      cumulative_[i] = cumulative_[i - 1] + slopes_[i - 1] * (x_[i] - x_[i - 1]);
  }

  static IndemnitySchedule zero() { return IndemnitySchedule({0.0}, {0.0}); }
  static IndemnitySchedule identity() { return IndemnitySchedule({0.0}, {1.0}); }

  /// I(x) = min((x - a)+, b - a); b = inf is a plain stop loss.
  static IndemnitySchedule truncated_stop_loss(double a, double b) {
    if (!(a >= 0.0)) throw DomainError("attachment must be nonnegative");
    if (!(a < b)) throw DomainError("attachment must be below detachment");
    return from_layers({Layer{a, b}});
  }

  /// Bang-bang schedule with slope 1 on the given layers, which must be
  /// sorted and non-overlapping (touching layers merge).
  static IndemnitySchedule from_layers(const std::vector<Layer>& layers) {
    std::vector<double> xs{0.0};
    std::vector<double> ss{0.0};
    double last = 0.0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const Layer& l = layers[i];
      if (!(l.attachment >= 0.0) || !std::isfinite(l.attachment))
        throw DomainError("layer attachment must be finite and nonnegative");
      if (!(l.attachment < l.detachment))
        throw DomainError("layer attachment must be below detachment");
      if (l.attachment < last)
        throw DomainError("layers must be sorted and non-overlapping");
      if (std::isinf(l.detachment) && i + 1 != layers.size())
        throw DomainError("only the last layer may be unbounded");
      xs.push_back(l.attachment);
      ss.push_back(1.0);
      if (std::isfinite(l.detachment)) {
        xs.push_back(l.detachment);
        ss.push_back(0.0);
        last = l.detachment;
      }
    }
    return IndemnitySchedule(std::move(xs), std::move(ss));
  }

  double evaluate(double x) const {
    if (!(x >= 0.0)) throw DomainError("indemnity argument must be nonnegative");
    const std::size_t i = locate(x);
    return cumulative_[i] + slopes_[i] * (x - x_[i]);
  }
  double operator()(double x) const { return evaluate(x); }

  /// x - I(x).
  double retained(double x) const { return x - evaluate(x); }

  const std::vector<double>& breakpoints() const { return x_; }
  const std::vector<double>& slopes() const { return slopes_; }

  std::vector<Segment> segments() const {
    std::vector<Segment> out;
    for (std::size_t i = 0; i < x_.size(); ++i)
      out.push_back({x_[i], i + 1 < x_.size() ? x_[i + 1] : kInf, slopes_[i]});
    return out;
  }

  bool is_bang_bang() const {
    return std::all_of(slopes_.begin(), slopes_.end(),
                       [](double s) { return s == 0.0 || s == 1.0; });
  }

  /// Maximal slope-one intervals in increasing order.
  std::vector<Layer> layers() const {
    if (!is_bang_bang())
      throw NotBangBangError("schedule has fractional slopes");
    std::vector<Layer> out;
    for (const Segment& s : segments())
      if (s.slope == 1.0) out.push_back({s.lo, s.hi});
    return out;
  }

  IndemnitySchedule rescaled(double xi) const {
    if (!(xi > 0.0) || !std::isfinite(xi))
      throw DomainError("rescale factor must be positive");
    std::vector<double> xs = x_;
    for (double& v : xs) v *= xi;
    return IndemnitySchedule(std::move(xs), slopes_);
  }

  bool operator==(const IndemnitySchedule& o) const {
    return x_ == o.x_ && slopes_ == o.slopes_;
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(10);
    if (is_bang_bang()) {
      const auto ls = layers();
      if (ls.empty()) return "no cession";
      for (std::size_t i = 0; i < ls.size(); ++i)
        os << (i ? " + " : "") << "[" << ls[i].attachment << ", "
           << ls[i].detachment << ")";
      return os.str();
    }
    for (std::size_t i = 0; i < x_.size(); ++i)
      os << (i ? " " : "") << x_[i] << ":" << slopes_[i];
    return os.str();
  }

 private:
  std::size_t locate(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
  }

  std::vector<double> x_;
  std::vector<double> slopes_;
  std::vector<double> cumulative_;
};

inline std::ostream& operator<<(std::ostream& os, const IndemnitySchedule& s) {
  return os << s.describe();
}

}  // namespace reinsure

#endif  // REINSURE_CONTRACTS_HPP
