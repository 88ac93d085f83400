#ifndef REINSURE_NUMERICS_HPP
#define REINSURE_NUMERICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "reinsure/errors.hpp"

namespace reinsure {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Solver tolerances shared by valuation, optimizer and condition checks.
struct Tolerances {
  double quad = 1e-10;  // absolute quadrature tolerance
  double root = 1e-10;  // bracket width for bisection on x
};

namespace numerics {

namespace detail {

struct QuadPiece {
  double lo;
  double hi;
  double value;
  double error;
  bool operator<(const QuadPiece& o) const { return error < o.error; }
};

/// 15-point Gauss / 31-point Kronrod pair on [lo, hi].
template <class F>
QuadPiece gauss_kronrod_31(F& f, double lo, double hi) {
  using boost::math::quadrature::gauss;
  using boost::math::quadrature::gauss_kronrod;
  const auto& x = gauss_kronrod<double, 31>::abscissa();
  const auto& wk = gauss_kronrod<double, 31>::weights();
  const auto& wg = gauss<double, 15>::weights();
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double fc = f(mid);
  double kron = fc * wk[0];
  double gaus = fc * wg[0];
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double fsum = f(mid + half * x[i]) + f(mid - half * x[i]);
    kron += fsum * wk[i];
    if (i % 2 == 0) gaus += fsum * wg[i / 2];
  }
  const double err = std::max(std::abs(kron - gaus) * half,
                              std::abs(kron * half) * 4e-16);
  return {lo, hi, kron * half, err};
}

template <class F>
double adaptive_unit(F& f, double lo, double hi, double abs_tol) {
  std::vector<QuadPiece> heap{gauss_kronrod_31(f, lo, hi)};
  double total = heap.front().value;
  double error = heap.front().error;
  const int max_pieces = 4000;
  while ((int)heap.size() < max_pieces &&
         error > std::max(abs_tol, 1e-13 * std::abs(total))) {
    std::pop_heap(heap.begin(), heap.end());
    const QuadPiece worst = heap.back();
    heap.pop_back();
    const double m = 0.5 * (worst.lo + worst.hi);
    if (!(m > worst.lo && m < worst.hi)) {
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end());
      break;
    }
    const QuadPiece left = gauss_kronrod_31(f, worst.lo, m);
    const QuadPiece right = gauss_kronrod_31(f, m, worst.hi);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end());
  }
  // re-sum to shed accumulated cancellation
  total = 0.0;
  error = 0.0;
  for (const QuadPiece& p : heap) {
    total += p.value;
    error += p.error;
  }
  if (!std::isfinite(total))
    throw SolverError("quadrature produced a non-finite value");
  if (error > std::max(abs_tol, 1e-8 * std::abs(total)))
    throw SolverError("quadrature failed to reach its tolerance");
  return total;
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (15/31) on [a, b]; b may be +inf, in
/// which case x = a + t / (1 - t) maps [0, 1) onto [a, inf). The integrand
/// is assumed bounded. Returns 0 for empty or reversed intervals.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-10) {
  if (!(b > a)) return 0.0;
  if (std::isinf(b)) {
    auto g = [&f, a](double t) {
      const double r = 1.0 - t;
      if (!(r > 0.0)) return 0.0;
      const double x = a + t / r;
      if (std::isinf(x)) return 0.0;
      const double v = f(x) / (r * r);
      return std::isfinite(v) ? v : 0.0;
    };
    return detail::adaptive_unit(g, 0.0, 1.0, abs_tol);
  }
  return detail::adaptive_unit(f, a, b, abs_tol);
}

/// Integrates over [a, b] after splitting at the given interior nodes, which
/// are typically points where the integrand is only piecewise smooth.
template <class F>
double integrate_split(F&& f, double a, double b, std::span<const double> nodes,
                       double abs_tol = 1e-10) {
  if (!(b > a)) return 0.0;
  double total = 0.0;
  double lo = a;
  for (double node : nodes) {
    if (node <= lo || node >= b) continue;
    total += integrate(f, lo, node, abs_tol);
    lo = node;
  }
  total += integrate(f, lo, b, abs_tol);
  return total;
}

/// Boundary of a monotone predicate: pred(lo) is true, pred(hi) is false.
/// Returns a point within tol of the switch; the returned point satisfies
/// pred when `inclusive` is set (the last true point found).
template <class Pred>
double bisect_boundary(Pred&& pred, double lo, double hi, double tol,
                       bool inclusive = true) {
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (pred(mid))
      lo = mid;
    else
      hi = mid;
  }
  return inclusive ? lo : hi;
}

/// Root of a continuous function with f(lo) and f(hi) of opposite sign (or
/// zero at an end point).
template <class F>
double bisect_root(F&& f, double lo, double hi, double tol) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  const double fhi = f(hi);
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw SolverError("bisect_root: interval does not bracket a root");
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

/// Maximizer of a unimodal (e.g. concave) function on [lo, hi] by golden
/// section search.
template <class F>
double golden_section_max(F&& f, double lo, double hi, double tol = 1e-13) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 300 && hi - lo > tol; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  // End points win ties so plateaus at the boundary are reported exactly.
  double best = 0.5 * (lo + hi);
  double fbest = f(best);
  return fbest >= std::max(f1, f2) ? best : (f1 >= f2 ? x1 : x2);
}

/// Result of a derivative-free compass search.
template <std::size_t N>
struct CompassResult {
  std::array<double, N> point;
  double value;
  int evaluations;
};

/// Maximizes f over a box-free domain with a compass (coordinate pattern)
/// search. `feasible` rejects trial points; `f` is only called on feasible
/// points. Steps halve on failure until all are below min_step.
template <std::size_t N, class F, class Feasible>
CompassResult<N> compass_maximize(F&& f, Feasible&& feasible,
                                  std::array<double, N> start,
                                  std::array<double, N> step, double min_step,
                                  int max_evaluations = 20000) {
  double best = f(start);
  int evals = 1;
  for (;;) {
    bool improved = false;
    for (std::size_t d = 0; d < N && !improved; ++d) {
      for (double dir : {1.0, -1.0}) {
        auto trial = start;
        trial[d] += dir * step[d];
        if (!feasible(trial)) continue;
        const double v = f(trial);
        ++evals;
        if (v > best) {
          best = v;
          start = trial;
          improved = true;
          break;
        }
      }
    }
    if (evals >= max_evaluations) break;
    if (!improved) {
      bool all_small = true;
      for (auto& s : step) {
        s *= 0.5;
        if (s >= min_step) all_small = false;
      }
      if (all_small) break;
    }
  }
  return {start, best, evals};
}

/// n equally spaced points from lo to hi inclusive (n >= 2).
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = (i + 1 == n) ? hi
                          : lo + (hi - lo) * static_cast<double>(i) /
                                     static_cast<double>(n - 1);
  return out;
}

}  // namespace numerics
}  // namespace reinsure

#endif  // REINSURE_NUMERICS_HPP
