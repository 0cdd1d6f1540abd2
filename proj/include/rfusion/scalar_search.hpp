#pragma once

// One-dimensional root finding and maximization used across the library.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <cstdint>
#include <utility>

#include <boost/math/tools/toms748_solve.hpp>

namespace rfusion {

struct ScalarOptimum {
  double x = 0.0;
  double value = 0.0;
};

/// Bisection for the sign change of an increasing function on [lo, hi].
///
/// `f(lo) <= 0 <= f(hi)` is assumed. Stops when the bracket is narrower than
/// `width` or cannot be split further in floating point. Returns the bracket.
template <typename F>
std::pair<double, double> bisect_increasing(F&& f, double lo, double hi, double width,
                                            std::size_t max_iter = 4096) {
  for (std::size_t it = 0; it < max_iter && hi - lo > width; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return {lo, hi};
}

/// Bracketing root of an increasing function on [lo, hi] (TOMS 748).
///
/// Same contract as bisect_increasing; an endpoint is returned as a
/// degenerate bracket when f does not change sign inside.
template <typename F>
std::pair<double, double> root_increasing(F&& f, double lo, double hi, double width,
                                          std::uintmax_t max_iter = 200) {
  const double f_lo = f(lo);
  if (f_lo >= 0.0) return {lo, lo};
  const double f_hi = f(hi);
  if (f_hi <= 0.0) return {hi, hi};
  const auto done = [width](double a, double b) { return std::abs(b - a) <= width; };
  return boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, done, max_iter);
}

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
template <typename F>
ScalarOptimum golden_section_max(F&& f, double lo, double hi, double tol = 1e-10) {
  if (!(lo <= hi)) throw std::invalid_argument("golden_section_max: empty bracket");
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
    if (c >= d) break;
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

/// Maximize f on [lo, hi]: a uniform grid locates the best cell, the grid is
/// re-laid inside the bracket around it `refinements` times, and golden
/// section finishes. Endpoints are candidates too, so a maximum sitting on
/// the boundary is returned as such. Ties on the grid go to the lowest x.
template <typename F>
ScalarOptimum grid_golden_max(F&& f, double lo, double hi, std::size_t grid = 64,
                              std::size_t refinements = 3, double tol = 1e-10) {
  if (grid < 3) throw std::invalid_argument("grid_golden_max: grid needs at least 3 points");
  if (!(lo < hi)) throw std::invalid_argument("grid_golden_max: empty interval");
  ScalarOptimum best{lo, f(lo)};
  double a = lo;
  double b = hi;
  for (std::size_t level = 0; level <= refinements; ++level) {
    const double step = (b - a) / static_cast<double>(grid - 1);
    std::size_t best_i = 0;
    double best_v = -INFINITY;
    for (std::size_t i = 0; i < grid; ++i) {
      const double x = (i + 1 == grid) ? b : a + step * static_cast<double>(i);
      const double v = f(x);
      if (v > best_v) {
        best_v = v;
        best_i = i;
      }
    }
    const double xb = (best_i + 1 == grid) ? b : a + step * static_cast<double>(best_i);
    if (best_v > best.value) best = {xb, best_v};
    const double na = best_i == 0 ? a : a + step * static_cast<double>(best_i - 1);
    const double nb = best_i + 1 >= grid - 1 ? b : a + step * static_cast<double>(best_i + 1);
    a = na;
    b = nb;
  }
  const ScalarOptimum refined = golden_section_max(f, a, b, tol);
  if (refined.value > best.value) return refined;
  return best;
}

}  // namespace rfusion
