#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rmtldp/errors.hpp"

namespace rmtldp::numerics {

/// Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre nodes (ascending) and weights, by Newton iteration on
/// P_n from the Chebyshev initial guesses.
QuadratureRule gauss_legendre(int n);

/// Adaptive Gauss-Kronrod (7/15) integral of f over [a, b].
/// Global adaptive bisection until the summed error estimate is below
/// max(abs_tol, rel_tol * |value|).
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12, double rel_tol = 1e-12);

/// Bisection on a function whose sign changes once in [lo, hi].
/// Stops when the bracket is narrower than `xtol` or f hits zero exactly.
template <class F>
double bisect(F&& f, double lo, double hi, double xtol, int max_iter = 400) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) {
    throw SolverError("bisect: no sign change on [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "], f = (" + std::to_string(flo) + ", " +
                      std::to_string(fhi) + ")");
  }
  for (int it = 0; it < max_iter && hi - lo > xtol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Golden-section maximisation of a unimodal function on [lo, hi].
/// Returns (argmax, max).
std::pair<double, double> golden_section_max(const std::function<double(double)>& f,
                                             double lo, double hi, double xtol = 1e-10);

/// n points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int n);

/// n log-spaced points from lo to hi inclusive (both > 0).
std::vector<double> logspace(double lo, double hi, int n);

}  // namespace rmtldp::numerics
