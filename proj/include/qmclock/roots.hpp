#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <type_traits>
#include <utility>

#include "qmclock/error.hpp"

namespace qmclock {

template <typename F>
concept ScalarFunction = std::regular_invocable<F&, double> &&
    std::convertible_to<std::invoke_result_t<F&, double>, double>;

struct Extremum {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section search for the maximum of a unimodal f on [a, b], stopped
/// once the bracket is narrower than tol.
template <ScalarFunction F>
Extremum golden_section_maximize(F&& f, double a, double b, double tol) {
  if (!(b > a)) throw ConfigError("golden_section_maximize requires a < b");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    if (c == d) break;
  }
  return fc > fd ? Extremum{c, fc} : Extremum{d, fd};
}

template <ScalarFunction F>
Extremum golden_section_minimize(F&& f, double a, double b, double tol) {
  auto r = golden_section_maximize([&](double x) { return -f(x); }, a, b, tol);
  return {r.x, -r.value};
}

/// Bisection for a sign change of f on [a, b]. Stops when the bracket is
/// below rel_tol·max(|a|,|b|) + abs_tol or can no longer be split in
/// floating point.
template <ScalarFunction F>
double bisect_root(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0) {
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw CrossingError("bisect_root: no sign change in bracket");
  for (int it = 0; it < 400; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= std::min(a, b) || m >= std::max(a, b)) break;
    if (std::abs(b - a) <= rel_tol * std::max(std::abs(a), std::abs(b)) + abs_tol) break;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  return 0.5 * (a + b);
}

/// Fourth-order central difference f'(x).
template <ScalarFunction F>
double central_derivative(F&& f, double x, double h) {
  return (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h);
}

/// Walks from x0 in steps of `step` (sign gives the direction) until f stops
/// decreasing, then polishes the local minimum by golden section.
template <ScalarFunction F>
Extremum first_local_minimum(F&& f, double x0, double step, int max_steps, double tol) {
  double prev = f(x0);
  double x = x0;
  for (int i = 0; i < max_steps; ++i) {
    const double xn = x + step;
    const double fn = f(xn);
    if (fn > prev) {
      const double lo = std::min(x - step, xn);
      const double hi = std::max(x - step, xn);
      return golden_section_minimize(f, lo, hi, tol);
    }
    prev = fn;
    x = xn;
  }
  throw BracketError("first_local_minimum: no minimum within scan range");
}

}  // namespace qmclock
