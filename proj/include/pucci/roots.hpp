#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "pucci/error.hpp"

namespace pucci {

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  double lo = 0.0;  // final bracket
  double hi = 0.0;
  int iterations = 0;
};

/// Brent's zeroin on a sign-changing bracket: inverse quadratic / secant
/// steps, falling back to bisection whenever they leave the bracket or
/// converge too slowly. Stops when the bracket is narrower than
/// `xtol_at(x)` or |f| <= ftol.
template <typename F, typename XTol>
RootResult brent_root(F&& f, double a, double b, double fa, double fb, XTol&& xtol_at,
                      double ftol, int max_iter = 200) {
  if (fa == 0.0) return {a, fa, a, a, 0};
  if (fb == 0.0) return {b, fb, b, b, 0};
  if ((fa > 0.0) == (fb > 0.0)) {
    throw Error(ErrorKind::NoBracket, "endpoint values have the same sign");
  }
  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  int it = 0;
  for (; it < max_iter; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol = 0.5 * xtol_at(b);
    const double half = 0.5 * (c - b);
    if (std::abs(half) <= tol || std::abs(fb) <= ftol || fb == 0.0) break;
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p;
      double q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * half * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * half * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = half;
        e = d;
      }
    } else {
      d = half;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : std::copysign(tol, half);
    fb = f(b);
  }
  const double lo = std::min(b, c);
  const double hi = std::max(b, c);
  return {b, fb, lo, hi, it};
}

}  // namespace pucci
