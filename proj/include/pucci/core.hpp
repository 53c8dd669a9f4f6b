#pragma once

// Radial reduction of Pucci's extremal operators.
//
// For u(x) = v(|x|) the Hessian has eigenvalues v'' (simple) and v'/r
// (multiplicity N-1), so -M+(D^2 u) = mu u + f(u, mu) becomes the scalar ODE
//
//     v'' = M( -(N-1)/r * m(v') - mu v - f(v, mu) )
//
// with m(s) = Lambda s (s > 0), lambda s (s <= 0) and M = m^{-1}.

#include <cmath>
#include <string>

#include "pucci/error.hpp"

namespace pucci {

enum class Operator { MaxOp, MinOp };

struct PucciParams {
  double lambda_lo = 1.0;  // lower ellipticity constant
  double lambda_hi = 1.0;  // upper ellipticity constant
  int dim = 1;
  Operator op = Operator::MaxOp;

  [[nodiscard]] double tilde_n_plus() const noexcept {
    return lambda_lo * (dim - 1) / lambda_hi + 1.0;
  }
  [[nodiscard]] double tilde_n_minus() const noexcept {
    return lambda_hi * (dim - 1) / lambda_lo + 1.0;
  }

  void validate() const {
    if (!(std::isfinite(lambda_lo) && lambda_lo > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "lambda must be positive and finite");
    }
    if (!(std::isfinite(lambda_hi) && lambda_hi >= lambda_lo)) {
      throw Error(ErrorKind::InvalidArgument, "Lambda must be finite and >= lambda");
    }
    if (dim < 1) {
      throw Error(ErrorKind::InvalidArgument, "dim must be >= 1");
    }
  }
};

inline PucciParams make_params(double lambda_lo, double lambda_hi, int dim,
                               Operator op = Operator::MaxOp) {
  PucciParams p{lambda_lo, lambda_hi, dim, op};
  p.validate();
  return p;
}

struct RadialState {
  double r = 0.0;
  double u = 0.0;
  double du = 0.0;
};

struct RadialDerivative {
  double du = 0.0;
  double d2u = 0.0;
};

enum class NonlinearityFamily { Zero, OddPower, LionsPower };

/// f(s, mu), restricted to families with f(s, mu) = o(|s|) at s = 0.
struct Nonlinearity {
  NonlinearityFamily family = NonlinearityFamily::Zero;
  double c = 0.0;
  double p = 2.0;

  static Nonlinearity zero() { return {}; }
  static Nonlinearity odd_power(double c, double p) {
    Nonlinearity nl{NonlinearityFamily::OddPower, c, p};
    nl.validate();
    return nl;
  }
  static Nonlinearity lions_power(double p) {
    Nonlinearity nl{NonlinearityFamily::LionsPower, 0.0, p};
    nl.validate();
    return nl;
  }

  void validate() const {
    if (family != NonlinearityFamily::Zero && !(std::isfinite(p) && p > 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "nonlinearity exponent p must be > 1");
    }
    if (!std::isfinite(c)) {
      throw Error(ErrorKind::InvalidArgument, "nonlinearity coefficient must be finite");
    }
  }

  [[nodiscard]] double operator()(double s, double mu) const noexcept {
    switch (family) {
      case NonlinearityFamily::Zero:
        return 0.0;
      case NonlinearityFamily::OddPower:
        return s == 0.0 ? 0.0 : c * std::copysign(std::pow(std::abs(s), p), s);
      case NonlinearityFamily::LionsPower:
        return s == 0.0 ? 0.0 : -mu * std::copysign(std::pow(std::abs(s), p), s);
    }
    return 0.0;
  }

  [[nodiscard]] std::string describe() const;
};

inline std::string Nonlinearity::describe() const {
  switch (family) {
    case NonlinearityFamily::Zero:
      return "zero";
    case NonlinearityFamily::OddPower:
      return "oddpower:c=" + std::to_string(c) + ",p=" + std::to_string(p);
    case NonlinearityFamily::LionsPower:
      return "lions:p=" + std::to_string(p);
  }
  return "unknown";
}

/// Below this radius the 1/r term is replaced by its analytic limit.
inline constexpr double kOriginRadius = 1e-8;

[[nodiscard]] inline double eval_m(double s, const PucciParams& params) noexcept {
  return s > 0.0 ? params.lambda_hi * s : params.lambda_lo * s;
}

[[nodiscard]] inline double eval_M(double s, const PucciParams& params) noexcept {
  return s > 0.0 ? s / params.lambda_hi : s / params.lambda_lo;
}

/// Limit of v''(r) as r -> 0 for the MaxOp equation: the fixed point of
/// s = M(-(N-1) m(s) - q) with q = mu*u0 + f_val.
[[nodiscard]] inline double curvature_at_origin(double u0, double mu, double f_val,
                                                const PucciParams& params) noexcept {
  const double q = mu * u0 + f_val;
  const double n = static_cast<double>(params.dim);
  if (q > 0.0) return -q / (params.lambda_lo * n);
  if (q < 0.0) return -q / (params.lambda_hi * n);
  return 0.0;
}

namespace detail {

// (v', v'') for the MaxOp equation with the forcing value supplied directly.
[[nodiscard]] inline RadialDerivative max_op_rhs(double r, double u, double du, double mu,
                                                 double f_val,
                                                 const PucciParams& params) noexcept {
  if (r < kOriginRadius) {
    return {du, curvature_at_origin(u, mu, f_val, params)};
  }
  const double arg = -(params.dim - 1) / r * eval_m(du, params) - mu * u - f_val;
  return {du, eval_M(arg, params)};
}

}  // namespace detail

/// Right-hand side (u', u'') of the radial equation. MinOp is evaluated as
/// -rhs_MaxOp on the sign-flipped state, using M+(-X) = -M-(X); the forcing
/// transforms as f~(s) = -f(-s), so f~(-u) = -f(u).
[[nodiscard]] inline RadialDerivative rhs(const RadialState& state, double mu,
                                          const Nonlinearity& nl,
                                          const PucciParams& params) noexcept {
  const double f_val = nl(state.u, mu);
  if (params.op == Operator::MaxOp) {
    return detail::max_op_rhs(state.r, state.u, state.du, mu, f_val, params);
  }
  const RadialDerivative flipped =
      detail::max_op_rhs(state.r, -state.u, -state.du, mu, -f_val, params);
  return {-flipped.du, -flipped.d2u};
}

}  // namespace pucci
