#pragma once

// Radial finite-difference oracle for the shooting results.
//
// Nodes r_i = i h, h = 1/n, u_n = 0, ghost node u_{-1} = u_1. The discrete
// operator is theta(d2_i) + (N-1)/r_i theta(d1_i) with central differences
// and theta = m, i.e. the maximum over coefficient pairs (a_i, b_i) in
// [lambda, Lambda]^2 of a_i d2_i + (N-1)/r_i b_i d1_i. At the origin the
// operator is N theta(d2_0) with d2_0 = 2 (u_1 - u_0) / h^2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pucci/core.hpp"
#include "pucci/error.hpp"
#include "pucci/spectrum.hpp"

namespace pucci {

using GridFunction = std::vector<double>;

struct GridProblem {
  PucciParams params;
  int n = 16;
  double h = 1.0 / 16;

  [[nodiscard]] double r(int i) const noexcept { return i * h; }
  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(n) + 1; }
};

inline GridProblem make_grid(const PucciParams& params, int n) {
  params.validate();
  if (n < 16) throw Error(ErrorKind::InvalidArgument, "grid needs n >= 16 intervals");
  return GridProblem{params, n, 1.0 / n};
}

/// Per interior node i = 0..n-1: a_i scales d2, b_i scales the d1 term.
struct CoefficientField {
  std::vector<double> a;
  std::vector<double> b;

  static CoefficientField constant(const GridProblem& grid, double a, double b) {
    return {std::vector<double>(static_cast<std::size_t>(grid.n), a),
            std::vector<double>(static_cast<std::size_t>(grid.n), b)};
  }

  [[nodiscard]] bool within(const PucciParams& p) const noexcept {
    auto ok = [&](double x) { return x >= p.lambda_lo && x <= p.lambda_hi; };
    return std::all_of(a.begin(), a.end(), ok) && std::all_of(b.begin(), b.end(), ok);
  }
};

/// Radially symmetric grid function sampled from f(r).
template <typename F>
GridFunction sample_grid(const GridProblem& grid, F&& f) {
  GridFunction u(grid.size());
  for (int i = 0; i <= grid.n; ++i) u[static_cast<std::size_t>(i)] = f(grid.r(i));
  u.back() = 0.0;
  return u;
}

namespace detail {

inline void check_size(std::span<const double> u, const GridProblem& grid) {
  if (u.size() != grid.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "grid function has " + std::to_string(u.size()) + " entries, expected " +
                    std::to_string(grid.size()));
  }
}

struct Differences {
  double d2;
  double d1_over_r;  // (N-1)/r_i * d1_i without the coefficient; 0 at the origin
};

inline Differences differences(std::span<const double> u, const GridProblem& grid, int i) {
  const double h2 = grid.h * grid.h;
  const auto at = [&](int j) { return j >= grid.n ? 0.0 : u[static_cast<std::size_t>(j)]; };
  if (i == 0) return {2.0 * (at(1) - at(0)) / h2, 0.0};
  const double d2 = (at(i + 1) - 2.0 * at(i) + at(i - 1)) / h2;
  const double d1 = (at(i + 1) - at(i - 1)) / (2.0 * grid.h);
  return {d2, (grid.params.dim - 1) / grid.r(i) * d1};
}

// Tridiagonal rows of -L_A - mu on the unknowns u_0..u_{n-1}.
struct Tridiagonal {
  std::vector<double> lower, diag, upper;
};

inline Tridiagonal assemble(const GridProblem& grid, const CoefficientField& field, double mu) {
  const auto n = static_cast<std::size_t>(grid.n);
  Tridiagonal t{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                std::vector<double>(n, 0.0)};
  const double h2 = grid.h * grid.h;
  const double nm1 = grid.params.dim - 1;
  {
    const double c = (field.a[0] + nm1 * field.b[0]) * 2.0 / h2;
    t.diag[0] = c - mu;
    t.upper[0] = -c;
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double ri = static_cast<double>(i) * grid.h;
    const double second = field.a[i] / h2;
    const double first = field.b[i] * nm1 / (2.0 * ri * grid.h);
    t.lower[i] = -(second - first);
    t.diag[i] = 2.0 * second - mu;
    t.upper[i] = -(second + first);
  }
  return t;
}

// Thomas algorithm; throws NoConvergence on a vanishing pivot.
inline GridFunction solve_tridiagonal(const Tridiagonal& t, std::span<const double> rhs) {
  const std::size_t n = t.diag.size();
  std::vector<double> c(n), d(n);
  double scale = 0.0;
  for (double x : t.diag) scale = std::max(scale, std::abs(x));
  double piv = t.diag[0];
  if (!(std::abs(piv) > 1e-14 * scale)) throw Error(ErrorKind::NoConvergence, "singular pivot", 0);
  c[0] = t.upper[0] / piv;
  d[0] = rhs[0] / piv;
  for (std::size_t i = 1; i < n; ++i) {
    piv = t.diag[i] - t.lower[i] * c[i - 1];
    if (!(std::abs(piv) > 1e-14 * scale)) {
      throw Error(ErrorKind::NoConvergence, "singular pivot", i);
    }
    c[i] = t.upper[i] / piv;
    d[i] = (rhs[i] - t.lower[i] * d[i - 1]) / piv;
  }
  GridFunction u(n + 1, 0.0);
  u[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) u[i] = d[i] - c[i] * u[i + 1];
  return u;
}

// Coefficient field attaining the discrete operator at u (Howard's policy).
inline CoefficientField best_response(std::span<const double> u, const GridProblem& grid) {
  const PucciParams& p = grid.params;
  const bool max_op = p.op == Operator::MaxOp;
  auto pick = [&](double s) {
    const bool up = s > 0.0;
    return (up == max_op) ? p.lambda_hi : p.lambda_lo;
  };
  CoefficientField f{std::vector<double>(static_cast<std::size_t>(grid.n)),
                     std::vector<double>(static_cast<std::size_t>(grid.n))};
  for (int i = 0; i < grid.n; ++i) {
    const Differences d = differences(u, grid, i);
    const auto k = static_cast<std::size_t>(i);
    f.a[k] = pick(d.d2);
    f.b[k] = i == 0 ? f.a[k] : pick(d.d1_over_r);
  }
  return f;
}

inline double sup_norm(std::span<const double> u) {
  double m = 0.0;
  for (double x : u) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

/// Linear discrete operator L_A u at every node (0 at r = 1).
inline GridFunction apply_linear(std::span<const double> u, const CoefficientField& field,
                                 const GridProblem& grid) {
  detail::check_size(u, grid);
  GridFunction out(grid.size(), 0.0);
  for (int i = 0; i < grid.n; ++i) {
    const auto d = detail::differences(u, grid, i);
    const auto k = static_cast<std::size_t>(i);
    out[k] = i == 0 ? (field.a[0] + (grid.params.dim - 1) * field.b[0]) * d.d2
                    : field.a[k] * d.d2 + field.b[k] * d.d1_over_r;
  }
  return out;
}

/// Discrete M+(D^2 u) (or M- for MinOp, via M-(X) = -M+(-X)).
inline GridFunction apply_pucci(std::span<const double> u, const GridProblem& grid) {
  detail::check_size(u, grid);
  const PucciParams& p = grid.params;
  GridFunction out(grid.size(), 0.0);
  const double sgn = p.op == Operator::MaxOp ? 1.0 : -1.0;
  for (int i = 0; i < grid.n; ++i) {
    const auto d = detail::differences(u, grid, i);
    const double t2 = eval_m(sgn * d.d2, p);
    out[static_cast<std::size_t>(i)] =
        sgn * (i == 0 ? p.dim * t2 : t2 + eval_m(sgn * d.d1_over_r, p));
  }
  return out;
}

struct PolicyResult {
  GridFunction u;
  int iterations = 0;
  // sup-norm residual of -M(D^2 u) - mu u - g after each policy update.
  std::vector<double> residuals;
};

inline constexpr int kMaxPolicyIterations = 200;

/// Howard iteration for -M+(D^2 u) - mu u = g, u_n = 0: alternate the best
/// coefficient field for the current iterate with an exact tridiagonal solve
/// until the field is stationary.
inline PolicyResult policy_solve(const GridProblem& grid, double mu, std::span<const double> g) {
  detail::check_size(g, grid);
  const auto n = static_cast<std::size_t>(grid.n);
  PolicyResult res;
  GridFunction u(grid.size(), 0.0);
  CoefficientField policy = detail::best_response(u, grid);
  auto residual = [&](std::span<const double> v) {
    const GridFunction mv = apply_pucci(v, grid);
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(-mv[i] - mu * v[i] - g[i]));
    return m;
  };
  for (int it = 1; it <= kMaxPolicyIterations; ++it) {
    u = detail::solve_tridiagonal(detail::assemble(grid, policy, mu), g.first(n));
    res.residuals.push_back(residual(u));
    CoefficientField next = detail::best_response(u, grid);
    if (next.a == policy.a && next.b == policy.b) {
      res.u = std::move(u);
      res.iterations = it;
      return res;
    }
    policy = std::move(next);
  }
  throw Error(ErrorKind::NoConvergence, "policy iteration did not become stationary");
}

struct FdEigenpair {
  double mu = 0.0;
  GridFunction eigenvector;  // sup-normalized, sign of the cone
  int iterations = 0;
};

/// Inverse power iteration in the positive (Plus) or negative (Minus) cone,
/// each step inverting -M+ with policy_solve at shift 0.
inline FdEigenpair first_half_eigenvalue_fd(Sign sign, const GridProblem& grid) {
  const double s = sign_value(sign);
  GridFunction u = sample_grid(grid, [&](double r) { return s * (1.0 - r * r); });
  double mu_prev = 0.0;
  for (int it = 1; it <= 1000; ++it) {
    GridFunction v = policy_solve(grid, 0.0, u).u;
    for (int i = 0; i < grid.n; ++i) {
      if (!(s * v[static_cast<std::size_t>(i)] > 0.0)) {
        throw Error(ErrorKind::ConeEscape, "iterate left the cone", static_cast<std::size_t>(i));
      }
    }
    const double vn = detail::sup_norm(v);
    const double mu = detail::sup_norm(u) / vn;
    for (double& x : v) x /= vn;
    u = std::move(v);
    if (it > 1 && std::abs(mu - mu_prev) < 1e-10 * std::max(1.0, mu)) {
      return {mu, std::move(u), it};
    }
    mu_prev = mu;
  }
  throw Error(ErrorKind::NoConvergence, "cone power iteration did not converge");
}

/// Principal eigenvalue of -L_A for a fixed coefficient field.
inline double linear_principal_eigenvalue(const CoefficientField& field,
                                          const GridProblem& grid) {
  const auto n = static_cast<std::size_t>(grid.n);
  const detail::Tridiagonal t = detail::assemble(grid, field, 0.0);
  GridFunction u = sample_grid(grid, [](double r) { return 1.0 - r * r; });
  double mu_prev = 0.0;
  for (int it = 1; it <= 5000; ++it) {
    GridFunction v = detail::solve_tridiagonal(t, std::span<const double>(u).first(n));
    const double vn = detail::sup_norm(v);
    const double mu = detail::sup_norm(u) / vn;
    for (double& x : v) x /= vn;
    u = std::move(v);
    if (it > 1 && std::abs(mu - mu_prev) < 1e-12 * std::max(1.0, mu)) return mu;
    mu_prev = mu;
  }
  throw Error(ErrorKind::NoConvergence, "linear power iteration did not converge");
}

/// Coefficient field drawn uniformly per node from [lambda, Lambda]^2.
/// Uses the raw 64-bit Mersenne stream so draws are identical across
/// standard libraries.
inline CoefficientField random_field(const GridProblem& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double lo = grid.params.lambda_lo;
  const double width = grid.params.lambda_hi - lo;
  auto draw = [&] { return lo + width * static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  CoefficientField f{std::vector<double>(static_cast<std::size_t>(grid.n)),
                     std::vector<double>(static_cast<std::size_t>(grid.n))};
  for (std::size_t i = 0; i < f.a.size(); ++i) {
    f.a[i] = draw();
    f.b[i] = draw();
  }
  return f;
}

inline double random_linear_eigenvalue(const GridProblem& grid, std::uint64_t seed) {
  return linear_principal_eigenvalue(random_field(grid, seed), grid);
}

/// min_i -M+(D^2 u)_i / u_i over the nodes with u_i > 0 required (i < n).
inline double rayleigh_lower_bound(std::span<const double> u, const GridProblem& grid) {
  detail::check_size(u, grid);
  for (int i = 0; i < grid.n; ++i) {
    if (!(u[static_cast<std::size_t>(i)] > 0.0)) {
      throw Error(ErrorKind::NonPositiveInput, "u must be positive off the boundary",
                  static_cast<std::size_t>(i));
    }
  }
  const GridFunction mu = apply_pucci(u, grid);
  double bound = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    bound = std::min(bound, -mu[k] / u[k]);
  }
  return bound;
}

enum class TrialSide { Upper, Lower };

struct TrialVerdict {
  TrialSide side = TrialSide::Upper;
  // False when policy iteration found no discrete solution (the inequality
  // then has nothing to test).
  bool solved = false;
  double extreme = 0.0;  // max u (Upper) or min u (Lower)
  std::size_t node = 0;
  int iterations = 0;
};

/// Solves M+(D^2 u) + mu u = g, u = 0 on the boundary, and checks the sign
/// of u: g >= 0 must give u <= 0 (mu < mu^+_1), g <= 0 must give u >= 0
/// (mu < mu^-_1). Tolerance 1e-10 ||g||. Throws Violation with the node.
inline TrialVerdict max_principle_trial(double mu, std::span<const double> g,
                                        const GridProblem& grid) {
  detail::check_size(g, grid);
  const bool nonneg = std::all_of(g.begin(), g.end() - 1, [](double x) { return x >= 0.0; });
  const bool nonpos = std::all_of(g.begin(), g.end() - 1, [](double x) { return x <= 0.0; });
  if (!nonneg && !nonpos) {
    throw Error(ErrorKind::InvalidArgument, "g must be one-signed");
  }
  TrialVerdict v;
  v.side = nonneg ? TrialSide::Upper : TrialSide::Lower;
  GridFunction rhs(g.begin(), g.end());
  for (double& x : rhs) x = -x;
  PolicyResult sol;
  try {
    sol = policy_solve(grid, mu, rhs);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoConvergence) throw;
    return v;
  }
  v.solved = true;
  v.iterations = sol.iterations;
  const double tol = 1e-10 * detail::sup_norm(g);
  const auto n = static_cast<std::size_t>(grid.n);
  if (v.side == TrialSide::Upper) {
    const auto it = std::max_element(sol.u.begin(), sol.u.begin() + static_cast<long>(n));
    v.extreme = *it;
    v.node = static_cast<std::size_t>(it - sol.u.begin());
    if (v.extreme > tol) {
      throw Error(ErrorKind::Violation, "u > 0 at node " + std::to_string(v.node), v.node);
    }
  } else {
    const auto it = std::min_element(sol.u.begin(), sol.u.begin() + static_cast<long>(n));
    v.extreme = *it;
    v.node = static_cast<std::size_t>(it - sol.u.begin());
    if (v.extreme < -tol) {
      throw Error(ErrorKind::Violation, "u < 0 at node " + std::to_string(v.node), v.node);
    }
  }
  return v;
}

}  // namespace pucci
