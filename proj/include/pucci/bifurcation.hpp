#pragma once

// Radial branches of -M+(D^2 u) = mu u + f(u, mu) emanating from (mu^sign_k, 0),
// traced by natural-parameter continuation in the origin amplitude
// alpha = u(0): for each alpha, mu is the root of u(1; alpha, mu) whose
// profile has k-1 interior zeros.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pucci/core.hpp"
#include "pucci/error.hpp"
#include "pucci/integrate.hpp"
#include "pucci/roots.hpp"
#include "pucci/spectrum.hpp"

namespace pucci {

struct BranchPoint {
  double alpha = 0.0;
  double mu = 0.0;
  double sup_norm = 0.0;
  int nodal_count = 0;
  double boundary_derivative = 0.0;
};

enum class Termination { AmplitudeLimit, FoldDetected, RootLost };

[[nodiscard]] constexpr std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::AmplitudeLimit: return "AmplitudeLimit";
    case Termination::FoldDetected: return "FoldDetected";
    case Termination::RootLost: return "RootLost";
  }
  return "Unknown";
}

struct Branch {
  Sign sign = Sign::Plus;
  int k = 1;
  Nonlinearity nonlinearity;
  std::vector<BranchPoint> points;
  Termination termination_reason = Termination::AmplitudeLimit;
};

/// Interior sign changes of u on (0, r_hi). A zero within a relative 1e-7
/// of r_hi is taken to be the boundary zero and not counted.
inline int nodal_count(const Trajectory& traj, double r_hi) {
  const double scale = detail::max_abs_on(traj, r_hi);
  if (!(scale > 0.0)) {
    throw Error(ErrorKind::DegenerateZero, "trajectory vanishes identically");
  }
  const auto zeros = detail::zeros_of(traj, r_hi, traj.size());
  int count = 0;
  for (std::size_t j = 0; j < zeros.size(); ++j) {
    if (zeros[j].r >= r_hi * (1.0 - 1e-7)) continue;
    if (!(std::abs(zeros[j].du) >= 1e-6 * scale)) {
      throw Error(ErrorKind::DegenerateZero,
                  "zero with vanishing derivative at r = " + std::to_string(zeros[j].r), j);
    }
    ++count;
  }
  return count;
}

struct ShotResult {
  double terminal_value = 0.0;
  Trajectory trajectory;
  int nodal_count = 0;
};

namespace detail {

inline double sup_norm_on(const Trajectory& traj, double r_hi) {
  double m = 0.0;
  for (std::size_t i = 0; i < traj.steps(); ++i) {
    const double a = traj.node(i).r;
    if (a > r_hi) break;
    const double b = std::min(traj.node(i + 1).r, r_hi);
    for (int j = 0; j <= 8; ++j) {
      m = std::max(m, std::abs(traj.evaluate_in_step(i, a + (b - a) * j / 8.0).u));
    }
  }
  return std::max(m, std::abs(traj.node(0).u));
}

}  // namespace detail

/// Integrates u(0) = alpha, u'(0) = 0 over [0, 1].
inline ShotResult shoot_evb(double alpha, double mu, const Nonlinearity& nl,
                            const PucciParams& params, IntegratorConfig cfg) {
  cfg.max_r = 1.0;
  // Error control proportional to the amplitude, so that for f = 0 the
  // shot at t*alpha takes the same steps as the one at alpha.
  if (alpha != 0.0) cfg.abs_tol = std::min(0.5, cfg.abs_tol * std::abs(alpha));
  ShotResult out;
  out.trajectory = integrate(RadialState{0.0, alpha, 0.0}, mu, nl, params, cfg);
  out.terminal_value = out.trajectory.node(out.trajectory.size() - 1).u;
  out.nodal_count = alpha == 0.0 ? 0 : nodal_count(out.trajectory, 1.0);
  return out;
}

struct BracketHint {
  double center = 0.0;
  double half_width = 0.0;
};

inline constexpr int kMaxBracketExpansions = 8;

struct MuSolution {
  double mu = 0.0;
  ShotResult shot;
};

namespace detail {

struct MuSearch {
  std::optional<MuSolution> solution;
  bool fold_suspected = false;
};

// Integration tolerances for root solves on u(1): the terminal value must
// drop below 1e-10 (1 + sup|u|), well under the default integration noise.
inline IntegratorConfig root_solve_config(IntegratorConfig cfg) {
  cfg.rel_tol = std::max(1e-13, 1e-2 * cfg.rel_tol);
  cfg.abs_tol = std::max(1e-15, 1e-2 * cfg.abs_tol);
  return cfg;
}

inline MuSearch search_mu(double alpha, int k, const Nonlinearity& nl, const PucciParams& params,
                          const IntegratorConfig& base_cfg, const BracketHint& hint) {
  const IntegratorConfig cfg = root_solve_config(base_cfg);
  struct Sample {
    double mu;
    double value;  // NaN when the shot blew up
  };
  auto sample = [&](double mu) -> Sample {
    try {
      return {mu, shoot_evb(alpha, mu, nl, params, cfg).terminal_value};
    } catch (const Error&) {
      return {mu, std::nan("")};
    }
  };
  auto try_interval = [&](const Sample& a, const Sample& b) -> std::optional<MuSolution> {
    if (!std::isfinite(a.value) || !std::isfinite(b.value)) return std::nullopt;
    if (a.value != 0.0 && b.value != 0.0 && (a.value > 0.0) == (b.value > 0.0)) {
      return std::nullopt;
    }
    std::optional<MuSolution> maybe;
    try {
      const RootResult root = brent_root(
          [&](double mu) { return shoot_evb(alpha, mu, nl, params, cfg).terminal_value; },
          a.mu, b.mu, a.value, b.value, [](double x) { return 1e-14 * (1.0 + std::abs(x)); },
          1e-12 * std::abs(alpha));
      maybe = MuSolution{root.x, shoot_evb(alpha, root.x, nl, params, cfg)};
    } catch (const Error&) {
      return std::nullopt;
    }
    MuSolution& sol = *maybe;
    const double sup = detail::sup_norm_on(sol.shot.trajectory, 1.0);
    if (sol.shot.nodal_count != k - 1) return std::nullopt;
    if (!(std::abs(sol.shot.terminal_value) <= 1e-10 * (1.0 + sup))) return std::nullopt;
    return maybe;
  };

  const double w = hint.half_width;
  const int reach = 1 << kMaxBracketExpansions;
  MuSearch result;
  Sample center = sample(hint.center);
  Sample left = center;
  Sample right = center;
  std::vector<double> near;  // |B| on the innermost samples, for fold detection
  near.push_back(std::abs(center.value));
  for (int j = 1; j <= reach; ++j) {
    // Nearest-first: the two subintervals at distance j*w from the center.
    if (left.mu - w > 0.0) {
      const Sample s = sample(hint.center - j * w);
      if (j <= 2) near.insert(near.begin(), std::abs(s.value));
      if (auto sol = try_interval(s, left)) {
        result.solution = std::move(sol);
        return result;
      }
      left = s;
    }
    const Sample s = sample(hint.center + j * w);
    if (j <= 2) near.push_back(std::abs(s.value));
    if (auto sol = try_interval(right, s)) {
      result.solution = std::move(sol);
      return result;
    }
    right = s;
  }
  // Two roots that merged: |B| dips near the prediction without crossing.
  if (near.size() >= 3) {
    const auto it = std::min_element(near.begin(), near.end());
    result.fold_suspected = it != near.begin() && it != near.end() - 1 && std::isfinite(*it);
  }
  return result;
}

inline BracketHint spectral_hint(Sign sign, int k, const PucciParams& params,
                                 const IntegratorConfig& cfg) {
  const auto vals = half_eigenvalues(sign, k + 1, params, cfg);
  const double mu_k = vals[static_cast<std::size_t>(k - 1)].mu;
  const double below = k >= 2 ? mu_k - vals[static_cast<std::size_t>(k - 2)].mu : mu_k;
  const double above = vals[static_cast<std::size_t>(k)].mu - mu_k;
  return {mu_k, 0.25 * std::min(below, above)};
}

}  // namespace detail

/// Root mu of u(1; alpha, mu) = 0 whose profile has exactly k-1 interior
/// zeros. The search marches outward from the hint center in half-width
/// steps up to 2^8 half-widths on each side. Throws RootLost.
inline MuSolution solve_branch_point(double alpha, int k, Sign sign, const Nonlinearity& nl,
                                     const PucciParams& params, const IntegratorConfig& cfg,
                                     std::optional<BracketHint> hint = std::nullopt) {
  if (alpha == 0.0 || (alpha > 0.0) != (sign == Sign::Plus)) {
    throw Error(ErrorKind::InvalidArgument, "alpha must be nonzero with the branch sign");
  }
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  const BracketHint h = hint ? *hint : detail::spectral_hint(sign, k, params, cfg);
  auto found = detail::search_mu(alpha, k, nl, params, cfg, h);
  if (!found.solution) {
    throw Error(ErrorKind::RootLost, found.fold_suspected
                                         ? "no root with the required nodal count (fold)"
                                         : "no root with the required nodal count",
                static_cast<std::size_t>(k));
  }
  return std::move(*found.solution);
}

inline double mu_for_alpha(double alpha, int k, Sign sign, const Nonlinearity& nl,
                           const PucciParams& params, const IntegratorConfig& cfg,
                           std::optional<BracketHint> hint = std::nullopt) {
  return solve_branch_point(alpha, k, sign, nl, params, cfg, hint).mu;
}

/// Branch S^sign_k over the geometric amplitude schedule
/// alpha_min * q^j, q = (alpha_max / alpha_min)^(1 / (steps - 1)).
inline Branch trace_branch(int k, Sign sign, const Nonlinearity& nl, double alpha_min,
                           double alpha_max, int steps, const PucciParams& params,
                           const IntegratorConfig& cfg) {
  if (!(alpha_min > 0.0 && alpha_max > alpha_min) || steps < 2 || k < 1) {
    throw Error(ErrorKind::InvalidArgument,
                "trace_branch needs 0 < alpha_min < alpha_max, steps >= 2, k >= 1");
  }
  nl.validate();
  Branch br{sign, k, nl, {}, Termination::AmplitudeLimit};
  BracketHint hint = detail::spectral_hint(sign, k, params, cfg);
  const double ratio = std::pow(alpha_max / alpha_min, 1.0 / (steps - 1));

  for (int j = 0; j < steps; ++j) {
    const double amplitude = (j == steps - 1) ? alpha_max : alpha_min * std::pow(ratio, j);
    const double alpha = sign_value(sign) * amplitude;
    auto found = detail::search_mu(alpha, k, nl, params, cfg, hint);
    if (!found.solution) {
      br.termination_reason =
          found.fold_suspected ? Termination::FoldDetected : Termination::RootLost;
      break;
    }
    const MuSolution& sol = *found.solution;
    const Trajectory& t = sol.shot.trajectory;
    br.points.push_back(BranchPoint{alpha, sol.mu, detail::sup_norm_on(t, 1.0),
                                    sol.shot.nodal_count, t.node(t.size() - 1).du});
    hint.center = sol.mu;
  }
  return br;
}

}  // namespace pucci
