#pragma once

// Radial half-spectrum of -M+ on the unit ball by shooting.
//
// w^nu solves the radial equation with mu = 1, w(0) = nu = +-1, w'(0) = 0.
// Its zeros beta_1 < beta_2 < ... give the half-eigenvalues mu_k = beta_k^2,
// with eigenfunctions phi(r) = w(beta_k r) on [0, 1].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pucci/core.hpp"
#include "pucci/error.hpp"
#include "pucci/integrate.hpp"
#include "pucci/roots.hpp"

namespace pucci {

enum class Sign { Plus, Minus };

[[nodiscard]] constexpr double sign_value(Sign s) noexcept { return s == Sign::Plus ? 1.0 : -1.0; }
[[nodiscard]] constexpr const char* to_string(Sign s) noexcept {
  return s == Sign::Plus ? "plus" : "minus";
}

struct HalfEigenvalue {
  Sign sign = Sign::Plus;
  int k = 1;
  double beta = 0.0;
  double mu = 0.0;          // beta * beta
  double dw_at_beta = 0.0;  // w'(beta); nonzero for a simple zero
  // Normalized solution the record was computed from, covering [0, >= beta].
  std::shared_ptr<const Trajectory> trajectory;
};

struct EigenSample {
  double r = 0.0;
  double value = 0.0;
};

struct Eigenfunction {
  HalfEigenvalue parent;
  std::vector<EigenSample> samples;
  double boundary_derivative = 0.0;
};

/// Simple zero of the dense output of u.
struct TrajectoryZero {
  double r = 0.0;
  double du = 0.0;
};

namespace detail {

// Zeros of u on (r_begin, r_hi], in increasing order, stopping after
// `max_count`. Relies on the step-size cap: at most one zero per step.
inline std::vector<TrajectoryZero> zeros_of(const Trajectory& traj, double r_hi,
                                            std::size_t max_count) {
  std::vector<TrajectoryZero> out;
  const auto nodes = traj.nodes();
  for (std::size_t i = 0; i + 1 < nodes.size() && out.size() < max_count; ++i) {
    const RadialState& a = nodes[i];
    if (a.r >= r_hi) break;
    const bool clipped = nodes[i + 1].r > r_hi;
    const RadialState b = clipped ? traj.evaluate_in_step(i, r_hi) : nodes[i + 1];
    if (a.u == 0.0 && i > 0) continue;  // recorded as the previous step's endpoint
    if (b.u == 0.0 && a.u != 0.0) {
      out.push_back({b.r, b.du});
      continue;
    }
    if ((a.u > 0.0) != (b.u > 0.0) && a.u != 0.0) {
      const double root = locate_sign_change(traj, {a.r, b.r});
      out.push_back({root, traj.evaluate(root).du});
    }
  }
  return out;
}

inline double max_abs_on(const Trajectory& traj, double r_hi) {
  double m = 0.0;
  for (const auto& s : traj.nodes()) {
    if (s.r > r_hi) break;
    m = std::max(m, std::abs(s.u));
  }
  return m;
}

}  // namespace detail

/// Trajectory of w^sign on [0, cfg.max_r].
inline Trajectory normalized_solution(Sign sign, const PucciParams& params,
                                      const IntegratorConfig& cfg) {
  return integrate(RadialState{0.0, sign_value(sign), 0.0}, 1.0, Nonlinearity::zero(), params,
                   cfg);
}

inline constexpr int kMaxHorizonDoublings = 10;

/// First `count` half-eigenvalues of the given sign.
inline std::vector<HalfEigenvalue> half_eigenvalues(Sign sign, int count,
                                                    const PucciParams& params,
                                                    IntegratorConfig cfg) {
  params.validate();
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "count must be >= 1");
  const auto k_count = static_cast<std::size_t>(count);
  cfg.max_r = (count + 1) * std::numbers::pi / std::sqrt(std::min(1.0, params.lambda_lo));

  for (int doubling = 0; doubling <= kMaxHorizonDoublings; ++doubling, cfg.max_r *= 2.0) {
    auto traj = std::make_shared<const Trajectory>(normalized_solution(sign, params, cfg));
    const auto zeros = detail::zeros_of(*traj, traj->r_end(), k_count);
    if (zeros.size() < k_count) continue;

    const double scale = detail::max_abs_on(*traj, zeros.back().r);
    std::vector<HalfEigenvalue> out;
    out.reserve(k_count);
    for (std::size_t j = 0; j < k_count; ++j) {
      const TrajectoryZero& z = zeros[j];
      if (!(std::abs(z.du) >= 1e-6 * scale)) {
        throw Error(ErrorKind::DegenerateZero,
                    "zero of w is not simple at r = " + std::to_string(z.r), j + 1);
      }
      out.push_back(HalfEigenvalue{sign, static_cast<int>(j + 1), z.r, z.r * z.r, z.du, traj});
    }
    return out;
  }
  throw Error(ErrorKind::HorizonExceeded,
              "fewer than " + std::to_string(count) + " zeros before the horizon cap");
}

/// Count of sign changes of the samples strictly inside (0, 1).
[[nodiscard]] inline int interior_sign_changes(std::span<const EigenSample> samples) {
  int changes = 0;
  for (std::size_t j = 0; j + 2 < samples.size(); ++j) {
    if ((samples[j].value > 0.0) != (samples[j + 1].value > 0.0)) ++changes;
  }
  return changes;
}

inline constexpr int kDefaultEigenSamples = 1000;

/// Samples phi(r) = w(beta r) at n_samples + 1 equispaced radii in [0, 1].
inline Eigenfunction eigenfunction(const HalfEigenvalue& record, int n_samples,
                                   const PucciParams& params, IntegratorConfig cfg) {
  if (n_samples < 1) throw Error(ErrorKind::InvalidArgument, "n_samples must be >= 1");
  std::shared_ptr<const Trajectory> traj = record.trajectory;
  if (!traj || traj->r_end() < record.beta) {
    cfg.max_r = record.beta * (1.0 + 1e-9);
    traj = std::make_shared<const Trajectory>(normalized_solution(record.sign, params, cfg));
  }

  Eigenfunction ef;
  ef.parent = record;
  ef.samples.reserve(static_cast<std::size_t>(n_samples) + 1);
  for (int j = 0; j <= n_samples; ++j) {
    const double r = (j == n_samples) ? 1.0 : static_cast<double>(j) / n_samples;
    const double value = (j == 0) ? traj->node(0).u : traj->evaluate(record.beta * r).u;
    ef.samples.push_back({r, value});
  }
  ef.boundary_derivative = record.beta * traj->evaluate(record.beta).du;

  const int changes = interior_sign_changes(ef.samples);
  if (changes != record.k - 1) {
    throw Error(ErrorKind::ViolationFound,
                "eigenfunction has " + std::to_string(changes) + " interior sign changes",
                static_cast<std::size_t>(record.k));
  }
  // Near r = 1 the profile has sign nu * (-1)^(k-1) and leaves through zero.
  const double outer_sign = sign_value(record.sign) * ((record.k % 2 == 1) ? 1.0 : -1.0);
  if (!(outer_sign * ef.boundary_derivative < 0.0)) {
    throw Error(ErrorKind::ViolationFound, "boundary derivative has the wrong sign",
                static_cast<std::size_t>(record.k));
  }
  return ef;
}

struct InterlacingEntry {
  int k = 0;
  double minus_k = 0.0;       // mu^-_k
  double plus_k = 0.0;        // mu^+_k
  double plus_next = 0.0;     // mu^+_{k+1}
  double minus_next = 0.0;    // mu^-_{k+1}
  // mu^+_{k+1} - mu^-_k and mu^-_{k+1} - mu^+_k; both must be > 0.
  double margin_minus_plus = 0.0;
  double margin_plus_minus = 0.0;
};

struct InterlacingReport {
  std::vector<InterlacingEntry> entries;
  double first_pair_margin = 0.0;  // mu^-_1 - mu^+_1
  bool first_pair_strict_required = false;
  // sign of mu^+_k - mu^-_k for k >= 2; measured, never asserted.
  std::vector<int> higher_ordering;
  bool holds = true;
  std::optional<int> offending_k;

  [[nodiscard]] double min_margin() const noexcept {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& e : entries) m = std::min({m, e.margin_minus_plus, e.margin_plus_minus});
    return m;
  }
};

inline InterlacingReport interlacing_report(std::span<const HalfEigenvalue> plus,
                                            std::span<const HalfEigenvalue> minus,
                                            const PucciParams& params) {
  if (plus.size() < 2 || minus.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "interlacing needs at least two values per sign");
  }
  InterlacingReport rep;
  const std::size_t n = std::min(plus.size(), minus.size());
  for (std::size_t j = 0; j + 1 < n; ++j) {
    InterlacingEntry e;
    e.k = static_cast<int>(j + 1);
    e.minus_k = minus[j].mu;
    e.plus_k = plus[j].mu;
    e.plus_next = plus[j + 1].mu;
    e.minus_next = minus[j + 1].mu;
    e.margin_minus_plus = e.plus_next - e.minus_k;
    e.margin_plus_minus = e.minus_next - e.plus_k;
    if (!(e.margin_minus_plus > 0.0 && e.margin_plus_minus > 0.0) && rep.holds) {
      rep.holds = false;
      rep.offending_k = e.k;
    }
    rep.entries.push_back(e);
  }
  for (std::size_t j = 1; j < n; ++j) {
    const double d = plus[j].mu - minus[j].mu;
    rep.higher_ordering.push_back(d > 0.0 ? 1 : (d < 0.0 ? -1 : 0));
  }
  rep.first_pair_margin = minus[0].mu - plus[0].mu;
  rep.first_pair_strict_required = params.lambda_lo < params.lambda_hi;
  const bool first_ok = rep.first_pair_strict_required ? rep.first_pair_margin > 0.0
                                                       : rep.first_pair_margin >= -1e-10 * plus[0].mu;
  if (!first_ok && rep.holds) {
    rep.holds = false;
    rep.offending_k = 1;
  }
  return rep;
}

/// Interlacing mu^-_k < mu^+_{k+1}, mu^+_k < mu^-_{k+1}, and mu^+_1 <= mu^-_1
/// (strict when lambda < Lambda). Throws ViolationFound on failure.
inline InterlacingReport check_interlacing(std::span<const HalfEigenvalue> plus,
                                           std::span<const HalfEigenvalue> minus,
                                           const PucciParams& params) {
  InterlacingReport rep = interlacing_report(plus, minus, params);
  if (!rep.holds) {
    throw Error(ErrorKind::ViolationFound,
                "interlacing fails at k = " + std::to_string(*rep.offending_k),
                static_cast<std::size_t>(*rep.offending_k));
  }
  return rep;
}

/// (mu^-_1 / mu^+_1, mu^-_2 / mu^+_2).
inline std::pair<double, double> gap_ratio(const PucciParams& params,
                                           const IntegratorConfig& cfg) {
  const auto plus = half_eigenvalues(Sign::Plus, 2, params, cfg);
  const auto minus = half_eigenvalues(Sign::Minus, 2, params, cfg);
  return {minus[0].mu / plus[0].mu, minus[1].mu / plus[1].mu};
}

struct SweepPoint {
  double lambda_lo = 0.0;
  double mu = 0.0;
};

/// mu^sign_k as a function of the lower ellipticity constant.
inline std::vector<SweepPoint> lambda_sweep(Sign sign, int k, std::span<const double> lambda_grid,
                                            double lambda_hi, int dim,
                                            const IntegratorConfig& cfg) {
  for (std::size_t j = 0; j < lambda_grid.size(); ++j) {
    const double l = lambda_grid[j];
    if (!(l > 0.0 && l <= lambda_hi) || (j > 0 && !(l > lambda_grid[j - 1]))) {
      throw Error(ErrorKind::InvalidArgument,
                  "lambda grid must be strictly increasing inside (0, Lambda]", j);
    }
  }
  std::vector<SweepPoint> out;
  out.reserve(lambda_grid.size());
  for (double l : lambda_grid) {
    const auto vals = half_eigenvalues(sign, k, make_params(l, lambda_hi, dim), cfg);
    out.push_back({l, vals.back().mu});
  }
  return out;
}

/// k-th half-eigenvalue on the ball of radius `radius`, found by shooting in
/// mu directly (v(0) = +-1, v(radius) = 0 with k-1 interior zeros) rather
/// than by rescaling the zeros of w.
inline double ball_eigenvalue(Sign sign, int k, double radius, const PucciParams& params,
                              IntegratorConfig cfg) {
  params.validate();
  if (k < 1 || !(radius > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "ball_eigenvalue needs k >= 1 and radius > 0");
  }
  cfg.max_r = radius;
  const auto kk = static_cast<std::size_t>(k);
  struct Shot {
    std::size_t zeros;
    double terminal;
  };
  auto shoot = [&](double mu) {
    const Trajectory t =
        integrate(RadialState{0.0, sign_value(sign), 0.0}, mu, Nonlinearity::zero(), params, cfg);
    return Shot{detail::zeros_of(t, radius, kk + 1).size(), t.node(t.size() - 1).u};
  };

  double lo = 0.0;
  double hi = 1.0 / (radius * radius);
  Shot s_hi = shoot(hi);
  for (int i = 0; s_hi.zeros < kk; ++i) {
    if (i > 200) throw Error(ErrorKind::HorizonExceeded, "mu search did not reach k zeros");
    lo = hi;
    hi *= 2.0;
    s_hi = shoot(hi);
  }
  Shot s_lo = lo > 0.0 ? shoot(lo) : Shot{0, sign_value(sign)};
  // Bisect until the bracket separates exactly the k-th crossing.
  for (int i = 0; i < 200 && !(s_lo.zeros == kk - 1 && s_hi.zeros == kk); ++i) {
    const double mid = 0.5 * (lo + hi);
    const Shot s_mid = shoot(mid);
    if (s_mid.zeros >= kk) {
      hi = mid;
      s_hi = s_mid;
    } else {
      lo = mid;
      s_lo = s_mid;
    }
  }
  if (lo == 0.0) s_lo.terminal = sign_value(sign);
  const RootResult res = brent_root(
      [&](double mu) { return shoot(mu).terminal; }, lo, hi, s_lo.terminal, s_hi.terminal,
      [](double x) { return 4e-16 * std::abs(x); }, 0.0);
  return res.x;
}

}  // namespace pucci
