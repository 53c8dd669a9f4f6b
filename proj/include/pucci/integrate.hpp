#pragma once

// Dormand-Prince 5(4) integration of the radial equation with PI step
// control and the standard fourth-order continuous extension.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "pucci/core.hpp"
#include "pucci/error.hpp"
#include "pucci/roots.hpp"

namespace pucci {

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 1.0;
  double max_r = 1.0;

  void validate() const {
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "rel_tol must lie in (0, 1)");
    }
    if (!(abs_tol > 0.0 && abs_tol < 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "abs_tol must lie in (0, 1)");
    }
    if (!(max_step > 0.0) || !std::isfinite(max_step)) {
      throw Error(ErrorKind::InvalidArgument, "max_step must be positive");
    }
    if (!(max_r > 0.0) || !std::isfinite(max_r)) {
      throw Error(ErrorKind::InvalidArgument, "max_r must be positive");
    }
  }
};

/// Accepted nodes plus the continuous-extension coefficients of each step.
class Trajectory {
 public:
  using Coefficients = std::array<std::array<double, 2>, 5>;

  Trajectory() = default;

  [[nodiscard]] std::span<const RadialState> nodes() const noexcept { return nodes_; }
  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
  [[nodiscard]] std::size_t steps() const noexcept { return dense_.size(); }
  [[nodiscard]] double r_begin() const noexcept { return nodes_.front().r; }
  [[nodiscard]] double r_end() const noexcept { return nodes_.back().r; }
  [[nodiscard]] const RadialState& node(std::size_t i) const { return nodes_.at(i); }

  /// Index of the step containing r (the last step owns r_end).
  [[nodiscard]] std::size_t step_index(double r) const {
    if (nodes_.size() < 2 || r < r_begin() || r > r_end()) {
      throw Error(ErrorKind::InvalidArgument, "radius outside trajectory range");
    }
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r,
                               [](double x, const RadialState& s) { return x < s.r; });
    auto idx = static_cast<std::size_t>(std::distance(nodes_.begin(), it));
    return std::min(idx == 0 ? 0 : idx - 1, dense_.size() - 1);
  }

  [[nodiscard]] RadialState evaluate_in_step(std::size_t step, double r) const {
    const RadialState& a = nodes_[step];
    const double h = nodes_[step + 1].r - a.r;
    const double theta = (r - a.r) / h;
    const double theta1 = 1.0 - theta;
    const Coefficients& c = dense_[step];
    std::array<double, 2> y{};
    for (std::size_t i = 0; i < 2; ++i) {
      y[i] = c[0][i] +
             theta * (c[1][i] + theta1 * (c[2][i] + theta * (c[3][i] + theta1 * c[4][i])));
    }
    return {r, y[0], y[1]};
  }

  [[nodiscard]] RadialState evaluate(double r) const {
    if (nodes_.size() == 1 && r == r_begin()) return nodes_.front();
    return evaluate_in_step(step_index(r), r);
  }

  [[nodiscard]] double max_abs_u() const noexcept {
    double m = 0.0;
    for (const auto& s : nodes_) m = std::max(m, std::abs(s.u));
    return m;
  }

  void push_initial(const RadialState& s) { nodes_.push_back(s); }
  void push_step(const RadialState& s, const Coefficients& c) {
    nodes_.push_back(s);
    dense_.push_back(c);
  }

 private:
  std::vector<RadialState> nodes_;
  std::vector<Coefficients> dense_;
};

/// Largest step allowed for the radial equation: at most one zero of u per
/// step, since the local oscillation wavelength is at least 2*pi/sqrt(mu/lambda).
[[nodiscard]] inline double default_max_step(double mu, const PucciParams& params,
                                             const IntegratorConfig& cfg) noexcept {
  const double ratio = std::max(0.0, mu) / params.lambda_lo;
  return std::min(cfg.max_step, std::numbers::pi / (10.0 * std::sqrt(1.0 + ratio)));
}

namespace detail {

struct DormandPrince {
  static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                          a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                          a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  static constexpr double d1 = -12715105075.0 / 11282082432.0,
                          d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

using Vec2 = std::array<double, 2>;

inline Vec2 axpy(const Vec2& y, double h, std::initializer_list<std::pair<double, const Vec2*>> terms) {
  Vec2 out = y;
  for (const auto& [a, k] : terms) {
    out[0] += h * a * (*k)[0];
    out[1] += h * a * (*k)[1];
  }
  return out;
}

}  // namespace detail

/// Integrates a two-component system y' = f(r, y) from `initial` to `r_end`.
/// Generic over the right-hand side so the same stepper serves every caller.
template <typename Rhs>
Trajectory integrate_system(Rhs&& f, const RadialState& initial, double r_end, double h_max,
                            const IntegratorConfig& cfg) {
  using detail::DormandPrince;
  using detail::Vec2;
  using DP = DormandPrince;

  Trajectory traj;
  traj.push_initial(initial);
  if (!(r_end > initial.r)) return traj;

  constexpr double kSafe = 0.9;
  constexpr double kBeta = 0.04;
  constexpr double kExpo = 0.2 - kBeta * 0.75;
  constexpr double kFacMin = 0.2;  // h_new / h stays within [kFacMin, kFacMax]
  constexpr double kFacMax = 10.0;
  constexpr std::size_t kMaxSteps = 50'000'000;

  auto eval = [&](double r, const Vec2& y) {
    RadialDerivative d = f(RadialState{r, y[0], y[1]});
    return Vec2{d.du, d.d2u};
  };

  double r = initial.r;
  Vec2 y{initial.u, initial.du};
  Vec2 k1 = eval(r, y);
  double h = std::min({h_max, 1e-3, r_end - r});
  double err_old = 1e-4;
  bool last_rejected = false;

  for (std::size_t n = 0; n < kMaxSteps; ++n) {
    if (r_end - r <= 1e-15 * std::max(1.0, std::abs(r_end))) break;
    if (r + 1.01 * h >= r_end) h = r_end - r;

    const Vec2 k2 = eval(r + DP::c2 * h, detail::axpy(y, h, {{DP::a21, &k1}}));
    const Vec2 k3 = eval(r + DP::c3 * h, detail::axpy(y, h, {{DP::a31, &k1}, {DP::a32, &k2}}));
    const Vec2 k4 = eval(r + DP::c4 * h,
                         detail::axpy(y, h, {{DP::a41, &k1}, {DP::a42, &k2}, {DP::a43, &k3}}));
    const Vec2 k5 = eval(r + DP::c5 * h, detail::axpy(y, h,
                                                      {{DP::a51, &k1},
                                                       {DP::a52, &k2},
                                                       {DP::a53, &k3},
                                                       {DP::a54, &k4}}));
    const Vec2 k6 = eval(r + h, detail::axpy(y, h,
                                             {{DP::a61, &k1},
                                              {DP::a62, &k2},
                                              {DP::a63, &k3},
                                              {DP::a64, &k4},
                                              {DP::a65, &k5}}));
    const Vec2 y_new = detail::axpy(y, h,
                                    {{DP::a71, &k1},
                                     {DP::a73, &k3},
                                     {DP::a74, &k4},
                                     {DP::a75, &k5},
                                     {DP::a76, &k6}});
    const Vec2 k7 = eval(r + h, y_new);

    double err = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      const double e = h * (DP::e1 * k1[i] + DP::e3 * k3[i] + DP::e4 * k4[i] +
                            DP::e5 * k5[i] + DP::e6 * k6[i] + DP::e7 * k7[i]);
      const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / 2.0);

    if (!std::isfinite(y_new[0]) || !std::isfinite(y_new[1]) || std::abs(y_new[0]) > 1e150 ||
        std::abs(y_new[1]) > 1e150) {
      throw Error(ErrorKind::NonFinite,
                  "state left the finite range near r = " + std::to_string(r));
    }

    const double fac11 = std::pow(err, kExpo);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(err_old, kBeta);
      fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
      double h_new = h / fac;
      err_old = std::max(err, 1e-4);

      Trajectory::Coefficients coef{};
      for (std::size_t i = 0; i < 2; ++i) {
        const double ydiff = y_new[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        coef[0][i] = y[i];
        coef[1][i] = ydiff;
        coef[2][i] = bspl;
        coef[3][i] = ydiff - h * k7[i] - bspl;
        coef[4][i] = h * (DP::d1 * k1[i] + DP::d3 * k3[i] + DP::d4 * k4[i] + DP::d5 * k5[i] +
                          DP::d6 * k6[i] + DP::d7 * k7[i]);
      }
      r = (r + h >= r_end - 1e-15 * std::max(1.0, std::abs(r_end))) ? r_end : r + h;
      y = y_new;
      k1 = k7;
      traj.push_step(RadialState{r, y[0], y[1]}, coef);

      if (last_rejected) h_new = std::min(h_new, h);
      last_rejected = false;
      h = std::min(h_new, h_max);
    } else {
      h = h / std::min(1.0 / kFacMin, fac11 / kSafe);
      last_rejected = true;
      if (h < 1e-14 * std::max(1.0, std::abs(r))) {
        throw Error(ErrorKind::NonFinite, "step size underflow near r = " + std::to_string(r));
      }
    }
  }
  return traj;
}

/// Integrates the radial equation on [initial.r, cfg.max_r].
inline Trajectory integrate(const RadialState& initial, double mu, const Nonlinearity& nl,
                            const PucciParams& params, const IntegratorConfig& cfg) {
  params.validate();
  cfg.validate();
  if (!(initial.r >= 0.0) || !std::isfinite(initial.u) || !std::isfinite(initial.du)) {
    throw Error(ErrorKind::InvalidArgument, "initial state must be finite with r >= 0");
  }
  const double h_max = default_max_step(mu, params, cfg);
  return integrate_system(
      [&](const RadialState& s) { return rhs(s, mu, nl, params); }, initial, cfg.max_r, h_max,
      cfg);
}

/// Root of the dense output of u inside `bracket` (endpoint signs must differ).
inline double locate_sign_change(const Trajectory& traj, std::pair<double, double> bracket) {
  auto [a, b] = bracket;
  if (a > b) std::swap(a, b);
  const double fa = traj.evaluate(a).u;
  const double fb = traj.evaluate(b).u;
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    throw Error(ErrorKind::NoBracket, "u has the same sign at both bracket endpoints");
  }
  const RootResult res = brent_root(
      [&](double r) { return traj.evaluate(r).u; }, a, b, fa, fb,
      [](double x) { return 1e-13 * (1.0 + std::abs(x)); }, 0.0);
  return res.x;
}

}  // namespace pucci
