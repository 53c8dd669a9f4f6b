#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "oracles/bessel.hpp"
#include "pucci/spectrum.hpp"

using namespace pucci;
using std::numbers::pi;

namespace {

IntegratorConfig tight() {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-13;
  cfg.abs_tol = 1e-15;
  return cfg;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Spectrum, LaplacianThreeDimensions) {
  for (Sign s : {Sign::Plus, Sign::Minus}) {
    const auto v = half_eigenvalues(s, 5, make_params(1.0, 1.0, 3), {});
    ASSERT_EQ(v.size(), 5u);
    for (int k = 1; k <= 5; ++k) {
      const auto& h = v[static_cast<std::size_t>(k - 1)];
      EXPECT_EQ(h.k, k);
      EXPECT_EQ(h.sign, s);
      EXPECT_EQ(h.mu, h.beta * h.beta);
      EXPECT_LE(rel(h.mu, k * k * pi * pi), 1e-8);
    }
  }
}

TEST(Spectrum, LaplacianOneDimension) {
  const auto v = half_eigenvalues(Sign::Plus, 5, make_params(1.0, 1.0, 1), {});
  for (int k = 1; k <= 5; ++k) {
    const double b = (2 * k - 1) * pi / 2;
    EXPECT_LE(rel(v[static_cast<std::size_t>(k - 1)].mu, b * b), 1e-8);
  }
}

TEST(Spectrum, LaplacianTwoDimensionsAgainstBesselZeros) {
  const auto v = half_eigenvalues(Sign::Plus, 3, make_params(1.0, 1.0, 2), {});
  for (int k = 1; k <= 3; ++k) {
    const double j = oracle::bessel_zero(0.0, k);
    EXPECT_LE(rel(v[static_cast<std::size_t>(k - 1)].mu, j * j), 1e-8);
  }
}

TEST(Spectrum, ScaledLaplacianWhenLambdaEqualsLambda) {
  for (int dim : {2, 4, 5}) {
    const double lap = oracle::laplacian_mu1(dim);
    for (double c : {0.5, 3.0}) {
      EXPECT_LE(rel(half_eigenvalues(Sign::Minus, 1, make_params(c, c, dim), {})[0].mu, c * lap),
                1e-8);
    }
  }
}

TEST(Spectrum, NormalizedSolutionClosedForms) {
  IntegratorConfig cfg;
  cfg.max_r = 8.0;
  const Trajectory s3 = normalized_solution(Sign::Plus, make_params(1.0, 1.0, 3), cfg);
  const Trajectory s1 = normalized_solution(Sign::Plus, make_params(1.0, 1.0, 1), cfg);
  for (double r = 0.05; r <= 8.0; r += 0.05) {
    EXPECT_NEAR(s3.evaluate(r).u, std::sin(r) / r, 1e-9);
    EXPECT_NEAR(s1.evaluate(r).u, std::cos(r), 1e-9);
  }
}

TEST(Spectrum, MinusSolutionIsFlippedMinOpSolution) {
  IntegratorConfig cfg;
  cfg.max_r = 12.0;
  const auto pmax = make_params(1.0, 3.0, 3, Operator::MaxOp);
  const auto pmin = make_params(1.0, 3.0, 3, Operator::MinOp);
  const Trajectory a = normalized_solution(Sign::Minus, pmax, cfg);
  const Trajectory b = normalized_solution(Sign::Plus, pmin, cfg);
  for (double r = 0.0; r <= 12.0; r += 0.1) {
    EXPECT_NEAR(a.evaluate(r).u, -b.evaluate(r).u, 1e-9);
  }
  // So the half-spectra swap between the two operators.
  EXPECT_NEAR(half_eigenvalues(Sign::Minus, 1, pmax, {})[0].mu,
              half_eigenvalues(Sign::Plus, 1, pmin, {})[0].mu, 1e-9);
}

TEST(Spectrum, FirstValueBelowScaledBesselBound) {
  const double mu = half_eigenvalues(Sign::Plus, 1, make_params(1.0, 2.0, 2), {})[0].mu;
  const double j = oracle::bessel_zero(0.0, 1);
  EXPECT_GT(mu, 0.0);
  EXPECT_LE(mu, j * j);
  EXPECT_NEAR(j * j, 5.783185962947, 1e-11);
}

TEST(Spectrum, BoundsByTheLaplacian) {
  for (auto [l, L] : {std::pair{1.0, 2.0}, {1.0, 5.0}, {0.5, 1.0}}) {
    for (int dim : {2, 3, 5}) {
      const auto p = make_params(l, L, dim);
      const double lap = oracle::laplacian_mu1(dim);
      EXPECT_LE(half_eigenvalues(Sign::Plus, 1, p, {})[0].mu, l * lap * (1 + 1e-10));
      EXPECT_GE(half_eigenvalues(Sign::Minus, 1, p, {})[0].mu, L * lap * (1 - 1e-10));
    }
  }
}

TEST(Spectrum, IncreasingSimpleAndOscillatory) {
  for (auto [l, L] : {std::pair{1.0, 2.0}, {1.0, 5.0}, {0.5, 1.0}}) {
    for (int dim : {2, 3, 5}) {
      const auto p = make_params(l, L, dim);
      for (Sign s : {Sign::Plus, Sign::Minus}) {
        const auto v = half_eigenvalues(s, 20, p, {});
        ASSERT_EQ(v.size(), 20u);
        const double scale = v.back().trajectory->max_abs_u();
        for (std::size_t i = 0; i < v.size(); ++i) {
          EXPECT_GE(std::abs(v[i].dw_at_beta), 1e-6 * scale);
          if (i > 0) {
            EXPECT_GT(v[i].beta, v[i - 1].beta);
          }
        }
      }
    }
  }
}

TEST(Spectrum, ZerosAreRefinedTightly) {
  const auto v = half_eigenvalues(Sign::Minus, 6, make_params(1.0, 5.0, 3), {});
  for (const auto& h : v) {
    EXPECT_LE(std::abs(h.trajectory->evaluate(h.beta).u), 1e-12 * h.trajectory->max_abs_u());
  }
}

TEST(Spectrum, CountMustBePositive) {
  EXPECT_THROW((void)half_eigenvalues(Sign::Plus, 0, make_params(1.0, 2.0, 3), {}), Error);
}

TEST(Spectrum, ScalingLawOnSmallerAndLargerBalls) {
  const IntegratorConfig cfg = tight();
  const auto p = make_params(1.0, 2.0, 3);
  for (Sign s : {Sign::Plus, Sign::Minus}) {
    const auto unit = half_eigenvalues(s, 3, p, cfg);
    for (double radius : {0.5, 2.0}) {
      for (int k = 1; k <= 3; ++k) {
        const double direct = ball_eigenvalue(s, k, radius, p, cfg);
        EXPECT_LE(rel(direct, unit[static_cast<std::size_t>(k - 1)].mu / (radius * radius)), 1e-10)
            << "k=" << k << " R=" << radius;
      }
    }
  }
}

// On every stretch where (sign w'', sign w') is fixed the radial equation is
// linear: (w' r^(d-1))' = -r^(d-1) w / kappa with (d, kappa) by regime.
// Checked in integral form on the dense output; at the default tolerances
// the identity only holds to a few 1e-8, so the trajectory is tightened.
TEST(Spectrum, PiecewiseLinearRegimeResidual) {
  std::set<int> seen;
  for (auto [l, L, dim] : {std::tuple{1.0, 2.0, 3}, {0.5, 1.0, 2}, {1.0, 5.0, 5}}) {
    const auto p = make_params(l, L, dim);
    for (Sign s : {Sign::Plus, Sign::Minus}) {
      const auto v = half_eigenvalues(s, 3, p, tight());
      const Trajectory& t = *v.back().trajectory;
      const double r_hi = v.back().beta;
      auto pattern = [&](double r) {
        const RadialState st = t.evaluate(r);
        const double d2 = rhs(st, 1.0, Nonlinearity::zero(), p).d2u;
        return 2 * (d2 > 0.0) + (st.du > 0.0);
      };
      auto regime = [&](int pat) -> std::pair<double, double> {
        switch (pat) {
          case 0: return {p.dim, p.lambda_lo};            // w'' < 0, w' < 0
          case 3: return {p.dim, p.lambda_hi};            // w'' > 0, w' > 0
          case 1: return {p.tilde_n_minus(), p.lambda_lo};  // w'' < 0, w' > 0
          default: return {p.tilde_n_plus(), p.lambda_hi};  // w'' > 0, w' < 0
        }
      };
      constexpr std::array<double, 5> gx{-0.9061798459386640, -0.5384693101056831, 0.0,
                                         0.5384693101056831, 0.9061798459386640};
      constexpr std::array<double, 5> gw{0.2369268850561891, 0.4786286704993665,
                                         0.5688888888888889, 0.4786286704993665,
                                         0.2369268850561891};
      const int cells = 4000;
      const double h = r_hi / cells;
      int j = 1;  // skip the first cell: r = 0 is a degenerate endpoint
      while (j < cells) {
        const int pat = pattern((j + 0.5) * h);
        const double a = j * h;
        double integral = 0.0;
        const auto [d, kappa] = regime(pat);
        int m = j;
        for (; m < cells; ++m) {
          const double lo = m * h;
          const double hi = lo + h;
          if (pattern(lo) != pat || pattern(hi) != pat || pattern(lo + h / 2) != pat) break;
          for (std::size_t q = 0; q < gx.size(); ++q) {
            const double r = lo + h / 2 * (1 + gx[q]);
            integral += h / 2 * gw[q] * std::pow(r, d - 1) * t.evaluate(r).u;
          }
        }
        if (m > j) {
          seen.insert(pat);
          const double b = m * h;
          const double lhs = t.evaluate(b).du * std::pow(b, d - 1) -
                             t.evaluate(a).du * std::pow(a, d - 1);
          const double scale = std::max({1.0, std::abs(integral / kappa),
                                         std::abs(t.evaluate(b).du * std::pow(b, d - 1)),
                                         std::abs(t.evaluate(a).du * std::pow(a, d - 1))});
          EXPECT_LE(std::abs(lhs + integral / kappa), 1e-8 * scale)
              << "pattern " << pat << " on [" << a << ", " << b << "]";
        }
        j = std::max(m, j) + 1;  // drop the cell containing the switch
      }
    }
  }
  EXPECT_EQ(seen.size(), 4u);
}

TEST(Eigenfunction, FirstLaplacianMode) {
  const auto p = make_params(1.0, 1.0, 3);
  const auto v = half_eigenvalues(Sign::Plus, 1, p, {});
  const Eigenfunction ef = eigenfunction(v[0], 200, p, {});
  ASSERT_EQ(ef.samples.size(), 201u);
  EXPECT_EQ(ef.samples.front().r, 0.0);
  EXPECT_EQ(ef.samples.back().r, 1.0);
  for (const auto& e : ef.samples) {
    const double expect = e.r == 0.0 ? 1.0 : std::sin(pi * e.r) / (pi * e.r);
    EXPECT_NEAR(e.value, expect, 1e-8);
  }
  EXPECT_NEAR(ef.samples.back().value, 0.0, 1e-9);
  EXPECT_EQ(interior_sign_changes(ef.samples), 0);
  EXPECT_NEAR(ef.boundary_derivative, -1.0, 1e-8);
}

TEST(Eigenfunction, NodalCountAndHopfSign) {
  for (auto [l, L, dim] : {std::tuple{1.0, 2.0, 3}, {1.0, 5.0, 2}, {0.5, 1.0, 5}}) {
    const auto p = make_params(l, L, dim);
    for (Sign s : {Sign::Plus, Sign::Minus}) {
      const auto v = half_eigenvalues(s, 4, p, {});
      for (const auto& h : v) {
        const Eigenfunction ef = eigenfunction(h, kDefaultEigenSamples, p, {});
        EXPECT_EQ(ef.samples.front().value, sign_value(s));
        EXPECT_LE(std::abs(ef.samples.back().value), 1e-9);
        EXPECT_EQ(interior_sign_changes(ef.samples), h.k - 1);
        // Sign of phi just inside the boundary times phi'(1) is negative.
        const double outer = sign_value(s) * (h.k % 2 == 1 ? 1.0 : -1.0);
        EXPECT_LT(outer * ef.boundary_derivative, 0.0);
      }
    }
  }
}

TEST(Eigenfunction, FirstPositiveModeHasNegativeNormalDerivative) {
  const auto p = make_params(1.0, 2.0, 3);
  const auto v = half_eigenvalues(Sign::Plus, 1, p, {});
  EXPECT_LT(eigenfunction(v[0], 100, p, {}).boundary_derivative, 0.0);
}

TEST(Interlacing, EqualEllipticityGivesIdenticalSequences) {
  const auto p = make_params(2.0, 2.0, 3);
  const auto plus = half_eigenvalues(Sign::Plus, 5, p, {});
  const auto minus = half_eigenvalues(Sign::Minus, 5, p, {});
  for (std::size_t i = 0; i < plus.size(); ++i) EXPECT_LE(rel(plus[i].mu, minus[i].mu), 1e-12);
  const auto rep = check_interlacing(plus, minus, p);
  EXPECT_TRUE(rep.holds);
  EXPECT_GT(rep.min_margin(), 0.0);
}

TEST(Interlacing, HoldsStrictly) {
  for (auto [l, L, dim] : {std::tuple{1.0, 2.0, 3}, {1.0, 5.0, 2}, {1.0, 5.0, 5}, {0.5, 1.0, 2}}) {
    const auto p = make_params(l, L, dim);
    const auto plus = half_eigenvalues(Sign::Plus, 6, p, {});
    const auto minus = half_eigenvalues(Sign::Minus, 6, p, {});
    const auto rep = check_interlacing(plus, minus, p);
    EXPECT_TRUE(rep.holds);
    EXPECT_GT(rep.min_margin(), 0.0);
    EXPECT_GT(rep.first_pair_margin, 0.0);
    EXPECT_TRUE(rep.first_pair_strict_required);
    EXPECT_EQ(rep.entries.size(), 5u);
    EXPECT_EQ(rep.higher_ordering.size(), 5u);
  }
}

TEST(Interlacing, ReportsTheOffendingIndex) {
  const auto p = make_params(1.0, 2.0, 3);
  auto plus = half_eigenvalues(Sign::Plus, 4, p, {});
  const auto minus = half_eigenvalues(Sign::Minus, 4, p, {});
  plus[2].mu = minus[1].mu - 1.0;  // breaks mu^-_2 < mu^+_3
  const auto rep = interlacing_report(plus, minus, p);
  EXPECT_FALSE(rep.holds);
  ASSERT_TRUE(rep.offending_k.has_value());
  EXPECT_EQ(*rep.offending_k, 2);
  try {
    (void)check_interlacing(plus, minus, p);
    ADD_FAILURE() << "expected ViolationFound";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ViolationFound);
    EXPECT_EQ(e.index(), std::optional<std::size_t>(2));
  }
}

TEST(Interlacing, NeedsTwoValues) {
  const auto p = make_params(1.0, 2.0, 3);
  const auto one = half_eigenvalues(Sign::Plus, 1, p, {});
  EXPECT_THROW((void)interlacing_report(one, one, p), Error);
}

TEST(Gap, RatiosOrdered) {
  const auto [e1, e2] = gap_ratio(make_params(1.5, 1.5, 3), {});
  EXPECT_NEAR(e1, 1.0, 1e-12);
  EXPECT_NEAR(e2, 1.0, 1e-12);
  for (auto [l, L, dim] : {std::tuple{1.0, 2.0, 3}, {1.0, 10.0, 2}, {0.5, 1.0, 5}}) {
    const auto [r1, r2] = gap_ratio(make_params(l, L, dim), {});
    EXPECT_GE(r1, r2 - 1e-10);
    EXPECT_GT(r1, 1.0);
  }
}

TEST(Sweep, MonotoneInLambda) {
  const std::vector<double> grid{0.5, 1.0, 1.5, 2.0};
  const auto plus = lambda_sweep(Sign::Plus, 1, grid, 2.0, 3, {});
  const auto minus = lambda_sweep(Sign::Minus, 1, grid, 2.0, 3, {});
  ASSERT_EQ(plus.size(), grid.size());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    EXPECT_EQ(plus[i].lambda_lo, grid[i]);
    EXPECT_GE(plus[i].mu, plus[i - 1].mu);
    EXPECT_LE(minus[i].mu, minus[i - 1].mu);
  }
  const double lap = oracle::laplacian_mu1(3);
  EXPECT_LE(rel(plus.back().mu, 2.0 * lap), 1e-8);
  EXPECT_LE(rel(minus.back().mu, 2.0 * lap), 1e-8);
}

TEST(Sweep, RejectsBadGrids) {
  const std::vector<double> unsorted{1.0, 0.5};
  const std::vector<double> outside{0.5, 2.5};
  EXPECT_THROW((void)lambda_sweep(Sign::Plus, 1, unsorted, 2.0, 3, {}), Error);
  EXPECT_THROW((void)lambda_sweep(Sign::Plus, 1, outside, 2.0, 3, {}), Error);
}
