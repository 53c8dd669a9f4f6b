#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "pucci/bifurcation.hpp"

using namespace pucci;

namespace {

const PucciParams k123 = make_params(1.0, 2.0, 3);

IntegratorConfig tight() {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-13;
  cfg.abs_tol = 1e-15;
  return cfg;
}

double mu_k(Sign s, int k, const PucciParams& p = k123, const IntegratorConfig& cfg = {}) {
  return half_eigenvalues(s, k, p, cfg).back().mu;
}

const Nonlinearity cubic = Nonlinearity::odd_power(-1.0, 3.0);

}  // namespace

TEST(Shoot, HomogeneousProblemHitsTheEigenvalue) {
  const double mu = mu_k(Sign::Plus, 1);
  const ShotResult one = shoot_evb(1.0, mu, Nonlinearity::zero(), k123, {});
  EXPECT_LE(std::abs(one.terminal_value), 1e-9);
  EXPECT_EQ(one.nodal_count, 0);
  const ShotResult two = shoot_evb(2.0, mu, Nonlinearity::zero(), k123, {});
  for (double r = 0.0; r <= 1.0; r += 0.01) {
    EXPECT_NEAR(two.trajectory.evaluate(r).u, 2.0 * one.trajectory.evaluate(r).u, 1e-9);
  }
}

TEST(Shoot, CubicPerturbationIsThirdOrder) {
  const IntegratorConfig cfg = tight();
  const double mu = mu_k(Sign::Plus, 1, k123, cfg);
  std::vector<double> c;
  for (double a : {1e-2, 1e-3, 1e-4}) {
    c.push_back(shoot_evb(a, mu, cubic, k123, cfg).terminal_value / (a * a * a));
  }
  EXPECT_GT(std::abs(c[0]), 0.0);
  EXPECT_NEAR(c[1], c[0], 0.01 * std::abs(c[0]));
  EXPECT_NEAR(c[2], c[0], 0.01 * std::abs(c[0]));
}

TEST(NodalCount, CountsInteriorZerosOfTheNormalizedSolution) {
  const auto v = half_eigenvalues(Sign::Plus, 3, k123, {});
  const Trajectory& w = *v.back().trajectory;
  EXPECT_EQ(nodal_count(w, v[0].beta), 0);
  EXPECT_EQ(nodal_count(w, v[1].beta), 1);
  EXPECT_EQ(nodal_count(w, v[2].beta), 2);
  EXPECT_EQ(nodal_count(w, 0.5 * (v[1].beta + v[2].beta)), 2);
}

TEST(NodalCount, ZeroTrajectoryIsDegenerate) {
  IntegratorConfig cfg;
  cfg.max_r = 1.0;
  const Trajectory t = integrate({0.0, 0.0, 0.0}, 1.0, Nonlinearity::zero(), k123, cfg);
  try {
    (void)nodal_count(t, 1.0);
    ADD_FAILURE() << "expected DegenerateZero";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateZero);
  }
}

TEST(MuForAlpha, HomogeneousIsExactlyTheEigenvalue) {
  for (Sign s : {Sign::Plus, Sign::Minus}) {
    for (int k : {1, 2}) {
      const double target = mu_k(s, k);
      for (double a : {1e-3, 0.5, 7.0}) {
        const double mu = mu_for_alpha(sign_value(s) * a, k, s, Nonlinearity::zero(), k123, {});
        EXPECT_NEAR(mu, target, 1e-8 * target);
      }
    }
  }
}

TEST(MuForAlpha, SmallAmplitudeLimit) {
  const double target = mu_k(Sign::Plus, 1);
  double prev = 1e300;
  for (double a : {1e-2, 1e-3, 1e-4}) {
    const double gap = std::abs(mu_for_alpha(a, 1, Sign::Plus, cubic, k123, {}) - target);
    EXPECT_LT(gap, prev);
    prev = gap;
    if (a == 1e-3) {
      EXPECT_LE(gap, 1e-4);
    }
  }
}

TEST(MuForAlpha, EnforcesTheNodalCount) {
  const MuSolution sol = solve_branch_point(-1e-3, 2, Sign::Minus, cubic, k123, {});
  EXPECT_EQ(sol.shot.nodal_count, 1);
  EXPECT_NEAR(sol.mu, mu_k(Sign::Minus, 2), 1e-4);
}

TEST(MuForAlpha, RejectsBadArguments) {
  EXPECT_THROW((void)mu_for_alpha(-1e-3, 1, Sign::Plus, cubic, k123, {}), Error);
  EXPECT_THROW((void)mu_for_alpha(0.0, 1, Sign::Plus, cubic, k123, {}), Error);
  EXPECT_THROW((void)mu_for_alpha(1e-3, 0, Sign::Plus, cubic, k123, {}), Error);
}

TEST(MuForAlpha, NoRootInWindowIsRootLost) {
  // A narrow window far above the first branch holds no admissible root.
  try {
    (void)mu_for_alpha(1e-3, 1, Sign::Plus, cubic, k123, {}, BracketHint{40.0, 1e-3});
    ADD_FAILURE() << "expected RootLost";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RootLost);
  }
}

TEST(MuForAlpha, LimitIsTheBranchEigenvalue) {
  for (Sign s : {Sign::Plus, Sign::Minus}) {
    for (int k : {1, 2}) {
      const double target = mu_k(s, k);
      const double mu = mu_for_alpha(sign_value(s) * 1e-5, k, s, cubic, k123, {});
      EXPECT_NEAR(mu, target, 1e-3);
    }
  }
}

TEST(MuForAlpha, NormalizedProfileApproachesTheEigenfunction) {
  for (Sign s : {Sign::Plus, Sign::Minus}) {
    for (int k : {1, 2}) {
      const auto vals = half_eigenvalues(s, k, k123, {});
      const Eigenfunction phi = eigenfunction(vals.back(), 200, k123, {});
      const MuSolution sol = solve_branch_point(sign_value(s) * 1e-5, k, s, cubic, k123, {});
      const double sup = detail::sup_norm_on(sol.shot.trajectory, 1.0);
      // phi is normalized by phi(0) = +-1; rescale it to unit sup norm too.
      double phi_sup = 0.0;
      for (const auto& e : phi.samples) phi_sup = std::max(phi_sup, std::abs(e.value));
      double worst = 0.0;
      for (const auto& e : phi.samples) {
        const double u = sol.shot.trajectory.evaluate(e.r).u / sup;
        worst = std::max(worst, std::abs(u - e.value / phi_sup));
      }
      EXPECT_LE(worst, 1e-3) << to_string(s) << " k=" << k;
    }
  }
}

TEST(Branch, HomogeneousBranchIsVertical) {
  const Branch br = trace_branch(1, Sign::Minus, Nonlinearity::zero(), 1e-3, 10.0, 6, k123, {});
  EXPECT_EQ(br.termination_reason, Termination::AmplitudeLimit);
  ASSERT_EQ(br.points.size(), 6u);
  const double target = mu_k(Sign::Minus, 1);
  for (const auto& p : br.points) {
    EXPECT_NEAR(p.mu, target, 1e-8 * target);
    EXPECT_LT(p.alpha, 0.0);
  }
  EXPECT_DOUBLE_EQ(br.points.back().alpha, -10.0);
}

TEST(Branch, CubicBranchesKeepNodalCount) {
  for (Sign s : {Sign::Plus, Sign::Minus}) {
    for (int k : {1, 2}) {
      const Branch br = trace_branch(k, s, cubic, 1e-4, 1.0, 9, k123, {});
      EXPECT_EQ(br.termination_reason, Termination::AmplitudeLimit);
      ASSERT_EQ(br.points.size(), 9u);
      EXPECT_NEAR(br.points.front().mu, mu_k(s, k), 1e-4);
      for (std::size_t i = 0; i < br.points.size(); ++i) {
        const auto& p = br.points[i];
        EXPECT_EQ(p.nodal_count, k - 1);
        EXPECT_GT(p.sup_norm, 0.0);
        EXPECT_GT(sign_value(s) * p.alpha, 0.0);
        if (i > 0) {
          EXPECT_GT(std::abs(p.alpha), std::abs(br.points[i - 1].alpha));
        }
        const ShotResult shot = shoot_evb(p.alpha, p.mu, cubic, k123, {});
        EXPECT_LE(std::abs(shot.terminal_value), 1e-9 * (1 + p.sup_norm));
      }
    }
  }
}

TEST(Branch, LionsBranchIsPositiveAndClosesOnTheEigenvalue) {
  const auto p = make_params(1.0, 2.0, 2);
  const Nonlinearity lions = Nonlinearity::lions_power(2.0);
  const Branch br = trace_branch(1, Sign::Plus, lions, 1e-5, 0.5, 8, p, {});
  EXPECT_EQ(br.termination_reason, Termination::AmplitudeLimit);
  const double target = mu_k(Sign::Plus, 1, p);
  EXPECT_NEAR(br.points.front().mu, target, 1e-3);
  double prev_gap = 0.0;
  for (const auto& b : br.points) {
    EXPECT_EQ(b.nodal_count, 0);
    const double gap = b.mu - target;
    EXPECT_GT(gap, prev_gap);  // mu moves away from mu^+_1 as alpha grows
    prev_gap = gap;
    const ShotResult shot = shoot_evb(b.alpha, b.mu, lions, p, {});
    for (double r = 0.0; r < 0.999; r += 0.01) EXPECT_GT(shot.trajectory.evaluate(r).u, 0.0);
    EXPECT_LT(b.boundary_derivative, 0.0);
  }
}

TEST(Branch, RejectsBadSchedules) {
  EXPECT_THROW((void)trace_branch(1, Sign::Plus, cubic, 0.0, 1.0, 5, k123, {}), Error);
  EXPECT_THROW((void)trace_branch(1, Sign::Plus, cubic, 1.0, 0.5, 5, k123, {}), Error);
  EXPECT_THROW((void)trace_branch(1, Sign::Plus, cubic, 1e-3, 1.0, 1, k123, {}), Error);
}

TEST(Branch, TerminationNames) {
  EXPECT_EQ(to_string(Termination::AmplitudeLimit), "AmplitudeLimit");
  EXPECT_EQ(to_string(Termination::FoldDetected), "FoldDetected");
  EXPECT_EQ(to_string(Termination::RootLost), "RootLost");
}
