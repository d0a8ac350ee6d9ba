#include "satcav/selfconsist.hpp"

#include "reference.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace satcav;

namespace {

ScaledParams hot(double nc0, double d0, double y_sq, double g = 1.0, int l_max = 16) {
  ScaledParams s;
  s.nc0 = nc0;
  s.delta0_over_gp = d0;
  s.y_sq = y_sq;
  s.gamma_over_gp = g;
  s.l_max = l_max;
  return s;
}

} // namespace

TEST(ForwardMap, OrderZeroMatchesIndependentLowestOrderForm) {
  for (double d0 : {0.0, 26.0, 260.0})
    for (double det : {0.0, 0.5, -3.0}) {
      ScaledParams s = hot(600, d0, 60, 1.31, 0);
      s.detuning_over_gp = det;
      const VelocityGrid grid = build_grid(s);
      for (complex x : {complex(0.7, 0.0), complex(3.0, -1.0), complex(40.0, 12.0)}) {
        const complex ours = forward_map(x, det, s, grid);
        const complex ref = reference::lowest_order_input(x, det, s.nc0, grid.nodes, grid.weights);
        EXPECT_LT(std::abs(ours - ref), 1e-10 * std::abs(ref)) << d0 << " " << det;
      }
    }
}

TEST(ForwardMap, EmptyCavityIsIdentity) {
  const ScaledParams s = hot(0.0, 26.0, 60);
  const VelocityGrid grid = build_grid(s);
  const complex x(3.0, -2.0);
  EXPECT_EQ(forward_map(x, 0.4, s, grid), x);
}

TEST(Newton, NoAtomsGivesUnitTransmissionExactly) {
  for (double y_sq : {0.5, 60.0, 900.0}) {
    ScaledParams s = hot(0.0, 260.0, y_sq);
    s.detuning_over_gp = 1.7;
    const SteadyState ss = newton_solve(s);
    EXPECT_EQ(ss.transmission, 1.0);
    EXPECT_EQ(ss.phase, 0.0);
  }
}

TEST(Newton, ResidualBelowTolerance) {
  ScaledParams s = hot(600, 260, 900, 1.31);
  s.detuning_over_gp = 0.5;
  const VelocityGrid grid = build_grid(s);
  const SteadyState ss = newton_solve(s);
  ASSERT_TRUE(ss.converged);
  const complex y(30.0, 0.0);
  EXPECT_LT(std::abs(forward_map(ss.x, 0.5, s, grid) - y), s.newton_tol * 30.0);
  EXPECT_NEAR(ss.transmission, std::norm(ss.x) / 900.0, 1e-15);
  EXPECT_NEAR(ss.phase, std::arg(ss.x / y), 1e-15);
}

TEST(Newton, WeakDriveMatchesLinearResponse) {
  // |x| -> 0: x = y / (1 + NC0/2) for a cold ensemble on resonance; the
  // standing-wave position average halves the coupling
  ScaledParams s = hot(60, 0.0, 1e-8, 1.0, 0);
  s.newton_tol = 1e-16; // the residual tolerance is absolute below |y| = 1
  const SteadyState ss = newton_solve(s);
  EXPECT_NEAR(ss.transmission, 1.0 / (31.0 * 31.0), 1e-13);
}

TEST(Newton, DetuningSymmetry) {
  ScaledParams s = hot(600, 260, 60, 1.31);
  for (double det : {0.25, 1.0, 4.0}) {
    s.detuning_over_gp = det;
    const SteadyState plus = newton_solve(s);
    s.detuning_over_gp = -det;
    const SteadyState minus = newton_solve(s);
    EXPECT_NEAR(plus.transmission, minus.transmission, 1e-10);
    EXPECT_NEAR(plus.phase, -minus.phase, 1e-10);
  }
}

TEST(Newton, ResonantPhaseVanishes) {
  const SteadyState ss = newton_solve(hot(600, 260, 60, 1.31));
  EXPECT_LT(std::abs(ss.phase), 1e-9);
}

TEST(Newton, ContinuationCrossesFold) {
  // cold bistable case where the empty-cavity seed lies beyond the fold
  const ScaledParams s = hot(60, 0.0, 60, 1.0, 16);
  NewtonOptions opt;
  opt.continuation = true;
  const SteadyState ss = newton_solve(s, opt);
  ASSERT_TRUE(ss.converged);
  const VelocityGrid grid = build_grid(s);
  EXPECT_LT(std::abs(forward_map(ss.x, 0.0, s, grid) - std::sqrt(60.0)), 1e-8);
  EXPECT_LT(ss.transmission, 0.05); // lower branch
}

TEST(Newton, BranchCheckInsideBistableWindow) {
  // the lowest-order window at NC0 = 60 is about [232, 514]
  const ScaledParams s = hot(60, 0.0, 300, 1.0, 0);
  NewtonOptions opt;
  opt.seed = complex(std::sqrt(300.0), 0.0);
  opt.check_branches = true;
  const SteadyState ss = newton_solve(s, opt);
  EXPECT_TRUE(ss.multi_branch);
  ASSERT_TRUE(ss.alternate_x.has_value());
  EXPECT_GT(std::abs(std::norm(ss.x) - std::norm(*ss.alternate_x)), 1.0);
}

TEST(Newton, IterationCapThrowsWithResidual) {
  ScaledParams s = hot(6000, 0.0, 3e5, 1.0, 0);
  s.max_newton_iters = 1;
  s.newton_tol = 1e-15;
  try {
    (void)newton_solve(s);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_GT(e.best_residual(), 0.0);
  }
}

TEST(Newton, TruncationIncrementReported) {
  const SteadyState ss = newton_solve(hot(600, 260, 900, 1.31, 16));
  EXPECT_GT(ss.truncation_increment, 0.0);
  EXPECT_LT(ss.truncation_increment, 1e-3);
}
