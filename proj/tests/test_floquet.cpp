#include "satcav/floquet.hpp"
#include "satcav/velocity_grid.hpp"

#include "reference.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace satcav;

TEST(Thomas, MatchesDenseEliminationOnRandomChains) {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> order(0, 20);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 * static_cast<std::size_t>(order(rng)) + 1; // l_max <= 40
    const auto chain = reference::random_chain(rng, n, 1.5);
    std::vector<complex> out(n), scratch(n);
    thomas_solve<complex>(chain.lower, chain.diag, chain.upper, chain.rhs, out, scratch);
    const auto dense = reference::dense_solve(reference::to_dense(chain), chain.rhs);
    EXPECT_LT(reference::max_relative_difference(out, dense), 1e-10) << "trial " << trial;
  }
}

TEST(Thomas, MatchesDenseEliminationOnPhysicalChains) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int l_max = 2 * (trial % 21);
    const complex x(30.0 * u(rng), 30.0 * u(rng));
    const double delta = 50.0 * u(rng);
    const double detuning = 5.0 * u(rng);
    const double g = 1.0 + 0.9 * u(rng);
    ScaledParams s;
    s.gamma_over_gp = g;
    s.l_max = l_max;
    const ChainCoeffs c = build_chain(x, delta, detuning, s);
    std::vector<complex> rhs(c.size());
    rhs[ChainCoeffs::slot(0, l_max)] = -g;
    const auto fast = thomas_solve(c, rhs);
    const std::size_t n = c.size();
    std::vector<std::vector<complex>> a(n, std::vector<complex>(n));
    for (std::size_t i = 0; i < n; ++i) {
      a[i][i] = c.a[i];
      if (i > 0) a[i][i - 1] = c.b[i];
      if (i + 1 < n) a[i][i + 1] = c.d[i];
    }
    const auto dense = reference::dense_solve(a, rhs);
    EXPECT_LT(reference::max_relative_difference(fast, dense), 1e-10) << "trial " << trial;
  }
}

TEST(Thomas, VanishingPivotThrows) {
  std::vector<complex> lower{0.0, 1.0}, diag{0.0, 1.0}, upper{1.0, 0.0}, rhs{1.0, 1.0};
  std::vector<complex> out(2), scratch(2);
  EXPECT_THROW(thomas_solve<complex>(lower, diag, upper, rhs, out, scratch), NumericalBreakdown);
}

TEST(Chain, CoefficientsAtOrderZero) {
  ScaledParams s;
  s.gamma_over_gp = 1.2;
  s.l_max = 2;
  const complex x(3.0, 1.0);
  const double delta = 0.7, detuning = 0.3;
  const ChainCoeffs c = build_chain(x, delta, detuning, s);
  const double coupling = 1.2 * std::norm(x) / 8.0;
  auto inv = [](complex z) { return 1.0 / z; };
  const complex p1(1.0, delta + detuning), q1(1.0, delta - detuning);
  const complex pm1(1.0, -delta + detuning), qm1(1.0, -delta - detuning);
  const complex a0 = 1.2 + coupling * (inv(p1) + inv(q1) + inv(pm1) + inv(qm1));
  EXPECT_NEAR(std::abs(c.a_at(0) - a0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(c.d_at(0) - coupling * (inv(p1) + inv(q1))), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(c.b_at(0) - coupling * (inv(pm1) + inv(qm1))), 0.0, 1e-14);
}

TEST(Chain, AtomAtRestOnResonanceHasClosedForm) {
  // delta = Delta = 0, l_max = 0: x3 = -1/(1 + |x|^2/2)
  ScaledParams s;
  s.l_max = 0;
  for (double xa : {0.0, 0.3, 2.0, 40.0}) {
    const FloquetState st = solve_class({xa, 0.0}, 0.0, 0.0, s);
    EXPECT_NEAR(st.x3[0].real(), -1.0 / (1.0 + 0.5 * xa * xa), 1e-14);
    EXPECT_NEAR(st.x3[0].imag(), 0.0, 1e-14);
  }
}

TEST(Chain, WeakFieldLeavesGroundState) {
  ScaledParams s;
  s.l_max = 16;
  const FloquetState st = solve_class({0.0, 0.0}, 3.0, 0.5, s);
  for (std::size_t i = 0; i < st.x3.size(); ++i) {
    const int l = 2 * static_cast<int>(i) - 16;
    EXPECT_NEAR(std::abs(st.x3[i] - (l == 0 ? complex(-1.0, 0.0) : complex{})), 0.0, 1e-15);
  }
}

TEST(Chain, OrderZeroResponseMatchesLowestOrderIntegrand) {
  // (4/x) (x1^(-1) + x1^(+1)) / sqrt(g) reproduces minus the xi-form integrand
  for (double g : {1.0, 1.31, 0.5}) {
    ScaledParams s;
    s.gamma_over_gp = g;
    s.l_max = 0;
    for (double delta : {0.0, 0.4, 3.0, 90.0})
      for (double det : {0.0, -0.7, 2.0}) {
        const complex x(5.0, -2.0);
        const complex sum = solve_class(x, delta, det, s).dipole_sum();
        const complex resp = -4.0 * sum / (std::sqrt(g) * x);
        const auto one = reference::lowest_order_input(x, det, 4.0, {delta}, {1.0});
        const complex ref = (one / x - 1.0); // NC0/4 * 4 = 1 weight
        EXPECT_NEAR(std::abs(resp - ref), 0.0, 1e-11 * std::abs(ref))
            << "g " << g << " delta " << delta << " det " << det;
      }
  }
}

TEST(Chain, MirrorSymmetry) {
  // delta -> -delta, Delta -> -Delta, x -> conj(x) conjugates the dipole sum
  ScaledParams s;
  s.l_max = 12;
  const complex x(4.0, 1.5);
  const complex a = solve_class(x, 2.3, 0.8, s).dipole_sum();
  const complex b = solve_class(std::conj(x), -2.3, -0.8, s).dipole_sum();
  EXPECT_NEAR(std::abs(a - std::conj(b)), 0.0, 1e-13 * std::abs(a));
}

TEST(Chain, TruncationIncrementDecays) {
  ScaledParams s;
  s.gamma_over_gp = 1.31;
  // the chain needs orders beyond |x|/delta before the tail decays
  const complex x(30.0, 0.0);
  double prev = 1.0;
  for (int l : {16, 32, 48}) {
    s.l_max = l;
    const double inc = truncation_increment(x, 0.9, 0.0, s);
    EXPECT_LT(inc, prev) << l;
    prev = inc;
  }
  EXPECT_LT(prev, 1e-7);
  s.l_max = 64;
  EXPECT_LT(truncation_increment(x, 0.9, 0.0, s), 1e-12);
}

TEST(Grid, NormalisedAndSymmetric) {
  ScaledParams s;
  s.delta0_over_gp = 260;
  s.y_sq = 900;
  const VelocityGrid g = build_grid(s);
  double total = 0.0, second = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    total += g.weights[i];
    second += g.weights[i] * g.nodes[i] * g.nodes[i];
    EXPECT_DOUBLE_EQ(g.nodes[i], -g.nodes[g.size() - 1 - i]);
    EXPECT_DOUBLE_EQ(g.weights[i], g.weights[g.size() - 1 - i]);
  }
  EXPECT_NEAR(total, 1.0, 1e-14);
  EXPECT_NEAR(second / (260.0 * 260.0), 1.0, 1e-9);
  EXPECT_GE(g.patch_half_width, 90.0);
}

TEST(Grid, CentralSpacingResolvesLinewidth) {
  ScaledParams s;
  s.delta0_over_gp = 133.2;
  s.y_sq = 100;
  const VelocityGrid g = build_grid(s);
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (std::abs(g.nodes[i]) < g.patch_half_width && std::abs(g.nodes[i - 1]) < g.patch_half_width) {
      EXPECT_LT(g.nodes[i] - g.nodes[i - 1], 0.25);
    }
  }
}

TEST(Grid, ColdEnsembleIsSingleNode) {
  ScaledParams s;
  const VelocityGrid g = build_grid(s);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g.nodes[0], 0.0);
  EXPECT_EQ(g.weights[0], 1.0);
}

TEST(Grid, QuadratureMatchesFineIntegration) {
  ScaledParams s;
  s.delta0_over_gp = 26.0;
  s.y_sq = 60;
  const VelocityGrid g = build_grid(s);
  // E[1/(1 + delta^2)] against a fine trapezoid integration
  double fine = 0.0;
  const double h = 1e-3, d0 = 26.0;
  for (double d = -8 * d0; d <= 8 * d0; d += h)
    fine += h * std::exp(-0.5 * d * d / (d0 * d0)) / (std::sqrt(2 * M_PI) * d0) / (1.0 + d * d);
  double quad = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) quad += g.weights[i] / (1.0 + g.nodes[i] * g.nodes[i]);
  EXPECT_NEAR(quad / fine, 1.0, 1e-6);
}
