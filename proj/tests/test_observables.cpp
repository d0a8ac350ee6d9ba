#include "satcav/observables.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace satcav;

namespace {

PhysicalParams strontium() {
  PhysicalParams p;
  p.gamma = 2.0 * M_PI * 7.6e3;
  p.gamma_laser = 2.0 * M_PI * 2.0e3;
  p.gamma_p = PhysicalParams::default_gamma_p(p.gamma, p.gamma_laser);
  p.kappa = 2.0 * M_PI * 2.0e6;
  p.lambda = 689e-9;
  p.atom_mass = 87.906 * 1.66053906660e-27;
  p.n_atoms = 2.5e7;
  p.nc0 = 574;
  p.temperature = 3.0e-3;
  p.sideband_ratio = 1.0;
  return p;
}

} // namespace

TEST(Observables, TransmissionUndefinedWithoutDrive) {
  SteadyState ss;
  ss.y = 0.0;
  ss.x = 0.0;
  EXPECT_THROW(transmission_phase(ss), UndefinedAtZeroDrive);
}

TEST(Observables, ColdSlopeMatchesAnalyticForm) {
  // lowest order, cold: phi = -arg(1 + A(1 - i Delta)), A = (NC0/2)/(1 + Delta^2 + |x|^2/2);
  // d phi / d Delta at resonance is A/(1 + A)
  ScaledParams s;
  s.nc0 = 800;
  s.l_max = 0;
  for (double y_sq : {10.0, 1e5}) {
    const SlopeResult r = phase_slope_at_resonance(y_sq, s);
    const double w = std::norm(r.at_resonance.x);
    const double a = 0.5 * s.nc0 / (1.0 + 0.5 * w);
    EXPECT_NEAR(r.slope, a / (1.0 + a), 1e-6 * a / (1.0 + a)) << y_sq;
    EXPECT_FALSE(r.richardson_warning);
  }
}

TEST(Observables, HotEnsembleSlopeIsNegative) {
  ScaledParams s;
  s.nc0 = 600;
  s.delta0_over_gp = 260;
  s.gamma_over_gp = 7.6 / 5.8;
  const SlopeResult r = phase_slope_at_resonance(1270, s);
  EXPECT_LT(r.slope, 0.0);
  EXPECT_LT(r.relative_deviation, 1e-3);
}

TEST(Observables, SignalConventionsDifferByTransmission) {
  ScaledParams s;
  s.nc0 = 600;
  s.delta0_over_gp = 80;
  s.gamma_over_gp = 7.6 / 5.8;
  LinewidthOptions in, tr;
  in.signal = SignalPower::input;
  tr.signal = SignalPower::transmitted;
  const LinewidthResult a = scaled_linewidth(500, s, in);
  const LinewidthResult b = scaled_linewidth(500, s, tr);
  EXPECT_NEAR(b.merit / a.merit, a.transmission, 1e-12);
}

TEST(Observables, SiAndScaledLinewidthFormsAgree) {
  const PhysicalParams p = strontium();
  const ScaledParams s = to_scaled(p);
  for (SignalPower sig : {SignalPower::input, SignalPower::transmitted}) {
    LinewidthOptions opt;
    opt.signal = sig;
    const LinewidthResult r = linewidth(700, s, p, opt);
    EXPECT_NEAR(r.delta_nu_scaled_form / r.delta_nu, 1.0, 1e-10);
    EXPECT_GT(r.delta_nu, 0.0);
    EXPECT_DOUBLE_EQ(r.sideband_multiplier, 2.0);
  }
}

TEST(Observables, NoAtomsHasNoDiscriminant) {
  PhysicalParams p = strontium();
  ScaledParams s = to_scaled(p);
  s.nc0 = 0.0;
  EXPECT_THROW(linewidth(100, s, p), ZeroSlope);
}

TEST(Observables, OptimalPowerRejectsBistableRange) {
  ScaledParams s;
  s.nc0 = 800;
  s.l_max = 0;
  OptimalPowerOptions opt;
  opt.curve.points_per_decade = 32;
  try {
    (void)optimal_power(s, nullptr, 10.0, 1e5, opt);
    FAIL() << "expected BistableRange";
  } catch (const BistableRange& e) {
    EXPECT_GT(e.window_high(), e.window_low());
  }
}

TEST(Observables, OptimalInputIntensityWarmEnsemble) {
  // NC0 = 600, delta0 = 80: the optimum sits near |y|^2 = 850 (+-20%)
  ScaledParams s;
  s.nc0 = 600;
  s.delta0_over_gp = 80;
  s.gamma_over_gp = 7.6 / 5.8;
  OptimalPowerOptions opt;
  opt.check_bistability = false;
  opt.points_per_decade = 8;
  const OptimalPower best = optimal_power(s, nullptr, 100, 1e4, opt);
  EXPECT_TRUE(best.unimodal);
  EXPECT_NEAR(best.y_sq_opt / 850.0, 1.0, 0.2);
  for (const auto& [y, v] : best.scan) EXPECT_GE(v, best.result.relative_linewidth() * (1 - 1e-9));
}
