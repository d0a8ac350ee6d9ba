#include "satcav/params.hpp"

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
  p.p_in = 47e-9;
  p.sideband_ratio = 1.0;
  return p;
}

} // namespace

TEST(Params, StrontiumDopplerWidthByHand) {
  const PhysicalParams p = strontium();
  // gamma_p / 2pi = 3.8 kHz + 2 kHz
  EXPECT_NEAR(p.gamma_p / (2.0 * M_PI), 5.8e3, 1e-9);
  const double v_rms = std::sqrt(1.380649e-23 * 3.0e-3 / (87.906 * 1.66053906660e-27));
  const double expected = (2.0 * M_PI / 689e-9) * v_rms / (2.0 * M_PI * 5.8e3);
  const ScaledParams s = to_scaled(p);
  EXPECT_NEAR(s.delta0_over_gp, expected, 1e-9 * expected);
  EXPECT_NEAR(s.delta0_over_gp, 133.2, 0.1);
  EXPECT_NEAR(s.gamma_over_gp, 7.6 / 5.8, 1e-12);
}

TEST(Params, InputIntensityFollowsSaturationPhotonNumber) {
  const PhysicalParams p = strontium();
  // long route: eta = sqrt(kappa P / hbar omega), n0 = gamma gamma_p / (4 g0^2),
  // g0^2 = C0 kappa gamma_p, |y|^2 = eta^2 / (kappa^2 n0)
  const double hw = 2.0 * M_PI * 1.054571817e-34 * 299792458.0 / p.lambda;
  const double c0 = p.nc0 / p.n_atoms;
  const double g0_sq = c0 * p.kappa * p.gamma_p;
  const double n0 = p.gamma * p.gamma_p / (4.0 * g0_sq);
  const double eta_sq = p.kappa * p.p_in / hw;
  const double y_sq = eta_sq / (p.kappa * p.kappa * n0);
  EXPECT_NEAR(to_scaled(p).y_sq, y_sq, 1e-10 * y_sq);
  EXPECT_NEAR(input_power_for(p, y_sq), p.p_in, 1e-12 * p.p_in);
}

TEST(Params, TemperatureInvertsDopplerWidth) {
  const PhysicalParams p = strontium();
  const ScaledParams s = to_scaled(p);
  EXPECT_NEAR(temperature_for(p, s.delta0_over_gp), p.temperature, 1e-12 * p.temperature);
  EXPECT_NEAR(temperature_for(p, 2.0 * s.delta0_over_gp), 4.0 * p.temperature, 1e-12);
}

TEST(Params, ScaledLinewidthPrefactor) {
  const PhysicalParams p = strontium();
  const double c0 = p.nc0 / p.n_atoms;
  const double expected = 2.0 * c0 * p.gamma_p * p.gamma_p / (2.0 * M_PI * p.gamma);
  EXPECT_NEAR(scaled_linewidth_prefactor(p), expected, 1e-12 * expected);
  EXPECT_DOUBLE_EQ(sideband_multiplier(p), 2.0);
}

TEST(Params, ScaledRoundTrip) {
  const PhysicalParams p = strontium();
  const ScaledParams s = to_scaled(p);
  ReferenceScales ref;
  ref.gamma = p.gamma;
  ref.gamma_laser = p.gamma_laser;
  ref.kappa = p.kappa;
  ref.lambda = p.lambda;
  ref.atom_mass = p.atom_mass;
  ref.n_atoms = p.n_atoms;
  ref.sideband_ratio = p.sideband_ratio;
  const PhysicalParams back = from_scaled(s, ref);
  EXPECT_NEAR(back.gamma_p, p.gamma_p, 1e-9 * p.gamma_p);
  EXPECT_NEAR(back.temperature, p.temperature, 1e-9 * p.temperature);
  EXPECT_NEAR(back.p_in, p.p_in, 1e-9 * p.p_in);
  EXPECT_NEAR(back.nc0, p.nc0, 1e-9);
}

TEST(Params, ValidationRejectsBadInput) {
  PhysicalParams p = strontium();
  p.gamma_p = 0.4 * p.gamma;
  EXPECT_THROW(p.validate(), InvalidParams);
  p = strontium();
  p.epsilon = 1.5;
  EXPECT_THROW(p.validate(), InvalidParams);
  p = strontium();
  p.kappa = 0.0;
  EXPECT_THROW(p.validate(), InvalidParams);

  ScaledParams s;
  s.l_max = 3;
  EXPECT_THROW(s.validate(), InvalidParams);
  s = ScaledParams{};
  s.nc0 = -1.0;
  EXPECT_THROW(s.validate(), InvalidParams);
  s = ScaledParams{};
  s.gamma_over_gp = 2.5;
  EXPECT_THROW(s.validate(), InvalidParams);
}

TEST(Params, ZeroTemperatureAndPowerAreAllowed) {
  PhysicalParams p = strontium();
  p.temperature = 0.0;
  p.p_in = 0.0;
  const ScaledParams s = to_scaled(p);
  EXPECT_EQ(s.delta0_over_gp, 0.0);
  EXPECT_EQ(s.y_sq, 0.0);
}
