#pragma once

// Physical (SI) and scaled (dimensionless) parameter sets and the
// conversions between them. Scaled quantities measure every rate in units of
// the total dipole decay rate gamma_p; fields are measured in units of the
// square root of the saturation photon number n0 = gamma*gamma_p/(4 g0^2).

#include "satcav/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace satcav {

namespace constants {
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double speed_of_light = 299792458.0; // m/s
inline constexpr double boltzmann = 1.380649e-23;     // J/K
inline constexpr double atomic_mass_unit = 1.66053906660e-27; // kg
} // namespace constants

/// SI description of atom, cavity, drive and detection. All rates in rad/s.
struct PhysicalParams {
  double gamma = 0.0;        ///< spontaneous emission rate
  double gamma_p = 0.0;      ///< total dipole decay rate
  double gamma_laser = 0.0;  ///< probe laser decoherence rate
  double kappa = 0.0;        ///< cavity field decay rate
  double lambda = 0.0;       ///< transition wavelength (m)
  double atom_mass = 0.0;    ///< kg
  double n_atoms = 0.0;      ///< atom number N
  double temperature = 0.0;  ///< K
  double p_in = 0.0;         ///< input power (W)
  double epsilon = 1.0;      ///< photodetector efficiency
  double sideband_ratio = 0.0; ///< P_sig / (2 P_sideband)
  double finesse = 0.0;      ///< informational only
  double nc0 = 0.0;          ///< collective cooperativity N*C0

  /// gamma_p = gamma/2 + gamma_laser: laser decoherence adds pure dephasing.
  static double default_gamma_p(double gamma, double gamma_laser) {
    return 0.5 * gamma + gamma_laser;
  }

  void validate() const {
    auto require = [](bool ok, const char* msg) {
      if (!ok) throw InvalidParams(msg);
    };
    require(gamma > 0.0, "gamma must be positive");
    require(gamma_p > 0.0, "gamma_p must be positive");
    require(gamma_laser >= 0.0, "gamma_laser must be non-negative");
    require(kappa > 0.0, "kappa must be positive");
    require(lambda > 0.0, "lambda must be positive");
    require(atom_mass > 0.0, "atom_mass must be positive");
    require(temperature >= 0.0, "temperature must be non-negative");
    require(p_in >= 0.0, "p_in must be non-negative");
    require(epsilon > 0.0 && epsilon <= 1.0, "epsilon must lie in (0, 1]");
    require(n_atoms >= 0.0, "n_atoms must be non-negative");
    require(nc0 >= 0.0, "nc0 must be non-negative");
    require(sideband_ratio >= 0.0, "sideband_ratio must be non-negative");
    require(gamma_p >= 0.5 * gamma * (1.0 - 1e-12),
            "gamma_p must be at least gamma/2 (radiative limit)");
  }
};

/// Dimensionless working set shared by all solvers.
struct ScaledParams {
  double nc0 = 0.0;
  double delta0_over_gp = 0.0;   ///< RMS Doppler shift / gamma_p
  double detuning_over_gp = 0.0; ///< atom-cavity detuning / gamma_p
  double y_sq = 0.0;             ///< scaled input intensity |y|^2
  double gamma_over_gp = 1.0;
  int l_max = 16;
  int vel_nodes = 200;
  double newton_tol = 1e-9;
  int max_newton_iters = 100;

  void validate() const {
    auto require = [](bool ok, const char* msg) {
      if (!ok) throw InvalidParams(msg);
    };
    require(nc0 >= 0.0, "nc0 must be non-negative");
    require(delta0_over_gp >= 0.0, "delta0_over_gp must be non-negative");
    require(y_sq >= 0.0, "y_sq must be non-negative");
    require(gamma_over_gp > 0.0 && gamma_over_gp <= 2.0 * (1.0 + 1e-12),
            "gamma_over_gp must lie in (0, 2]");
    require(l_max >= 0 && l_max % 2 == 0, "l_max must be even and non-negative");
    require(vel_nodes >= 1, "vel_nodes must be at least 1");
    require(newton_tol > 0.0, "newton_tol must be positive");
    require(max_newton_iters >= 1, "max_newton_iters must be at least 1");
    require(std::isfinite(detuning_over_gp), "detuning must be finite");
  }
};

inline double wavenumber(const PhysicalParams& p) { return constants::two_pi / p.lambda; }

inline double photon_energy(const PhysicalParams& p) {
  return constants::two_pi * constants::hbar * constants::speed_of_light / p.lambda;
}

/// One-dimensional RMS Doppler shift k*sqrt(kB*T/m) in rad/s.
inline double doppler_width(const PhysicalParams& p) {
  return wavenumber(p) * std::sqrt(constants::boltzmann * p.temperature / p.atom_mass);
}

inline double single_atom_cooperativity(const PhysicalParams& p) {
  if (p.n_atoms <= 0.0)
    throw InvalidParams("per-atom cooperativity requires n_atoms > 0");
  return p.nc0 / p.n_atoms;
}

/// |y|^2 per watt of input power: 4 C0 / (hbar*omega*gamma).
inline double y_sq_per_watt(const PhysicalParams& p) {
  return 4.0 * single_atom_cooperativity(p) / (photon_energy(p) * p.gamma);
}

inline double input_power_for(const PhysicalParams& p, double y_sq) {
  return y_sq / y_sq_per_watt(p);
}

inline double temperature_for(const PhysicalParams& p, double delta0_over_gp) {
  const double v = delta0_over_gp * p.gamma_p / wavenumber(p);
  return v * v * p.atom_mass / constants::boltzmann;
}

inline double sideband_multiplier(const PhysicalParams& p) { return 1.0 + p.sideband_ratio; }

/// Hz. The shot-noise linewidth is this factor divided by I*s^2, where s is
/// the scaled phase slope dphi/d(Delta/gamma_p) and I is the scaled intensity
/// carrying the signal power (|y|^2 for input power, |x|^2 for transmitted).
inline double scaled_linewidth_prefactor(const PhysicalParams& p) {
  const double c0 = single_atom_cooperativity(p);
  return sideband_multiplier(p) * c0 * p.gamma_p * p.gamma_p /
         (constants::two_pi * p.epsilon * p.gamma);
}

/// Converts to scaled units. Numerical settings (l_max, tolerances, ...)
/// are taken from `settings`.
inline ScaledParams to_scaled(const PhysicalParams& p, const ScaledParams& settings = {}) {
  p.validate();
  ScaledParams s = settings;
  s.nc0 = p.nc0;
  s.delta0_over_gp = doppler_width(p) / p.gamma_p;
  s.gamma_over_gp = p.gamma / p.gamma_p;
  if (p.p_in > 0.0)
    s.y_sq = p.p_in * y_sq_per_watt(p);
  else
    s.y_sq = 0.0;
  return s;
}

/// Scales that, combined with a ScaledParams, pin down a PhysicalParams.
struct ReferenceScales {
  double gamma = 0.0;
  double gamma_laser = 0.0;
  double kappa = 0.0;
  double lambda = 0.0;
  double atom_mass = 0.0;
  double n_atoms = 0.0;
  double epsilon = 1.0;
  double sideband_ratio = 0.0;
};

inline PhysicalParams from_scaled(const ScaledParams& s, const ReferenceScales& ref) {
  PhysicalParams p;
  p.gamma = ref.gamma;
  p.gamma_p = ref.gamma / s.gamma_over_gp;
  p.gamma_laser = ref.gamma_laser;
  p.kappa = ref.kappa;
  p.lambda = ref.lambda;
  p.atom_mass = ref.atom_mass;
  p.n_atoms = ref.n_atoms;
  p.epsilon = ref.epsilon;
  p.sideband_ratio = ref.sideband_ratio;
  p.nc0 = s.nc0;
  p.temperature = temperature_for(p, s.delta0_over_gp);
  p.p_in = s.y_sq > 0.0 ? input_power_for(p, s.y_sq) : 0.0;
  return p;
}

} // namespace satcav
