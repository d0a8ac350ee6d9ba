#pragma once

// Transmission, phase, the phase slope at resonance and the shot-noise
// limited stabilization linewidth.

#include "satcav/bistability.hpp"
#include "satcav/errors.hpp"
#include "satcav/params.hpp"
#include "satcav/selfconsist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace satcav {

/// T = |x/y|^2, phi = arg(x/y) in (-pi, pi].
inline std::pair<double, double> transmission_phase(const SteadyState& ss) {
  if (std::abs(ss.y) == 0.0)
    throw UndefinedAtZeroDrive("transmission and phase are undefined at zero drive");
  const complex ratio = ss.x / ss.y;
  return {std::norm(ratio), std::arg(ratio)};
}

struct SlopeResult {
  double slope = 0.0;           ///< dphi / d(Delta/gamma_p), step h
  double slope_half_step = 0.0; ///< same with step h/2
  double relative_deviation = 0.0;
  bool richardson_warning = false; ///< |slope_half_step/slope - 1| > 1%
  SteadyState at_resonance;
};

struct SlopeOptions {
  double step = 1e-3;
  std::optional<VelocityGrid> grid; ///< built from the resonant parameters when absent
};

/// Five-point central difference of phi(Delta) at Delta = 0, repeated with
/// half the step as a consistency check.
inline SlopeResult phase_slope_at_resonance(double y_sq, ScaledParams scaled,
                                            const SlopeOptions& opt = {}) {
  scaled.y_sq = y_sq;
  scaled.detuning_over_gp = 0.0;
  const VelocityGrid grid = opt.grid ? *opt.grid : build_grid(scaled);
  const complex y{std::sqrt(y_sq), 0.0};

  SlopeResult r;
  r.at_resonance = newton_solve(y, 0.0, scaled, grid);
  if (scaled.nc0 == 0.0) return r;

  NewtonOptions nopt;
  nopt.seed = r.at_resonance.x;
  nopt.report_truncation = false;
  auto phi = [&](double detuning) {
    return newton_solve(y, detuning, scaled, grid, nopt).phase;
  };
  auto stencil = [&](double h, double p1, double m1) {
    return (-phi(2.0 * h) + 8.0 * p1 - 8.0 * m1 + phi(-2.0 * h)) / (12.0 * h);
  };
  const double h = opt.step;
  const double ph = phi(h), mh = phi(-h);
  const double ph2 = phi(0.5 * h), mh2 = phi(-0.5 * h);
  r.slope = stencil(h, ph, mh);
  r.slope_half_step = (-ph + 8.0 * ph2 - 8.0 * mh2 + mh) / (6.0 * h);
  r.relative_deviation =
      r.slope != 0.0 ? std::abs(r.slope_half_step / r.slope - 1.0) : 0.0;
  r.richardson_warning = r.relative_deviation > 0.01;
  return r;
}

/// Which power is the signal power in the linewidth formula.
enum class SignalPower {
  transmitted, ///< P_sig = T * P_in, merit |x|^2 s^2
  input,       ///< P_sig = P_in, merit |y|^2 s^2
};

struct LinewidthResult {
  double delta_nu = std::numeric_limits<double>::quiet_NaN();   ///< Hz, from the SI form
  double delta_nu_scaled_form = std::numeric_limits<double>::quiet_NaN(); ///< Hz, scaled form
  double slope = 0.0;        ///< dphi/dDelta in s/rad (SI)
  double slope_scaled = 0.0; ///< dphi/d(Delta/gamma_p)
  double x_sq = 0.0;
  double y_sq = 0.0;
  double transmission = 0.0;
  double p_sig = std::numeric_limits<double>::quiet_NaN(); ///< W
  double sideband_multiplier = 1.0;
  double merit = 0.0; ///< I * s^2 with I the signal intensity (|y|^2 or |x|^2)
  bool richardson_warning = false;

  /// Linewidth in units of scaled_linewidth_prefactor: 1 / merit.
  double relative_linewidth() const {
    return merit > 0.0 ? 1.0 / merit : std::numeric_limits<double>::infinity();
  }
};

struct LinewidthOptions {
  SignalPower signal = SignalPower::transmitted;
  SlopeOptions slope;
};

/// Linewidth without an SI conversion; only the merit and relative value.
inline LinewidthResult scaled_linewidth(double y_sq, const ScaledParams& scaled,
                                        const LinewidthOptions& opt = {}) {
  const SlopeResult sr = phase_slope_at_resonance(y_sq, scaled, opt.slope);
  LinewidthResult r;
  r.slope_scaled = sr.slope;
  r.richardson_warning = sr.richardson_warning;
  r.y_sq = y_sq;
  r.x_sq = std::norm(sr.at_resonance.x);
  r.transmission = sr.at_resonance.transmission;
  const double intensity = opt.signal == SignalPower::input ? r.y_sq : r.x_sq;
  r.merit = intensity * sr.slope * sr.slope;
  return r;
}

/// Shot-noise limited linewidth
///   dnu = (1 + P_sig/2P_sideband) * hbar*omega / (8 pi eps P_sig (dphi/dDelta)^2),
/// evaluated once in SI units and once through the scaled prefactor.
inline LinewidthResult linewidth(double y_sq, const ScaledParams& scaled,
                                 const PhysicalParams& phys, const LinewidthOptions& opt = {}) {
  LinewidthResult r = scaled_linewidth(y_sq, scaled, opt);
  if (r.slope_scaled == 0.0 || r.merit == 0.0)
    throw ZeroSlope("linewidth: phase slope at resonance vanishes");
  r.slope = r.slope_scaled / phys.gamma_p;
  r.sideband_multiplier = sideband_multiplier(phys);
  const double p_in = input_power_for(phys, y_sq);
  r.p_sig = opt.signal == SignalPower::input ? p_in : r.transmission * p_in;
  r.delta_nu = r.sideband_multiplier * photon_energy(phys) /
               (8.0 * constants::pi * phys.epsilon * r.p_sig * r.slope * r.slope);
  r.delta_nu_scaled_form = scaled_linewidth_prefactor(phys) / r.merit;
  return r;
}

struct OptimalPower {
  double y_sq_opt = 0.0;
  LinewidthResult result;
  bool unimodal = true; ///< the coarse scan showed a single interior minimum
  std::vector<std::pair<double, double>> scan; ///< (y_sq, relative linewidth)
};

struct OptimalPowerOptions {
  LinewidthOptions linewidth;
  int points_per_decade = 16;
  double log_tolerance = 1e-3; ///< golden-section stop, in decades
  bool check_bistability = true;
  CurveOptions curve;
};

/// Minimises the linewidth over |y|^2 in [y_sq_lo, y_sq_hi]: coarse log
/// scan, then golden section on log10|y|^2 around the best coarse point.
/// `phys` is optional; without it only relative linewidths are reported.
inline OptimalPower optimal_power(const ScaledParams& scaled, const PhysicalParams* phys,
                                  double y_sq_lo, double y_sq_hi,
                                  const OptimalPowerOptions& opt = {}) {
  if (!(y_sq_lo > 0.0) || !(y_sq_hi > y_sq_lo))
    throw InvalidParams("optimal_power: need 0 < y_sq_lo < y_sq_hi");

  if (opt.check_bistability && scaled.nc0 > 0.0) {
    const double x_lo = 0.1 * y_sq_lo / ((1.0 + scaled.nc0) * (1.0 + scaled.nc0));
    const auto curve = input_output_curve(scaled, std::min(x_lo, 1e-3),
                                          std::max(y_sq_hi, 1e2 * std::max(1.0, scaled.nc0)),
                                          opt.curve);
    const auto& rep = curve.report;
    if (rep.bistable && rep.y_sq_low <= y_sq_hi && rep.y_sq_high >= y_sq_lo)
      throw BistableRange("optimal_power: range intersects the bistable window", rep.y_sq_low,
                          rep.y_sq_high);
  }

  auto evaluate = [&](double log_y) {
    return scaled_linewidth(std::pow(10.0, log_y), scaled, opt.linewidth).relative_linewidth();
  };

  OptimalPower out;
  const double a0 = std::log10(y_sq_lo), b0 = std::log10(y_sq_hi);
  const int n = std::max(3, static_cast<int>(std::ceil((b0 - a0) * opt.points_per_decade)) + 1);
  std::vector<double> logs(n), vals(n);
  parallel_for(static_cast<std::size_t>(n), opt.curve.workers, [&](std::size_t i) {
    logs[i] = a0 + (b0 - a0) * static_cast<double>(i) / (n - 1);
    vals[i] = evaluate(logs[i]);
  });
  for (int i = 0; i < n; ++i) out.scan.emplace_back(std::pow(10.0, logs[i]), vals[i]);

  int best = 0;
  for (int i = 1; i < n; ++i)
    if (vals[i] < vals[best]) best = i;
  int minima = 0;
  for (int i = 1; i + 1 < n; ++i)
    if (vals[i] < vals[i - 1] && vals[i] < vals[i + 1]) ++minima;
  out.unimodal = minima <= 1;

  double a = logs[std::max(0, best - 1)], b = logs[std::min(n - 1, best + 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = evaluate(c), fd = evaluate(d);
  while (b - a > opt.log_tolerance) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - inv_phi * (b - a);
      fc = evaluate(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + inv_phi * (b - a);
      fd = evaluate(d);
    }
  }
  double log_opt = 0.5 * (a + b);
  if (vals[best] < std::min(fc, fd)) log_opt = logs[best];
  out.y_sq_opt = std::pow(10.0, log_opt);
  out.result = phys ? linewidth(out.y_sq_opt, scaled, *phys, opt.linewidth)
                    : scaled_linewidth(out.y_sq_opt, scaled, opt.linewidth);
  return out;
}

} // namespace satcav
