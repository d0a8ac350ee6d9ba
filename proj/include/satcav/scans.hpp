#pragma once

// Sweep engines: detuning spectra, truncation convergence, linewidth versus
// cooperativity, critical Doppler width and the atomic-system table.

#include "satcav/bistability.hpp"
#include "satcav/observables.hpp"
#include "satcav/parallel.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace satcav {

struct SweepPoint {
  double axis_value = 0.0;
  double x_sq = 0.0;
  double y_sq = 0.0;
  double transmission = std::numeric_limits<double>::quiet_NaN();
  double phase = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> slope;
  std::optional<double> delta_nu; ///< Hz, or relative units when no SI scales are given
  std::optional<double> ratio;    ///< linewidth relative to the first point
  bool converged = false;
  int newton_iters = 0;
  double l_increment = 0.0;
  std::string error; ///< empty unless the point failed
};

struct SweepResult {
  std::string axis_name;
  std::vector<SweepPoint> points;
  ScaledParams metadata;
  std::string termination; ///< why a sweep stopped early, if it did

  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& p : points) n += p.converged ? 0 : 1;
    return n;
  }
};

inline SweepPoint to_point(double axis, const SteadyState& ss) {
  SweepPoint p;
  p.axis_value = axis;
  p.x_sq = std::norm(ss.x);
  p.y_sq = std::norm(ss.y);
  p.transmission = ss.transmission;
  p.phase = ss.phase;
  p.converged = ss.converged;
  p.newton_iters = ss.newton_iters;
  p.l_increment = ss.truncation_increment;
  return p;
}

/// T(Delta) and phi(Delta) on n equally spaced detunings, left to right,
/// each solve seeded by the previous converged field. One velocity grid,
/// wide enough for the largest |Delta|, is shared by all points so that the
/// spectrum is exactly symmetric for a symmetric range.
inline SweepResult sweep_detuning(ScaledParams scaled, double y_sq, double detuning_lo,
                                  double detuning_hi, int n) {
  if (n < 1 || !(detuning_hi >= detuning_lo))
    throw InvalidParams("sweep_detuning: need n >= 1 and an ordered range");
  if (n > 1 && detuning_hi == detuning_lo)
    throw InvalidParams("sweep_detuning: empty range with several points");
  scaled.y_sq = y_sq;
  scaled.validate();
  ScaledParams widest = scaled;
  widest.detuning_over_gp = std::max(std::abs(detuning_lo), std::abs(detuning_hi));
  const VelocityGrid grid = build_grid(widest);

  SweepResult out;
  out.axis_name = "delta_over_gp";
  out.metadata = scaled;
  const complex y{std::sqrt(y_sq), 0.0};
  std::optional<complex> seed;
  for (int i = 0; i < n; ++i) {
    const double detuning =
        n == 1 ? detuning_lo : detuning_lo + (detuning_hi - detuning_lo) * i / (n - 1);
    NewtonOptions opt;
    opt.seed = seed;
    try {
      const SteadyState ss = newton_solve(y, detuning, scaled, grid, opt);
      out.points.push_back(to_point(detuning, ss));
      seed = ss.x;
    } catch (const Error& e) {
      SweepPoint p;
      p.axis_value = detuning;
      p.y_sq = y_sq;
      p.error = e.what();
      if (const auto* nc = dynamic_cast<const NonConvergence*>(&e)) p.newton_iters = nc->iterations();
      out.points.push_back(p);
      seed.reset();
    }
  }
  return out;
}

/// Linewidth at fixed |y|^2 for each truncation order, with the ratio to
/// the first entry (normally l_max = 0). delta_nu is in Hz when `phys` is
/// given, otherwise in units of the scaled prefactor.
inline SweepResult doppleron_convergence(ScaledParams scaled, double y_sq,
                                         const std::vector<int>& l_values,
                                         const PhysicalParams* phys = nullptr,
                                         const LinewidthOptions& opt = {}, int workers = 1) {
  if (l_values.empty()) throw InvalidParams("doppleron_convergence: no truncation orders");
  for (std::size_t i = 0; i < l_values.size(); ++i) {
    if (l_values[i] < 0 || l_values[i] % 2 != 0)
      throw InvalidParams("doppleron_convergence: orders must be even and non-negative");
    if (i > 0 && l_values[i] <= l_values[i - 1])
      throw InvalidParams("doppleron_convergence: orders must increase");
  }
  scaled.y_sq = y_sq;
  scaled.detuning_over_gp = 0.0;
  scaled.validate();
  const VelocityGrid grid = build_grid(scaled);

  SweepResult out;
  out.axis_name = "l_max";
  out.metadata = scaled;
  out.points.resize(l_values.size());
  parallel_for(l_values.size(), workers, [&](std::size_t i) {
    ScaledParams s = scaled;
    s.l_max = l_values[i];
    LinewidthOptions lo = opt;
    lo.slope.grid = grid;
    const LinewidthResult r = phys ? linewidth(y_sq, s, *phys, lo) : scaled_linewidth(y_sq, s, lo);
    SweepPoint& p = out.points[i];
    p.axis_value = l_values[i];
    p.x_sq = r.x_sq;
    p.y_sq = y_sq;
    p.transmission = r.transmission;
    p.phase = 0.0;
    p.slope = r.slope_scaled;
    p.delta_nu = phys ? r.delta_nu : r.relative_linewidth();
    p.converged = true;
    p.newton_iters = 0;
  });
  for (auto& p : out.points) p.ratio = *p.delta_nu / *out.points.front().delta_nu;
  for (std::size_t i = 1; i < out.points.size(); ++i)
    out.points[i].l_increment = std::abs(*out.points[i].ratio / *out.points[i - 1].ratio - 1.0);
  return out;
}

enum class IntensityPolicy {
  fixed_y_lower, ///< |y|^2 = 4 NC0 (zero temperature only)
  fixed_y_upper, ///< |y|^2 = NC0^2 / 4 (zero temperature only)
  optimal,       ///< optimal input intensity; stops where bistability appears
};

struct NC0SweepOptions {
  IntensityPolicy policy = IntensityPolicy::optimal;
  LinewidthOptions linewidth;
  CurveOptions curve;
  double y_sq_lo = 1.0;     ///< optimal policy search range, lower end
  double y_sq_hi_factor = 1e2; ///< upper end = factor * max(10, NC0)
};

/// One linewidth curve per Doppler width over increasing NC0 values.
inline std::vector<SweepResult> linewidth_vs_nc0(const ScaledParams& base,
                                                 const std::vector<double>& delta0_values,
                                                 const std::vector<double>& nc0_values,
                                                 const NC0SweepOptions& opt = {},
                                                 const PhysicalParams* phys = nullptr) {
  for (std::size_t i = 1; i < nc0_values.size(); ++i)
    if (nc0_values[i] <= nc0_values[i - 1])
      throw InvalidParams("linewidth_vs_nc0: NC0 values must increase");
  std::vector<SweepResult> curves;
  for (double d0 : delta0_values) {
    if (opt.policy != IntensityPolicy::optimal && d0 != 0.0)
      throw InvalidParams("linewidth_vs_nc0: fixed-intensity policies require delta0 = 0");
    SweepResult curve;
    curve.axis_name = "nc0";
    curve.metadata = base;
    curve.metadata.delta0_over_gp = d0;
    for (double nc0 : nc0_values) {
      ScaledParams s = curve.metadata;
      s.nc0 = nc0;
      SweepPoint p;
      p.axis_value = nc0;
      try {
        std::optional<PhysicalParams> row;
        if (phys) {
          row = *phys;
          row->nc0 = nc0;
        }
        LinewidthResult r;
        if (opt.policy == IntensityPolicy::optimal) {
          if (nc0 > 0.0 && bistability(s, opt.curve).bistable) {
            curve.termination = "bistability appears at NC0 = " + std::to_string(nc0);
            break;
          }
          OptimalPowerOptions oo;
          oo.linewidth = opt.linewidth;
          oo.check_bistability = false;
          oo.curve = opt.curve;
          const auto best = optimal_power(s, row ? &*row : nullptr, opt.y_sq_lo,
                                          opt.y_sq_hi_factor * std::max(10.0, nc0), oo);
          r = best.result;
        } else {
          const double y_sq =
              opt.policy == IntensityPolicy::fixed_y_lower ? 4.0 * nc0 : 0.25 * nc0 * nc0;
          r = row ? linewidth(y_sq, s, *row, opt.linewidth) : scaled_linewidth(y_sq, s, opt.linewidth);
        }
        p.x_sq = r.x_sq;
        p.y_sq = r.y_sq;
        p.transmission = r.transmission;
        p.phase = 0.0;
        p.slope = r.slope_scaled;
        p.delta_nu = row ? r.delta_nu : r.relative_linewidth();
        p.converged = true;
      } catch (const Error& e) {
        p.error = e.what();
      }
      curve.points.push_back(p);
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

struct CriticalResult {
  double delta0_over_gp = 0.0; ///< midpoint of the final bracket
  double lower = 0.0;          ///< largest Doppler width found bistable
  double upper = 0.0;          ///< smallest Doppler width found monostable
  int evaluations = 0;
};

/// Bisection on delta0/gamma_p for the Doppler width at which the resonant
/// input-output curve stops being bistable. The bracket must be bistable at
/// its lower end and monostable at its upper end.
inline CriticalResult critical_temperature(double nc0, ScaledParams base, double lower,
                                           double upper, double rel_tol = 0.01,
                                           const CurveOptions& curve = {}) {
  if (!(lower >= 0.0) || !(upper > lower))
    throw InvalidParams("critical_temperature: need 0 <= lower < upper");
  base.nc0 = nc0;
  base.detuning_over_gp = 0.0;
  CriticalResult r;
  auto bistable = [&](double d0) {
    ScaledParams s = base;
    s.delta0_over_gp = d0;
    ++r.evaluations;
    return bistability(s, curve).bistable;
  };
  const bool at_lower = bistable(lower);
  const bool at_upper = bistable(upper);
  if (at_lower == at_upper)
    throw BracketInvalid(std::string("critical_temperature: bracket ends are both ") +
                         (at_lower ? "bistable" : "monostable"));
  if (!at_lower)
    throw BracketInvalid("critical_temperature: monostable at the lower end, bistable above");
  while (upper - lower > rel_tol * upper) {
    const double mid = 0.5 * (lower + upper);
    (bistable(mid) ? lower : upper) = mid;
  }
  r.lower = lower;
  r.upper = upper;
  r.delta0_over_gp = 0.5 * (lower + upper);
  return r;
}

struct TableRow {
  std::string label;
  PhysicalParams params;
};

struct TableEntry {
  std::string label;
  double nc0 = 0.0;
  double delta0_over_gp = 0.0;
  double y_sq_opt = 0.0;
  double p_in_opt = 0.0; ///< W
  double delta_nu = 0.0; ///< Hz
  bool unimodal = true;
  std::string error;
};

/// The four intercombination lines with both cavity configurations
/// (finesse 250 with 2.5e7 atoms, finesse 1000 with 5e7 atoms).
inline std::vector<TableRow> intercombination_rows() {
  struct Species {
    const char* name;
    double lambda, gamma_hz, temperature, mass_amu, nc0_low, nc0_high;
  };
  const Species species[] = {
      {"Yb171", 556e-9, 182e3, 6.5e-3, 170.936, 374, 2991},
      {"Ca40", 657e-9, 400.0, 1.7e-3, 39.963, 522, 4176},
      {"Mg24", 457e-9, 34.0, 3.0e-3, 23.985, 253, 2021},
      {"Sr88", 689e-9, 7.6e3, 3.0e-3, 87.906, 574, 4593},
  };
  std::vector<TableRow> rows;
  for (const auto& sp : species) {
    for (int high = 0; high < 2; ++high) {
      PhysicalParams p;
      p.gamma = constants::two_pi * sp.gamma_hz;
      p.gamma_laser = constants::two_pi * 2.0e3;
      p.gamma_p = PhysicalParams::default_gamma_p(p.gamma, p.gamma_laser);
      p.finesse = high ? 1000.0 : 250.0;
      p.kappa = constants::two_pi * (high ? 0.5e6 : 2.0e6);
      p.lambda = sp.lambda;
      p.atom_mass = sp.mass_amu * constants::atomic_mass_unit;
      p.n_atoms = high ? 5.0e7 : 2.5e7;
      p.nc0 = high ? sp.nc0_high : sp.nc0_low;
      p.temperature = sp.temperature;
      p.sideband_ratio = 1.0;
      rows.push_back({std::string(sp.name) + (high ? "_F1000" : "_F250"), p});
    }
  }
  return rows;
}

struct TableOptions {
  ScaledParams settings;            ///< numerical settings (l_max, vel_nodes, ...)
  OptimalPowerOptions optimal;
  double y_sq_lo = 1.0;
  double y_sq_hi_factor = 1e2;      ///< search to factor * max(10, NC0)
  int workers = 1;

  TableOptions() {
    // calibrated against the tabulated linewidths: signal power = input power
    optimal.linewidth.signal = SignalPower::input;
  }
};

/// Optimal input power and linewidth per row.
inline std::vector<TableEntry> reproduce_table(const std::vector<TableRow>& rows,
                                               const TableOptions& opt = {}) {
  std::vector<TableEntry> out(rows.size());
  parallel_for(rows.size(), opt.workers, [&](std::size_t i) {
    const auto& row = rows[i];
    TableEntry& e = out[i];
    e.label = row.label;
    e.nc0 = row.params.nc0;
    try {
      const ScaledParams s = to_scaled(row.params, opt.settings);
      e.delta0_over_gp = s.delta0_over_gp;
      const auto best = optimal_power(s, &row.params, opt.y_sq_lo,
                                      opt.y_sq_hi_factor * std::max(10.0, s.nc0), opt.optimal);
      e.y_sq_opt = best.y_sq_opt;
      e.p_in_opt = input_power_for(row.params, best.y_sq_opt);
      e.delta_nu = best.result.delta_nu;
      e.unimodal = best.unimodal;
    } catch (const Error& err) {
      e.error = err.what();
    }
  });
  return out;
}

} // namespace satcav
