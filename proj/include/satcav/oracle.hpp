#pragma once

// Time-domain integrator of the continuous-velocity mean-field equations,
// used as an independent check of the Floquet steady state. In scaled
// units (time in 1/gamma_p, c = cos(delta*t + theta)):
//
//   dx/dt      = kappa * (y - x + (2 NC0 / sqrt(g)) * sum_a w_a c_a s_a)
//   ds_a/dt    = -(1 + i Delta) s_a + (sqrt(g)/2) c_a x z_a
//   dz_a/dt    = -g (z_a + 1) - 2 sqrt(g) c_a Re(conj(x) s_a)
//
// with g = gamma/gamma_p. Every velocity class is represented by K atoms at
// spatial phases theta_k = pi*k/K. The steady state does not depend on
// kappa. The phases average the coupling over the standing wave: harmonics
// 2m*delta of the field cancel unless K divides m, and a class at rest is
// averaged over the antinode-to-node profile. This is what the Floquet
// chain describes, since its l = 0 component is the position average.

#include "satcav/errors.hpp"
#include "satcav/params.hpp"
#include "satcav/velocity_grid.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace satcav {

using complex = std::complex<double>;

struct TimeDomainConfig {
  double dt = 0.0;              ///< step in 1/gamma_p; 0 selects it automatically
  double t_end = 400.0;         ///< horizon in 1/gamma_p
  double kappa_over_gp = 20.0;  ///< cavity decay rate (steady state is independent of it)
  int phases = 8;               ///< spatial phases per moving class (minimum)
  int phases_at_rest = 256;     ///< phases for the class at delta = 0 (maximum)
  double phase_factor = 1.0;    ///< slow classes get ceil(phase_factor*|y|/|delta|) phases
  double average_window = 10.0; ///< averaging window in 1/gamma_p
  double drift_tol = 1e-5;      ///< relative change of |<x>| between windows
  double divergence_guard = 1e6;
  int sample_stride = 1;        ///< record the field every n steps
};

/// dt: 1/20 of the shortest period among the fastest Doppler shift plus
/// Rabi frequency, the unit dipole and population rates and the collective
/// (vacuum Rabi) oscillation, and at most 0.1/kappa.
inline double auto_time_step(const ScaledParams& scaled, double y_abs, const VelocityGrid& grid,
                             double kappa_over_gp) {
  double delta_max = 0.0;
  for (double d : grid.nodes) delta_max = std::max(delta_max, std::abs(d));
  const double g = scaled.gamma_over_gp;
  const double rabi = std::sqrt(g) * y_abs;
  const double freq = std::max({delta_max + rabi + std::abs(scaled.detuning_over_gp), 1.0, g,
                                std::sqrt(kappa_over_gp * scaled.nc0)});
  return std::min(constants::two_pi / (20.0 * freq), 0.1 / kappa_over_gp);
}

struct TimeSeries {
  std::vector<double> t;
  std::vector<complex> x;
  double dt = 0.0;
  // per-atom final state; atoms of class i occupy a contiguous block
  std::vector<double> atom_delta;
  std::vector<double> atom_phase;
  std::vector<complex> sigma_minus;
  std::vector<double> sigma_z;
  double sigma_z_min = -1.0;
  double sigma_z_max = -1.0;
};

namespace detail {

/// Fixed-step classic Runge-Kutta over field + atoms.
class TimeDomainSystem {
public:
  TimeDomainSystem(const ScaledParams& scaled, complex y, double detuning,
                   const VelocityGrid& grid, const TimeDomainConfig& cfg)
      : y_(y), detuning_(detuning), kappa_(cfg.kappa_over_gp), g_(scaled.gamma_over_gp),
        sqrt_g_(std::sqrt(scaled.gamma_over_gp)),
        coupling_(scaled.nc0 > 0.0 ? 2.0 * scaled.nc0 / std::sqrt(scaled.gamma_over_gp) : 0.0),
        guard_(cfg.divergence_guard * std::max(1.0, std::abs(y))) {
    if (!(kappa_ > 0.0)) throw InvalidParams("time domain: kappa must be positive");
    if (cfg.phases < 1 || cfg.phases_at_rest < 1)
      throw InvalidParams("time domain: phase counts must be positive");
    dt_ = cfg.dt > 0.0 ? cfg.dt : auto_time_step(scaled, std::abs(y), grid, kappa_);
    // NC0 = 0 decouples the atoms from the field; they are not integrated.
    if (coupling_ > 0.0) {
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = grid.nodes[i];
        int k = cfg.phases_at_rest;
        if (d != 0.0) {
          const double wanted = std::ceil(cfg.phase_factor * std::abs(y) / std::abs(d));
          k = static_cast<int>(std::clamp<double>(wanted, cfg.phases, cfg.phases_at_rest));
        }
        for (int j = 0; j < k; ++j) {
          delta_.push_back(d);
          theta_.push_back(constants::pi * j / k);
          weight_.push_back(grid.weights[i] / k);
        }
      }
    }
    const std::size_t n = delta_.size();
    for (auto* v : {&sr_, &si_, &k_sr_, &k_si_, &t_sr_, &t_si_, &acc_sr_, &acc_si_}) v->assign(n, 0.0);
    for (auto* v : {&z_, &k_z_, &t_z_, &acc_z_}) v->assign(n, 0.0);
    std::fill(z_.begin(), z_.end(), -1.0);
    for (auto* v : {&c0_, &c1_, &c2_, &pr_, &pi_, &hr_, &hi_}) v->assign(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
      hr_[a] = std::cos(0.5 * delta_[a] * dt_);
      hi_[a] = std::sin(0.5 * delta_[a] * dt_);
    }
    reset_phasors();
  }

  double dt() const { return dt_; }
  double time() const { return static_cast<double>(steps_) * dt_; }
  complex field() const { return x_; }
  double z_min() const { return z_min_; }
  double z_max() const { return z_max_; }

  void step() {
    if (steps_ % 1024 == 0) reset_phasors();
    const std::size_t n = delta_.size();
    for (std::size_t a = 0; a < n; ++a) {
      const double mr = pr_[a] * hr_[a] - pi_[a] * hi_[a];
      const double mi = pr_[a] * hi_[a] + pi_[a] * hr_[a];
      const double er = mr * hr_[a] - mi * hi_[a];
      const double ei = mr * hi_[a] + mi * hr_[a];
      c0_[a] = pr_[a];
      c1_[a] = mr;
      c2_[a] = er;
      pr_[a] = er;
      pi_[a] = ei;
    }

    const double h = dt_;
    // stage 1
    complex kx = derivative(x_, sr_.data(), si_.data(), z_.data(), c0_.data());
    accumulate_init(h / 6.0, kx);
    stage_state(0.5 * h, kx);
    // stage 2
    kx = derivative(x_tmp_, t_sr_.data(), t_si_.data(), t_z_.data(), c1_.data());
    accumulate(h / 3.0, kx);
    stage_state(0.5 * h, kx);
    // stage 3
    kx = derivative(x_tmp_, t_sr_.data(), t_si_.data(), t_z_.data(), c1_.data());
    accumulate(h / 3.0, kx);
    stage_state(h, kx);
    // stage 4
    kx = derivative(x_tmp_, t_sr_.data(), t_si_.data(), t_z_.data(), c2_.data());
    accumulate(h / 6.0, kx);

    x_ += acc_x_;
    double zmin = z_min_, zmax = z_max_, smax = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      sr_[a] += acc_sr_[a];
      si_[a] += acc_si_[a];
      z_[a] += acc_z_[a];
      zmin = std::min(zmin, z_[a]);
      zmax = std::max(zmax, z_[a]);
      smax = std::max(smax, std::abs(sr_[a]) + std::abs(si_[a]));
    }
    z_min_ = zmin;
    z_max_ = zmax;
    ++steps_;
    if (!std::isfinite(x_.real()) || !std::isfinite(x_.imag()) || !(std::abs(x_) < guard_) ||
        !(smax < 10.0) || !(zmax < 10.0) || !(zmin > -10.0))
      throw StepUnstable("time domain: state diverged at t = " + std::to_string(time()) +
                         " (dt = " + std::to_string(dt_) + ")");
  }

  void export_atoms(TimeSeries& ts) const {
    ts.atom_delta = delta_;
    ts.atom_phase = theta_;
    ts.sigma_minus.resize(delta_.size());
    for (std::size_t a = 0; a < delta_.size(); ++a) ts.sigma_minus[a] = {sr_[a], si_[a]};
    ts.sigma_z = z_;
    ts.sigma_z_min = delta_.empty() ? -1.0 : z_min_;
    ts.sigma_z_max = delta_.empty() ? -1.0 : z_max_;
  }

private:
  void reset_phasors() {
    const double t = time();
    for (std::size_t a = 0; a < delta_.size(); ++a) {
      pr_[a] = std::cos(delta_[a] * t + theta_[a]);
      pi_[a] = std::sin(delta_[a] * t + theta_[a]);
    }
  }

  complex derivative(complex x, const double* sr, const double* si, const double* z,
                     const double* c) {
    const std::size_t n = delta_.size();
    const double half = 0.5 * sqrt_g_, two = 2.0 * sqrt_g_, det = detuning_, g = g_;
    double s_re = 0.0, s_im = 0.0;
    const double xr = x.real(), xi = x.imag();
    for (std::size_t a = 0; a < n; ++a) {
      const double cr = c[a] * xr, ci = c[a] * xi;
      k_sr_[a] = -sr[a] + det * si[a] + half * cr * z[a];
      k_si_[a] = -si[a] - det * sr[a] + half * ci * z[a];
      k_z_[a] = -g * (z[a] + 1.0) - two * (cr * sr[a] + ci * si[a]);
      const double wc = weight_[a] * c[a];
      s_re += wc * sr[a];
      s_im += wc * si[a];
    }
    return kappa_ * (y_ - x + coupling_ * complex{s_re, s_im});
  }

  void accumulate_init(double f, complex kx) {
    acc_x_ = f * kx;
    for (std::size_t a = 0; a < delta_.size(); ++a) {
      acc_sr_[a] = f * k_sr_[a];
      acc_si_[a] = f * k_si_[a];
      acc_z_[a] = f * k_z_[a];
    }
  }

  void accumulate(double f, complex kx) {
    acc_x_ += f * kx;
    for (std::size_t a = 0; a < delta_.size(); ++a) {
      acc_sr_[a] += f * k_sr_[a];
      acc_si_[a] += f * k_si_[a];
      acc_z_[a] += f * k_z_[a];
    }
  }

  void stage_state(double f, complex kx) {
    x_tmp_ = x_ + f * kx;
    for (std::size_t a = 0; a < delta_.size(); ++a) {
      t_sr_[a] = sr_[a] + f * k_sr_[a];
      t_si_[a] = si_[a] + f * k_si_[a];
      t_z_[a] = z_[a] + f * k_z_[a];
    }
  }

  complex y_;
  double detuning_, kappa_, g_, sqrt_g_, coupling_, guard_;
  double dt_ = 0.0;
  long long steps_ = 0;
  complex x_{}, x_tmp_{}, acc_x_{};
  double z_min_ = -1.0, z_max_ = -1.0;
  std::vector<double> delta_, theta_, weight_;
  std::vector<double> sr_, si_, z_, k_sr_, k_si_, k_z_, t_sr_, t_si_, t_z_, acc_sr_, acc_si_,
      acc_z_;
  std::vector<double> c0_, c1_, c2_, pr_, pi_, hr_, hi_;
};

} // namespace detail

/// Integrates from the empty cavity with all atoms in the ground state
/// (x = 0, s = 0, z = -1) up to cfg.t_end, recording the field.
inline TimeSeries integrate(const ScaledParams& scaled, complex y, double detuning,
                            const VelocityGrid& grid, const TimeDomainConfig& cfg = {}) {
  detail::TimeDomainSystem sys(scaled, y, detuning, grid, cfg);
  TimeSeries ts;
  ts.dt = sys.dt();
  const long long steps = static_cast<long long>(std::ceil(cfg.t_end / sys.dt() - 1e-9));
  const int stride = std::max(1, cfg.sample_stride);
  ts.t.push_back(0.0);
  ts.x.push_back(sys.field());
  for (long long s = 1; s <= steps; ++s) {
    sys.step();
    if (s % stride == 0 || s == steps) {
      ts.t.push_back(sys.time());
      ts.x.push_back(sys.field());
    }
  }
  sys.export_atoms(ts);
  return ts;
}

struct SteadyObservables {
  complex x_avg{};
  double transmission = std::numeric_limits<double>::quiet_NaN();
  double phase = std::numeric_limits<double>::quiet_NaN();
  double drift = 0.0; ///< relative change of |<x>| between the last two windows
};

namespace detail {

/// Trapezoidal mean of x over samples with t in [t0, t1].
inline complex window_mean(const TimeSeries& ts, double t0, double t1) {
  complex sum{};
  double span = 0.0;
  for (std::size_t i = 1; i < ts.t.size(); ++i) {
    if (ts.t[i - 1] < t0 - 1e-12 || ts.t[i] > t1 + 1e-12) continue;
    const double w = ts.t[i] - ts.t[i - 1];
    sum += 0.5 * w * (ts.x[i] + ts.x[i - 1]);
    span += w;
  }
  return span > 0.0 ? sum / span : ts.x.back();
}

inline double relative_drift(complex now, complex before) {
  const double scale = std::max(std::abs(now), 1e-300);
  return std::abs(std::abs(now) - std::abs(before)) / scale;
}

} // namespace detail

/// Averages the field over the final window and checks it against the
/// window before. Throws TransientNotSettled when the relative drift of
/// |<x>| exceeds cfg.drift_tol.
inline SteadyObservables steady_observables(const TimeSeries& ts, complex y,
                                            const TimeDomainConfig& cfg = {}) {
  if (ts.t.size() < 2) throw InvalidParams("steady_observables: empty series");
  const double t_end = ts.t.back();
  const double w = std::min(cfg.average_window, 0.5 * t_end);
  SteadyObservables out;
  out.x_avg = detail::window_mean(ts, t_end - w, t_end);
  const complex before = detail::window_mean(ts, t_end - 2.0 * w, t_end - w);
  out.drift = std::abs(out.x_avg) > 0.0 ? detail::relative_drift(out.x_avg, before) : 0.0;
  if (out.drift > cfg.drift_tol)
    throw TransientNotSettled("steady_observables: field still drifting (relative " +
                              std::to_string(out.drift) + ")");
  if (std::abs(y) > 0.0) {
    const complex ratio = out.x_avg / y;
    out.transmission = std::norm(ratio);
    out.phase = std::arg(ratio);
  }
  return out;
}

struct TimeDomainResult {
  SteadyObservables steady;
  double t_final = 0.0;
  double dt = 0.0;
  long long steps = 0;
  std::size_t atoms = 0;
  double sigma_z_min = -1.0;
  double sigma_z_max = -1.0;
  double step_check_deviation = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline TimeDomainResult settle_once(const ScaledParams& scaled, complex y, double detuning,
                                    const VelocityGrid& grid, const TimeDomainConfig& cfg) {
  TimeSeries ts;
  TimeDomainSystem sys(scaled, y, detuning, grid, cfg);
  ts.dt = sys.dt();
  const long long per_window =
      std::max<long long>(1, static_cast<long long>(std::llround(cfg.average_window / sys.dt())));
  const long long max_steps = static_cast<long long>(std::ceil(cfg.t_end / sys.dt()));
  std::vector<complex> means;
  complex sum{};
  complex prev = sys.field();
  long long s = 0;
  double drift = std::numeric_limits<double>::infinity();
  while (s < max_steps) {
    sys.step();
    ++s;
    const complex now = sys.field();
    sum += 0.5 * (now + prev);
    prev = now;
    if (s % per_window == 0) {
      means.push_back(sum / static_cast<double>(per_window));
      sum = {};
      if (means.size() >= 3) {
        const complex a = means[means.size() - 1], b = means[means.size() - 2];
        drift = std::abs(a) > 0.0 ? relative_drift(a, b) : 0.0;
        if (drift <= cfg.drift_tol) break;
      }
    }
  }
  if (!(drift <= cfg.drift_tol))
    throw TransientNotSettled("time domain: not settled by t = " + std::to_string(sys.time()) +
                              " (relative drift " + std::to_string(drift) + ")");
  TimeDomainResult r;
  r.steady.x_avg = means.back();
  r.steady.drift = drift;
  if (std::abs(y) > 0.0) {
    const complex ratio = r.steady.x_avg / y;
    r.steady.transmission = std::norm(ratio);
    r.steady.phase = std::arg(ratio);
  }
  r.t_final = sys.time();
  r.dt = sys.dt();
  r.steps = s;
  sys.export_atoms(ts);
  r.atoms = ts.sigma_z.size();
  r.sigma_z_min = ts.sigma_z_min;
  r.sigma_z_max = ts.sigma_z_max;
  return r;
}

} // namespace detail

/// Integrates window by window until the window-averaged field stops
/// drifting, then reports its steady observables. With `step_check` the run
/// is repeated at half the step and the relative change of |<x>| recorded.
inline TimeDomainResult time_domain_steady_state(const ScaledParams& scaled, complex y,
                                                 double detuning, const VelocityGrid& grid,
                                                 const TimeDomainConfig& cfg = {},
                                                 bool step_check = false) {
  TimeDomainResult r = detail::settle_once(scaled, y, detuning, grid, cfg);
  if (step_check) {
    TimeDomainConfig half = cfg;
    half.dt = 0.5 * r.dt;
    const TimeDomainResult fine = detail::settle_once(scaled, y, detuning, grid, half);
    r.step_check_deviation =
        std::abs(r.steady.x_avg) > 0.0
            ? std::abs(std::abs(fine.steady.x_avg) - std::abs(r.steady.x_avg)) /
                  std::abs(r.steady.x_avg)
            : 0.0;
  }
  return r;
}

/// Coarse shared velocity grid for cross-method comparisons: both methods
/// integrate over the same discrete measure, so it need not resolve the
/// continuum, only keep the time-domain cost manageable.
inline VelocityGrid comparison_grid(const ScaledParams& scaled) {
  ScaledParams s = scaled;
  s.vel_nodes = 32;
  GridOptions opt;
  opt.patch_panel = 4.0;
  opt.tail_sigmas = 4.0;
  return build_grid(s, std::optional<double>{}, opt);
}

} // namespace satcav
