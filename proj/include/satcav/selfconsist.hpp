#pragma once

// Closure of the cavity field equation. The forward map sends an
// intracavity field x to the drive y that sustains it; the inverse map
// solves forward_map(x) = y by damped Newton iteration.

#include "satcav/errors.hpp"
#include "satcav/floquet.hpp"
#include "satcav/params.hpp"
#include "satcav/velocity_grid.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>

namespace satcav {

/// y = x - (NC0 / sqrt(gamma/gamma_p)) * sum_i w_i [x1^(-1)(delta_i) + x1^(+1)(delta_i)].
/// With l_max = 0 this is exactly the closed-form lowest-order relation.
inline complex forward_map(complex x, double detuning, const ScaledParams& scaled,
                           const VelocityGrid& grid) {
  if (scaled.nc0 == 0.0) return x;
  FloquetSolver solver(scaled.gamma_over_gp, scaled.l_max);
  complex acc{};
  for (std::size_t i = 0; i < grid.size(); ++i)
    acc += grid.weights[i] * solver.solve(x, grid.nodes[i], detuning).dipole_sum();
  return x - scaled.nc0 / std::sqrt(scaled.gamma_over_gp) * acc;
}

enum class Branch { unknown, lower, upper };

inline const char* to_string(Branch b) {
  switch (b) {
  case Branch::lower: return "lower";
  case Branch::upper: return "upper";
  default: return "unknown";
  }
}

struct SteadyState {
  complex x{};
  complex y{};
  double detuning = 0.0;
  double transmission = std::numeric_limits<double>::quiet_NaN();
  double phase = std::numeric_limits<double>::quiet_NaN();
  int newton_iters = 0;
  double residual = 0.0;
  bool converged = false;
  Branch branch = Branch::unknown;
  bool multi_branch = false;          ///< lower and upper continuations disagree
  std::optional<complex> alternate_x; ///< the other branch when multi_branch
  double truncation_increment = 0.0;  ///< |F_l(x) - F_{l-2}(x)| / max(1,|y|)
};

struct NewtonOptions {
  std::optional<complex> seed;  ///< defaults to the empty-cavity field x = y
  bool check_branches = false;  ///< also continue up from weak drive and compare
  bool continuation = false;    ///< solve by continuation from weak drive only
  bool report_truncation = true;
};

namespace detail {

inline void fill_observables(SteadyState& s) {
  if (std::abs(s.y) > 0.0) {
    const complex ratio = s.x / s.y;
    s.transmission = std::norm(ratio);
    s.phase = std::arg(ratio);
  }
}

struct NewtonOutcome {
  complex x;
  double residual;
  int iters;
  bool converged;
};

inline NewtonOutcome newton_iterate(complex y, double detuning, const ScaledParams& scaled,
                                    const VelocityGrid& grid, complex seed) {
  auto residual = [&](complex z) { return forward_map(z, detuning, scaled, grid) - y; };
  const double tol = scaled.newton_tol * std::max(1.0, std::abs(y));

  complex x = seed;
  complex f = residual(x);
  double best = std::abs(f);
  for (int iter = 1; iter <= scaled.max_newton_iters; ++iter) {
    if (std::abs(f) < tol) return {x, std::abs(f), iter, true};

    const double h = 1e-6 * std::max(1.0, std::abs(x));
    const complex jr = (residual(x + h) - residual(x - h)) / (2.0 * h);
    const complex ji = (residual(x + complex{0.0, h}) - residual(x - complex{0.0, h})) / (2.0 * h);
    // [Re jr  Re ji] [dr]   [-Re f]
    // [Im jr  Im ji] [di] = [-Im f]
    const double det = jr.real() * ji.imag() - ji.real() * jr.imag();
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) return {x, best, iter, false};
    const double dr = (-f.real() * ji.imag() + ji.real() * f.imag()) / det;
    const double di = (-jr.real() * f.imag() + jr.imag() * f.real()) / det;
    const complex dx{dr, di};

    double step = 1.0;
    complex xn = x + dx;
    complex fn = residual(xn);
    while (!(std::abs(fn) < std::abs(f)) && step > 1e-10) {
      step *= 0.5;
      xn = x + step * dx;
      fn = residual(xn);
    }
    if (!(std::abs(fn) < std::abs(f))) return {x, best, iter, false};
    x = xn;
    f = fn;
    best = std::min(best, std::abs(f));
  }
  return {x, std::abs(f), scaled.max_newton_iters, std::abs(f) < tol};
}

/// Follows the branch connected to weak drive: |y|^2 is raised from
/// min(|y|^2, 1e-2) in 25% steps, each solve seeded by the previous field
/// (or by the empty cavity if that fails, which lets the ramp jump past the
/// end of a branch).
inline std::optional<NewtonOutcome> continue_from_weak_drive(complex y, double detuning,
                                                            const ScaledParams& scaled,
                                                            const VelocityGrid& grid) {
  const double y_abs_sq = std::norm(y);
  if (y_abs_sq == 0.0) return newton_iterate(y, detuning, scaled, grid, y);
  double current_sq = std::min(y_abs_sq, 1e-2);
  complex seed = y * std::sqrt(current_sq / y_abs_sq);
  NewtonOutcome last{};
  int total = 0;
  while (true) {
    const complex y_k = y * std::sqrt(current_sq / y_abs_sq);
    last = newton_iterate(y_k, detuning, scaled, grid, seed);
    if (!last.converged) last = newton_iterate(y_k, detuning, scaled, grid, y_k);
    if (!last.converged) return std::nullopt;
    total += last.iters;
    if (current_sq >= y_abs_sq) break;
    const double next_sq = std::min(y_abs_sq, 1.25 * current_sq);
    seed = last.x * std::sqrt(next_sq / current_sq);
    current_sq = next_sq;
  }
  last.iters = total;
  return last;
}

} // namespace detail

/// Solves forward_map(x) = y. The default seed is the empty-cavity field;
/// if that solve fails, or `continuation` is set, the branch connected to
/// weak drive is followed instead. Throws NonConvergence (carrying the best
/// residual) when no strategy converges.
inline SteadyState newton_solve(complex y, double detuning, const ScaledParams& scaled,
                                const VelocityGrid& grid, const NewtonOptions& opt = {}) {
  SteadyState s;
  s.y = y;
  s.detuning = detuning;
  std::optional<detail::NewtonOutcome> out;
  double best = std::numeric_limits<double>::infinity();
  int iters = 0;
  if (!opt.continuation) {
    const auto direct = detail::newton_iterate(y, detuning, scaled, grid, opt.seed.value_or(y));
    if (direct.converged) out = direct;
    best = direct.residual;
    iters = direct.iters;
  }
  if (!out) {
    out = detail::continue_from_weak_drive(y, detuning, scaled, grid);
    if (out) s.branch = Branch::lower;
  }
  if (!out)
    throw NonConvergence("newton_solve: no convergence after " + std::to_string(iters) +
                             " iterations (best residual " + std::to_string(best) + ")",
                         best, iters);
  s.x = out->x;
  s.residual = out->residual;
  s.newton_iters = out->iters;
  s.converged = true;

  if (opt.check_branches && std::abs(y) > 0.0) {
    const auto low = detail::continue_from_weak_drive(y, detuning, scaled, grid);
    if (low && std::abs(low->x - s.x) > 1e-6 * std::max(1.0, std::abs(s.x))) {
      s.multi_branch = true;
      s.alternate_x = low->x;
      s.branch = std::norm(s.x) > std::norm(low->x) ? Branch::upper : Branch::lower;
    }
  }

  if (opt.report_truncation && scaled.l_max >= 2 && scaled.nc0 > 0.0) {
    ScaledParams lower = scaled;
    lower.l_max -= 2;
    s.truncation_increment = std::abs(forward_map(s.x, detuning, scaled, grid) -
                                      forward_map(s.x, detuning, lower, grid)) /
                             std::max(1.0, std::abs(y));
  }
  detail::fill_observables(s);
  return s;
}

/// Convenience overload: grid built from `scaled` (|y|^2 and detuning).
inline SteadyState newton_solve(const ScaledParams& scaled, const NewtonOptions& opt = {}) {
  const VelocityGrid grid = build_grid(scaled);
  return newton_solve(complex{std::sqrt(scaled.y_sq), 0.0}, scaled.detuning_over_gp, scaled,
                      grid, opt);
}

} // namespace satcav
