#pragma once

// Resonant input-output curve |y|^2(|x|^2). The forward map is single
// valued, so the curve is traced by sweeping the intracavity field and the
// bistable window is read off from the turning points of the curve.

#include "satcav/parallel.hpp"
#include "satcav/selfconsist.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace satcav {

struct TurningPoint {
  double x_sq = 0.0;
  double y_sq = 0.0;
};

struct BistabilityReport {
  std::vector<TurningPoint> turning_points;
  bool bistable = false;
  double y_sq_low = 0.0;  ///< upper-branch onset (local minimum of |y|^2)
  double y_sq_high = 0.0; ///< lower-branch end (local maximum of |y|^2)
};

struct CurvePoint {
  double x_sq = 0.0;
  double y_sq = 0.0;
  bool turning_point = false;
};

struct InputOutputCurve {
  std::vector<CurvePoint> points;
  BistabilityReport report;
};

struct CurveOptions {
  int points_per_decade = 256;
  int refine_iterations = 40;
  int workers = 1;
};

namespace detail {

/// |y|^2 for real x at resonance.
inline double resonant_y_sq(double x_sq, const ScaledParams& scaled, const VelocityGrid& grid) {
  return std::norm(forward_map(complex{std::sqrt(x_sq), 0.0}, 0.0, scaled, grid));
}

inline double curve_slope(double x_sq, const ScaledParams& scaled, const VelocityGrid& grid) {
  const double h = 1e-5 * x_sq;
  return (resonant_y_sq(x_sq + h, scaled, grid) - resonant_y_sq(x_sq - h, scaled, grid)) /
         (2.0 * h);
}

} // namespace detail

/// Sweeps real x at Delta = 0 over a log grid in |x|^2 and locates sign
/// changes of the discrete derivative, refined by bisection on the local
/// derivative. The detuning of `scaled` is ignored (the curve is resonant).
inline InputOutputCurve input_output_curve(ScaledParams scaled, double x_sq_lo, double x_sq_hi,
                                           const CurveOptions& opt = {}) {
  if (!(x_sq_lo > 0.0) || !(x_sq_hi > x_sq_lo))
    throw InvalidParams("input_output_curve: need 0 < x_sq_lo < x_sq_hi");
  scaled.detuning_over_gp = 0.0;
  scaled.validate();
  const VelocityGrid grid = build_grid(scaled, std::sqrt(x_sq_hi));

  const double decades = std::log10(x_sq_hi / x_sq_lo);
  const std::size_t n =
      std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil(decades * opt.points_per_decade)) + 1);
  InputOutputCurve curve;
  curve.points.resize(n);
  parallel_for(n, opt.workers, [&](std::size_t i) {
    const double x_sq = x_sq_lo * std::pow(10.0, decades * static_cast<double>(i) / (n - 1));
    curve.points[i] = {x_sq, detail::resonant_y_sq(x_sq, scaled, grid), false};
  });

  auto& tps = curve.report.turning_points;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double left = curve.points[i].y_sq - curve.points[i - 1].y_sq;
    const double right = curve.points[i + 1].y_sq - curve.points[i].y_sq;
    if ((left > 0.0) == (right > 0.0)) continue;
    curve.points[i].turning_point = true;
    // bisection on the derivative between the neighbours
    double a = curve.points[i - 1].x_sq, b = curve.points[i + 1].x_sq;
    const bool rising_left = left > 0.0;
    for (int k = 0; k < opt.refine_iterations && (b - a) > 1e-10 * b; ++k) {
      const double m = std::sqrt(a * b);
      if ((detail::curve_slope(m, scaled, grid) > 0.0) == rising_left)
        a = m;
      else
        b = m;
    }
    const double x_sq = std::sqrt(a * b);
    tps.push_back({x_sq, detail::resonant_y_sq(x_sq, scaled, grid)});
  }

  auto& rep = curve.report;
  rep.bistable = tps.size() >= 2;
  if (rep.bistable) {
    double lo = tps.front().y_sq, hi = tps.front().y_sq;
    for (const auto& tp : tps) {
      lo = std::min(lo, tp.y_sq);
      hi = std::max(hi, tp.y_sq);
    }
    rep.y_sq_low = lo;
    rep.y_sq_high = hi;
  }
  return curve;
}

/// Default |x|^2 range wide enough to contain both turning points.
inline std::pair<double, double> default_curve_range(const ScaledParams& scaled) {
  return {1e-3, 1e2 * std::max(1.0, scaled.nc0)};
}

inline BistabilityReport bistability(const ScaledParams& scaled, const CurveOptions& opt = {}) {
  const auto [lo, hi] = default_curve_range(scaled);
  return input_output_curve(scaled, lo, hi, opt).report;
}

} // namespace satcav
