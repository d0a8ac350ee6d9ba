#pragma once

// Quadrature over the Gaussian Doppler distribution P(delta) of RMS width
// delta0. Composite Gauss-Legendre: a dense central patch resolves the
// sub-Doppler and Doppleron structure near delta = 0, coarser panels cover
// the Gaussian bulk out to `tail_sigmas` widths.

#include "satcav/params.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace satcav {

struct GridOptions {
  double patch_panel = 1.0;       ///< panel width in the central patch (8 nodes each)
  double min_patch = 10.0;        ///< minimum patch half-width
  double field_factor = 3.0;      ///< patch half-width >= field_factor * |x|_est
  double tail_sigmas = 8.0;       ///< bulk cutoff in units of delta0
};

struct VelocityGrid {
  std::vector<double> nodes;   ///< Doppler shifts, units of gamma_p, ascending
  std::vector<double> weights; ///< include P(delta); sum to 1
  double patch_half_width = 0.0;
  double cutoff = 0.0;
  std::string refinement;

  std::size_t size() const noexcept { return nodes.size(); }
};

namespace detail {

inline constexpr int panel_order = 8;

inline void add_panel(std::vector<double>& x, std::vector<double>& w, double a, double b) {
  using rule = boost::math::quadrature::gauss<double, panel_order>;
  const auto& abscissa = rule::abscissa();
  const auto& weight = rule::weights();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (std::size_t k = 0; k < abscissa.size(); ++k) {
    x.push_back(mid - half * abscissa[k]);
    w.push_back(half * weight[k]);
    x.push_back(mid + half * abscissa[k]);
    w.push_back(half * weight[k]);
  }
}

} // namespace detail

/// Builds the grid for `scaled`. The patch half-width follows |x|_est
/// (default sqrt(y_sq)); when the detuning sits outside the central half of
/// the patch, the patch is widened to also cover the resonant class at
/// delta = -+Delta. Near Delta = 0 the grid does not depend on Delta.
inline VelocityGrid build_grid(const ScaledParams& scaled, std::optional<double> x_est = {},
                               const GridOptions& opt = {}) {
  VelocityGrid grid;
  const double d0 = scaled.delta0_over_gp;
  if (d0 <= 0.0) {
    grid.nodes = {0.0};
    grid.weights = {1.0};
    grid.refinement = "single node (delta0 = 0)";
    return grid;
  }

  const double field = x_est.value_or(std::sqrt(scaled.y_sq));
  double patch = std::max(opt.min_patch, opt.field_factor * field);
  const double detuning = std::abs(scaled.detuning_over_gp);
  if (detuning > 0.5 * patch) patch += detuning;
  const double cutoff = opt.tail_sigmas * d0;
  patch = std::min(patch, cutoff);

  const double panel = std::min(opt.patch_panel, 0.5 * d0);
  const int patch_panels = std::max(1, static_cast<int>(std::ceil(patch / panel - 1e-9)));
  const int bulk_panels =
      std::max(1, (scaled.vel_nodes + 2 * detail::panel_order - 1) / (2 * detail::panel_order));

  std::vector<double> x, w;
  for (int i = 0; i < patch_panels; ++i)
    detail::add_panel(x, w, patch * i / patch_panels, patch * (i + 1) / patch_panels);
  if (cutoff > patch) {
    for (int i = 0; i < bulk_panels; ++i)
      detail::add_panel(x, w, patch + (cutoff - patch) * i / bulk_panels,
                        patch + (cutoff - patch) * (i + 1) / bulk_panels);
  }

  // sort the positive half, then mirror
  std::vector<std::size_t> order(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  const std::size_t half = x.size();
  grid.nodes.resize(2 * half);
  grid.weights.resize(2 * half);
  const double norm = 1.0 / (std::sqrt(constants::two_pi) * d0);
  for (std::size_t k = 0; k < half; ++k) {
    const double node = x[order[k]];
    const double weight = w[order[k]] * norm * std::exp(-0.5 * node * node / (d0 * d0));
    grid.nodes[half + k] = node;
    grid.weights[half + k] = weight;
    grid.nodes[half - 1 - k] = -node;
    grid.weights[half - 1 - k] = weight;
  }
  double total = 0.0;
  for (double v : grid.weights) total += v;
  for (double& v : grid.weights) v /= total;

  grid.patch_half_width = patch;
  grid.cutoff = cutoff;
  grid.refinement = std::to_string(patch_panels) + " patch panels of width " +
                    std::to_string(patch / patch_panels) + " on |delta| <= " +
                    std::to_string(patch) + ", " +
                    (cutoff > patch ? std::to_string(bulk_panels) : std::string("0")) +
                    " bulk panels to " + std::to_string(cutoff);
  return grid;
}

} // namespace satcav
